#include "mouseauth/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <type_traits>

#include "mouseauth/error.hpp"
#include "mouseauth/parallel.hpp"
#include "mouseauth/rng.hpp"

namespace mouseauth {
namespace {

constexpr double kProbFloor = 1e-12;

std::uint64_t fnv1a(std::span<const double> values, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (double x : values) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t batch_fingerprint(std::span<const Mau> batch) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& m : batch) h = fnv1a(m.values, h);
  return h;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// "Same" 1-D convolution, zero padding (K-1)/2 on both sides.
// out[co,t] = b[co] + sum_ci sum_k w[co,ci,k] * in[ci, t+k-pad]
void conv_forward(std::span<const double> in, std::size_t in_ch, std::size_t len,
                  std::span<const double> w, std::span<const double> b,
                  std::size_t out_ch, std::size_t kernel, std::span<double> out) {
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const auto n = static_cast<std::ptrdiff_t>(len);
  for (std::size_t co = 0; co < out_ch; ++co) {
    double* o = out.data() + co * len;
    std::fill(o, o + len, b[co]);
    for (std::size_t ci = 0; ci < in_ch; ++ci) {
      const double* x = in.data() + ci * len;
      const double* wk = w.data() + (co * in_ch + ci) * kernel;
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
        const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(n, n - shift);
        const double wv = wk[k];
        for (std::ptrdiff_t t = t0; t < t1; ++t) o[t] += wv * x[t + shift];
      }
    }
  }
}

// Accumulates dW, db and (when din is non-empty) dInput.
void conv_backward(std::span<const double> in, std::size_t in_ch, std::size_t len,
                   std::span<const double> w, std::size_t out_ch, std::size_t kernel,
                   std::span<const double> dout, std::span<double> dw, std::span<double> db,
                   std::span<double> din) {
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const auto n = static_cast<std::ptrdiff_t>(len);
  for (std::size_t co = 0; co < out_ch; ++co) {
    const double* g = dout.data() + co * len;
    double bsum = 0.0;
    for (std::size_t t = 0; t < len; ++t) bsum += g[t];
    db[co] += bsum;
    for (std::size_t ci = 0; ci < in_ch; ++ci) {
      const double* x = in.data() + ci * len;
      const std::size_t base = (co * in_ch + ci) * kernel;
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
        const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(n, n - shift);
        double acc = 0.0;
        for (std::ptrdiff_t t = t0; t < t1; ++t) acc += g[t] * x[t + shift];
        dw[base + k] += acc;
        if (!din.empty()) {
          double* dx = din.data() + ci * len;
          const double wv = w[base + k];
          for (std::ptrdiff_t t = t0; t < t1; ++t) dx[t + shift] += g[t] * wv;
        }
      }
    }
  }
}

void relu(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

// y += M x, M is [rows, cols] row-major.
void matvec_add(std::span<const double> m, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = m.data() + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

// y += M^T g.
void matvec_t_add(std::span<const double> m, std::size_t rows, std::size_t cols,
                  const double* g, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = m.data() + i * cols;
    const double gi = g[i];
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * gi;
  }
}

// dM += g x^T.
void outer_add(std::span<double> dm, std::size_t rows, std::size_t cols, const double* g,
               const double* x) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = dm.data() + i * cols;
    const double gi = g[i];
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

// Tensor views resolved once per call; Value is double or const double.
template <typename Value>
struct TensorViews {
  using Span = std::span<Value>;
  using Params = std::conditional_t<std::is_const_v<Value>, const ModelParams, ModelParams>;

  Span stem_w, stem_b;
  struct Block {
    Span w1, b1, w2, b2;
  };
  std::vector<Block> blocks;
  Span wz, uz, bz, wr, ur, br, wh, uh, bh;
  Span dense_w, dense_b;

  explicit TensorViews(Params& p) {
    stem_w = p.tensor("stem.w");
    stem_b = p.tensor("stem.b");
    for (std::size_t i = 0; i < p.config().res_blocks; ++i) {
      const std::string pre = "res" + std::to_string(i) + ".";
      blocks.push_back({p.tensor(pre + "w1"), p.tensor(pre + "b1"), p.tensor(pre + "w2"),
                        p.tensor(pre + "b2")});
    }
    wz = p.tensor("gru.z.w");
    uz = p.tensor("gru.z.u");
    bz = p.tensor("gru.z.b");
    wr = p.tensor("gru.r.w");
    ur = p.tensor("gru.r.u");
    br = p.tensor("gru.r.b");
    wh = p.tensor("gru.h.w");
    uh = p.tensor("gru.h.u");
    bh = p.tensor("gru.h.b");
    dense_w = p.tensor("dense.w");
    dense_b = p.tensor("dense.b");
  }
};

using Views = TensorViews<const double>;
using GradViews = TensorViews<double>;

SampleCache forward_one(const ModelConfig& cfg, const Views& w, std::span<const double> x) {
  const std::size_t len = cfg.input_length;
  const std::size_t ch = cfg.conv_channels;
  const std::size_t hid = cfg.gru_hidden;
  SampleCache c;
  switch (cfg.input_scaling) {
    case InputScaling::kPerMau:
      c.input = standardize(x);
      break;
    case InputScaling::kGlobal:
      c.input.resize(len);
      for (std::size_t i = 0; i < len; ++i) c.input[i] = (x[i] - cfg.input_shift) / cfg.input_scale;
      break;
    case InputScaling::kNone:
      c.input.assign(x.begin(), x.end());
      break;
  }

  c.stem_pre.resize(ch * len);
  c.stem_out.resize(ch * len);
  conv_forward(c.input, 1, len, w.stem_w, w.stem_b, ch, cfg.kernel_size, c.stem_pre);
  relu(c.stem_pre, c.stem_out);

  const std::vector<double>* feat = &c.stem_out;
  c.blocks.resize(w.blocks.size());
  for (std::size_t b = 0; b < w.blocks.size(); ++b) {
    auto& blk = c.blocks[b];
    blk.in = *feat;
    blk.pre1.resize(ch * len);
    blk.act1.resize(ch * len);
    blk.pre2.resize(ch * len);
    blk.out.resize(ch * len);
    conv_forward(blk.in, ch, len, w.blocks[b].w1, w.blocks[b].b1, ch, cfg.res_kernel,
                 blk.pre1);
    relu(blk.pre1, blk.act1);
    conv_forward(blk.act1, ch, len, w.blocks[b].w2, w.blocks[b].b2, ch, cfg.res_kernel,
                 blk.pre2);
    for (std::size_t i = 0; i < blk.out.size(); ++i) {
      const double s = blk.pre2[i] + blk.in[i];
      blk.out[i] = s > 0.0 ? s : 0.0;
    }
    feat = &blk.out;
  }

  c.hidden.assign((len + 1) * hid, 0.0);
  c.z.resize(len * hid);
  c.r.resize(len * hid);
  c.cand.resize(len * hid);
  std::vector<double> xt(ch), az(hid), ar(hid), ah(hid), rh(hid);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t k = 0; k < ch; ++k) xt[k] = (*feat)[k * len + t];
    const double* hp = c.hidden.data() + t * hid;
    std::copy(w.bz.begin(), w.bz.end(), az.begin());
    std::copy(w.br.begin(), w.br.end(), ar.begin());
    std::copy(w.bh.begin(), w.bh.end(), ah.begin());
    matvec_add(w.wz, hid, ch, xt.data(), az.data());
    matvec_add(w.uz, hid, hid, hp, az.data());
    matvec_add(w.wr, hid, ch, xt.data(), ar.data());
    matvec_add(w.ur, hid, hid, hp, ar.data());
    double* z = c.z.data() + t * hid;
    double* r = c.r.data() + t * hid;
    for (std::size_t j = 0; j < hid; ++j) {
      z[j] = sigmoid(az[j]);
      r[j] = sigmoid(ar[j]);
      rh[j] = r[j] * hp[j];
    }
    matvec_add(w.wh, hid, ch, xt.data(), ah.data());
    matvec_add(w.uh, hid, hid, rh.data(), ah.data());
    double* cand = c.cand.data() + t * hid;
    double* hn = c.hidden.data() + (t + 1) * hid;
    for (std::size_t j = 0; j < hid; ++j) {
      cand[j] = std::tanh(ah[j]);
      hn[j] = (1.0 - z[j]) * hp[j] + z[j] * cand[j];
    }
  }

  const double* h_last = c.hidden.data() + len * hid;
  c.logits.assign(w.dense_b.begin(), w.dense_b.end());
  matvec_add(w.dense_w, kNumClasses, hid, h_last, c.logits.data());
  const double top = *std::max_element(c.logits.begin(), c.logits.end());
  c.probs.resize(kNumClasses);
  double total = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    c.probs[k] = std::exp(c.logits[k] - top);
    total += c.probs[k];
  }
  for (double& p : c.probs) p /= total;
  return c;
}

void backward_one(const ModelConfig& cfg, const Views& w, const SampleCache& c,
                  std::span<const double> dlogits, GradViews& g) {
  const std::size_t len = cfg.input_length;
  const std::size_t ch = cfg.conv_channels;
  const std::size_t hid = cfg.gru_hidden;

  const double* h_last = c.hidden.data() + len * hid;
  outer_add(g.dense_w, kNumClasses, hid, dlogits.data(), h_last);
  for (std::size_t k = 0; k < kNumClasses; ++k) g.dense_b[k] += dlogits[k];
  std::vector<double> dh(hid, 0.0);
  matvec_t_add(w.dense_w, kNumClasses, hid, dlogits.data(), dh.data());

  const std::vector<double>& feat = c.blocks.empty() ? c.stem_out : c.blocks.back().out;
  std::vector<double> dfeat(ch * len, 0.0);
  std::vector<double> xt(ch), dx(ch), dprev(hid), daz(hid), dar(hid), dah(hid), drh(hid),
      rh(hid);
  for (std::size_t t = len; t-- > 0;) {
    for (std::size_t k = 0; k < ch; ++k) xt[k] = feat[k * len + t];
    const double* hp = c.hidden.data() + t * hid;
    const double* z = c.z.data() + t * hid;
    const double* r = c.r.data() + t * hid;
    const double* cand = c.cand.data() + t * hid;

    for (std::size_t j = 0; j < hid; ++j) {
      dprev[j] = dh[j] * (1.0 - z[j]);
      const double dz = dh[j] * (cand[j] - hp[j]);
      const double dcand = dh[j] * z[j];
      daz[j] = dz * z[j] * (1.0 - z[j]);
      dah[j] = dcand * (1.0 - cand[j] * cand[j]);
      rh[j] = r[j] * hp[j];
    }
    outer_add(g.wh, hid, ch, dah.data(), xt.data());
    outer_add(g.uh, hid, hid, dah.data(), rh.data());
    for (std::size_t j = 0; j < hid; ++j) g.bh[j] += dah[j];
    std::fill(drh.begin(), drh.end(), 0.0);
    matvec_t_add(w.uh, hid, hid, dah.data(), drh.data());
    for (std::size_t j = 0; j < hid; ++j) {
      dar[j] = drh[j] * hp[j] * r[j] * (1.0 - r[j]);
      dprev[j] += drh[j] * r[j];
    }

    outer_add(g.wz, hid, ch, daz.data(), xt.data());
    outer_add(g.uz, hid, hid, daz.data(), hp);
    outer_add(g.wr, hid, ch, dar.data(), xt.data());
    outer_add(g.ur, hid, hid, dar.data(), hp);
    for (std::size_t j = 0; j < hid; ++j) {
      g.bz[j] += daz[j];
      g.br[j] += dar[j];
    }
    matvec_t_add(w.uz, hid, hid, daz.data(), dprev.data());
    matvec_t_add(w.ur, hid, hid, dar.data(), dprev.data());

    std::fill(dx.begin(), dx.end(), 0.0);
    matvec_t_add(w.wz, hid, ch, daz.data(), dx.data());
    matvec_t_add(w.wr, hid, ch, dar.data(), dx.data());
    matvec_t_add(w.wh, hid, ch, dah.data(), dx.data());
    for (std::size_t k = 0; k < ch; ++k) dfeat[k * len + t] = dx[k];
    dh.swap(dprev);
  }

  std::vector<double> dpre1(ch * len), dact1(ch * len), ds(ch * len);
  for (std::size_t b = c.blocks.size(); b-- > 0;) {
    const auto& blk = c.blocks[b];
    for (std::size_t i = 0; i < ds.size(); ++i) ds[i] = blk.out[i] > 0.0 ? dfeat[i] : 0.0;
    // Skip path carries ds straight to the block input; conv paths add to it.
    std::vector<double> din = ds;
    std::fill(dact1.begin(), dact1.end(), 0.0);
    conv_backward(blk.act1, ch, len, w.blocks[b].w2, ch, cfg.res_kernel, ds,
                  g.blocks[b].w2, g.blocks[b].b2, dact1);
    for (std::size_t i = 0; i < dpre1.size(); ++i) {
      dpre1[i] = blk.pre1[i] > 0.0 ? dact1[i] : 0.0;
    }
    conv_backward(blk.in, ch, len, w.blocks[b].w1, ch, cfg.res_kernel, dpre1,
                  g.blocks[b].w1, g.blocks[b].b1, din);
    dfeat.swap(din);
  }

  for (std::size_t i = 0; i < dfeat.size(); ++i) {
    if (!(c.stem_pre[i] > 0.0)) dfeat[i] = 0.0;
  }
  conv_backward(c.input, 1, len, w.stem_w, ch, cfg.kernel_size, dfeat, g.stem_w, g.stem_b,
                {});
}

void check_batch(const ModelConfig& cfg, std::span<const Mau> batch) {
  for (const auto& m : batch) {
    if (m.values.size() != cfg.input_length) {
      fail(ErrorCode::kShapeMismatch, "MAU length " + std::to_string(m.values.size()) +
                                          " != model input length " +
                                          std::to_string(cfg.input_length));
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (input_length < 1 || conv_channels < 1 || kernel_size < 1 || res_kernel < 1 ||
      gru_hidden < 1) {
    fail(ErrorCode::kInvalidConfig, "model sizes must be >= 1");
  }
  if (kernel_size % 2 == 0 || res_kernel % 2 == 0) {
    fail(ErrorCode::kInvalidConfig, "kernel sizes must be odd");
  }
  if (classes != kNumClasses) fail(ErrorCode::kInvalidConfig, "classes must be 2");
  if (!(input_scale > 0.0) || !std::isfinite(input_scale) || !std::isfinite(input_shift)) {
    fail(ErrorCode::kInvalidConfig, "input_scale must be positive and finite");
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) fail(ErrorCode::kInvalidConfig, "learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "beta1 and beta2 must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) fail(ErrorCode::kInvalidConfig, "epsilon must be > 0");
  if (batch_size < 1 || epochs < 1) {
    fail(ErrorCode::kInvalidConfig, "batch_size and epochs must be >= 1");
  }
  if (!(pos_neg_ratio > 0.0)) fail(ErrorCode::kInvalidConfig, "pos_neg_ratio must be > 0");
  if (!(grad_clip_norm >= 0.0)) fail(ErrorCode::kInvalidConfig, "grad_clip_norm must be >= 0");
}

ModelParams::ModelParams(const ModelConfig& config) : config_(config) {
  config_.validate();
  const std::size_t c = config.conv_channels;
  const std::size_t h = config.gru_hidden;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<std::size_t> shape) {
    const std::size_t size = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                             std::multiplies<>());
    layout_.push_back({std::move(name), std::move(shape), offset, size});
    offset += size;
  };
  add("stem.w", {c, 1, config.kernel_size});
  add("stem.b", {c});
  for (std::size_t i = 0; i < config.res_blocks; ++i) {
    const std::string pre = "res" + std::to_string(i) + ".";
    add(pre + "w1", {c, c, config.res_kernel});
    add(pre + "b1", {c});
    add(pre + "w2", {c, c, config.res_kernel});
    add(pre + "b2", {c});
  }
  for (const char* gate : {"z", "r", "h"}) {
    const std::string pre = std::string("gru.") + gate + ".";
    add(pre + "w", {h, c});
    add(pre + "u", {h, h});
    add(pre + "b", {h});
  }
  add("dense.w", {kNumClasses, h});
  add("dense.b", {kNumClasses});
  values_.assign(offset, 0.0);
}

const TensorSpec& ModelParams::spec(std::string_view name) const {
  for (const auto& s : layout_) {
    if (s.name == name) return s;
  }
  fail(ErrorCode::kShapeMismatch, "no tensor named '" + std::string(name) + "'");
}

std::span<double> ModelParams::tensor(std::string_view name) {
  const auto& s = spec(name);
  return std::span<double>(values_).subspan(s.offset, s.size);
}

std::span<const double> ModelParams::tensor(std::string_view name) const {
  const auto& s = spec(name);
  return std::span<const double>(values_).subspan(s.offset, s.size);
}

bool ModelParams::same_shape(const ModelParams& other) const {
  if (layout_.size() != other.layout_.size() || values_.size() != other.values_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < layout_.size(); ++i) {
    if (layout_[i].name != other.layout_[i].name ||
        layout_[i].shape != other.layout_[i].shape) {
      return false;
    }
  }
  return true;
}

ModelParams init_params(const ModelConfig& config) {
  ModelParams params(config);
  Rng rng(config.seed);
  for (const auto& s : params.layout()) {
    if (s.shape.size() < 2) continue;  // biases stay zero
    // [out, in, k] for convolutions, [out, in] for matrices.
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < s.shape.size(); ++d) fan_in *= s.shape[d];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& w : params.tensor(s.name)) w = rng.uniform(-bound, bound);
  }
  return params;
}

std::vector<double> standardize(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  const double sd = std::max(std::sqrt(ss / n), 1e-8);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

ForwardResult forward(const ModelParams& params, std::span<const Mau> batch) {
  const auto& cfg = params.config();
  check_batch(cfg, batch);
  const Views views(params);
  ForwardResult out;
  out.cache.reserve(batch.size());
  for (const auto& m : batch) {
    out.cache.push_back(forward_one(cfg, views, m.values));
    out.probs.push_back(out.cache.back().probs);
  }
  out.params_fingerprint = fnv1a(params.values());
  out.batch_fingerprint = batch_fingerprint(batch);
  return out;
}

double cross_entropy(const std::vector<std::vector<double>>& probs,
                     std::span<const int> labels) {
  if (probs.size() != labels.size() || probs.empty()) {
    fail(ErrorCode::kShapeMismatch, "probabilities and labels differ in count");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= probs[i].size()) {
      fail(ErrorCode::kLabelOutOfRange, "label " + std::to_string(y) + " out of range");
    }
    total -= std::log(std::max(probs[i][static_cast<std::size_t>(y)], kProbFloor));
  }
  return total / static_cast<double>(probs.size());
}

ModelParams backward(const ModelParams& params, std::span<const Mau> batch,
                     std::span<const int> labels, const ForwardResult& cache) {
  if (cache.cache.size() != batch.size() || labels.size() != batch.size() ||
      cache.params_fingerprint != fnv1a(params.values()) ||
      cache.batch_fingerprint != batch_fingerprint(batch)) {
    fail(ErrorCode::kCacheMismatch, "forward cache does not match params/batch");
  }
  const auto& cfg = params.config();
  const Views views(params);
  ModelParams grads(cfg);
  GradViews gv(grads);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> dlogits(kNumClasses);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= kNumClasses) {
      fail(ErrorCode::kLabelOutOfRange, "label " + std::to_string(y) + " out of range");
    }
    const auto& probs = cache.cache[i].probs;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      dlogits[k] = (probs[k] - (static_cast<int>(k) == y ? 1.0 : 0.0)) * inv_n;
    }
    backward_one(cfg, views, cache.cache[i], dlogits, gv);
  }
  return grads;
}

AdamState AdamState::zeros_like(const ModelParams& params) {
  return {std::vector<double>(params.values().size(), 0.0),
          std::vector<double>(params.values().size(), 0.0), 0};
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               const TrainConfig& cfg) {
  const std::size_t n = params.values().size();
  if (grads.values().size() != n || state.m.size() != n || state.v.size() != n) {
    fail(ErrorCode::kShapeMismatch, "adam: parameter, gradient and state sizes differ");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto p = params.values();
  const auto g = grads.values();
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

const char* input_scaling_name(InputScaling s) {
  switch (s) {
    case InputScaling::kPerMau: return "per_mau";
    case InputScaling::kGlobal: return "global";
    case InputScaling::kNone: return "none";
  }
  return "per_mau";
}

InputScaling parse_input_scaling(std::string_view name) {
  if (name == "per_mau") return InputScaling::kPerMau;
  if (name == "global") return InputScaling::kGlobal;
  if (name == "none") return InputScaling::kNone;
  fail(ErrorCode::kInvalidConfig, "unknown input_scaling '" + std::string(name) + "'");
}

TrainResult train(std::span<const Mau> inputs, std::span<const int> labels,
                  const ModelConfig& mcfg, const TrainConfig& tcfg) {
  mcfg.validate();
  tcfg.validate();
  if (inputs.size() != labels.size()) {
    fail(ErrorCode::kShapeMismatch, "inputs and labels differ in count");
  }
  check_batch(mcfg, inputs);
  bool has_pos = false;
  bool has_neg = false;
  for (int y : labels) {
    if (y != kImposterClass && y != kLegitimateClass) {
      fail(ErrorCode::kLabelOutOfRange, "label " + std::to_string(y) + " out of range");
    }
    (y == kLegitimateClass ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    fail(ErrorCode::kSingleClassDataset, "training data must contain both classes");
  }

  ModelConfig fitted = mcfg;
  if (mcfg.input_scaling == InputScaling::kGlobal) {
    double sum = 0.0, count = 0.0;
    for (const auto& m : inputs) {
      for (double x : m.values) sum += x;
      count += static_cast<double>(m.values.size());
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& m : inputs) {
      for (double x : m.values) ss += (x - mean) * (x - mean);
    }
    fitted.input_shift = mean;
    fitted.input_scale = std::max(std::sqrt(ss / count), 1e-8);
  }
  const ModelConfig& cfg = fitted;
  TrainResult result{init_params(cfg), {}};
  AdamState state = AdamState::zeros_like(result.params);
  Rng rng(tcfg.seed);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Mau> batch;
  std::vector<int> batch_labels;

  for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + tcfg.batch_size);
      batch.clear();
      batch_labels.clear();
      for (std::size_t k = start; k < stop; ++k) {
        batch.push_back(inputs[order[k]]);
        batch_labels.push_back(labels[order[k]]);
      }
      const auto fwd = forward(result.params, batch);
      auto grads = backward(result.params, batch, batch_labels, fwd);
      if (tcfg.grad_clip_norm > 0.0) {
        double sq = 0.0;
        for (double g : grads.values()) sq += g * g;
        const double norm = std::sqrt(sq);
        if (norm > tcfg.grad_clip_norm) {
          const double scale = tcfg.grad_clip_norm / norm;
          for (double& g : grads.values()) g *= scale;
        }
      }
      adam_step(result.params, grads, state, tcfg);
    }
    std::vector<std::vector<double>> probs;
    probs.reserve(inputs.size());
    const Views views(result.params);
    for (const auto& m : inputs) probs.push_back(forward_one(cfg, views, m.values).probs);
    result.loss_history.push_back(cross_entropy(probs, labels));
  }
  return result;
}

double predict(const ModelParams& params, std::span<const double> values) {
  const auto& cfg = params.config();
  if (values.size() != cfg.input_length) {
    fail(ErrorCode::kShapeMismatch, "MAU length " + std::to_string(values.size()) +
                                        " != model input length " +
                                        std::to_string(cfg.input_length));
  }
  const Views views(params);
  return forward_one(cfg, views, values).probs[kLegitimateClass];
}

std::vector<double> predict_batch(const ModelParams& params, std::span<const Mau> batch,
                                  std::size_t threads) {
  check_batch(params.config(), batch);
  std::vector<double> scores(batch.size());
  parallel_for(batch.size(), threads,
               [&](std::size_t i) { scores[i] = predict(params, batch[i].values); });
  return scores;
}

}  // namespace mouseauth
