#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mouseauth/mau.hpp"

namespace mouseauth {

inline constexpr int kImposterClass = 0;
inline constexpr int kLegitimateClass = 1;
inline constexpr std::size_t kNumClasses = 2;

/// How a window is scaled before the stem. per_mau: own mean and population
/// sd. global: fixed shift and scale fitted on the training set by train().
/// none: raw speeds.
enum class InputScaling { kPerMau, kGlobal, kNone };

const char* input_scaling_name(InputScaling s);
InputScaling parse_input_scaling(std::string_view name);

struct ModelConfig {
  std::size_t input_length = 100;
  std::size_t conv_channels = 16;
  std::size_t kernel_size = 5;
  std::size_t res_blocks = 2;
  std::size_t res_kernel = 3;
  std::size_t gru_hidden = 32;
  std::size_t classes = kNumClasses;
  InputScaling input_scaling = InputScaling::kPerMau;
  double input_shift = 0.0;  // used by kGlobal
  double input_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  /// Positives per negative when datasets are assembled; training itself
  /// uses whatever mix it is given.
  double pos_neg_ratio = 5.0;
  /// Mini-batch gradients with a larger global L2 norm are rescaled to it
  /// before the Adam step. 0 disables clipping.
  double grad_clip_norm = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// All trainable weights in one flat buffer, addressed through a named layout:
///   stem.w [C,1,K]  stem.b [C]
///   res{i}.w1 [C,C,Kr]  res{i}.b1 [C]  res{i}.w2 [C,C,Kr]  res{i}.b2 [C]
///   gru.{z,r,h}.w [H,C]  gru.{z,r,h}.u [H,H]  gru.{z,r,h}.b [H]
///   dense.w [2,H]  dense.b [2]
/// Gradients use the same type.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(const ModelConfig& config);  // all zeros

  const ModelConfig& config() const { return config_; }
  const std::vector<TensorSpec>& layout() const { return layout_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  const TensorSpec& spec(std::string_view name) const;
  std::span<double> tensor(std::string_view name);
  std::span<const double> tensor(std::string_view name) const;

  bool same_shape(const ModelParams& other) const;

 private:
  ModelConfig config_;
  std::vector<TensorSpec> layout_;
  std::vector<double> values_;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
ModelParams init_params(const ModelConfig& config);

/// Activations kept for the backward pass of one sample.
struct SampleCache {
  std::vector<double> input;  // standardized, [L]
  std::vector<double> stem_pre;  // [C,L]
  std::vector<double> stem_out;
  struct Block {
    std::vector<double> in, pre1, act1, pre2, out;  // each [C,L]
  };
  std::vector<Block> blocks;
  // [L+1, H] hidden states (row 0 = initial zeros); gates [L, H].
  std::vector<double> hidden, z, r, cand;
  std::vector<double> logits;
  std::vector<double> probs;
};

struct ForwardResult {
  std::vector<std::vector<double>> probs;  // per sample, kNumClasses entries
  std::vector<SampleCache> cache;
  std::uint64_t params_fingerprint = 0;
  std::uint64_t batch_fingerprint = 0;
};

/// Per-MAU standardization: subtract the mean, divide by the population
/// standard deviation floored at 1e-8.
std::vector<double> standardize(std::span<const double> values);

ForwardResult forward(const ModelParams& params, std::span<const Mau> batch);

/// Mean of -log p(true class), probabilities floored at 1e-12.
double cross_entropy(const std::vector<std::vector<double>>& probs,
                     std::span<const int> labels);

/// Gradient of the mean cross-entropy taken through the log-softmax, so
/// p - onehot(y) at the logits even where the loss value sits on its 1e-12
/// floor. `cache` must come from forward(params, batch).
ModelParams backward(const ModelParams& params, std::span<const Mau> batch,
                     std::span<const int> labels, const ForwardResult& cache);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  static AdamState zeros_like(const ModelParams& params);
};

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               const TrainConfig& cfg);

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // full-dataset loss after each epoch
};

TrainResult train(std::span<const Mau> inputs, std::span<const int> labels,
                  const ModelConfig& mcfg, const TrainConfig& tcfg);

/// Probability that the window belongs to the legitimate user.
double predict(const ModelParams& params, std::span<const double> values);

/// predict() over many windows; samples are independent.
std::vector<double> predict_batch(const ModelParams& params, std::span<const Mau> batch,
                                  std::size_t threads = 1);

}  // namespace mouseauth
