#include "mouseauth/io.hpp"

#include <cstdio>
#include <fstream>

#include "mouseauth/error.hpp"

namespace mouseauth {
namespace {

constexpr const char* kCheckpointFormat = "mouseauth.checkpoint";
constexpr int kCheckpointVersion = 1;

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Json summary_json(const MetricSummary& s) { return {{"mean", s.mean}, {"sd", s.sd}}; }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

Json to_json(const ParseReport& r) {
  return {{"file", r.file},
          {"events", r.events},
          {"dropped", r.dropped()},
          {"dropped_malformed", r.dropped_malformed},
          {"dropped_out_of_order", r.dropped_out_of_order},
          {"data_rows", r.data_rows}};
}

Json to_json(const SkippedFile& s) { return {{"file", s.file}, {"reason", s.reason}}; }

Json to_json(const SufficiencyReport& r) {
  Json traj = Json::array();
  for (const auto& p : r.kl_trajectory) traj.push_back({p.n, p.kl});
  std::string status = "converged";
  if (r.too_short) {
    status = "too_short";
  } else if (r.exhausted()) {
    status = "exhausted";
  }
  return {{"user_id", r.user_id},
          {"session_id", r.session_id},
          {"length", r.length},
          {"step_m", r.step_m},
          {"eps1", r.eps1},
          {"eps2", r.eps2},
          {"status", status},
          {"n_hat", r.n_hat ? Json(*r.n_hat) : Json("exhausted")},
          {"kl_trajectory", traj}};
}

Json to_json(const UserVolume& v) {
  return {{"user_id", v.user_id},
          {"proper_volume", v.total},
          {"total_volume", v.raw_total},
          {"exhausted_sessions", v.exhausted_sessions},
          {"flagged", v.flagged()}};
}

Json to_json(const ApEnProfile& p) {
  return {{"candidate_lengths", p.candidate_lengths},
          {"apen_values", p.apen_values},
          {"slopes", p.slopes},
          {"tolerance_r", p.tolerance_r},
          {"slope_threshold", p.slope_threshold},
          {"analyzed_samples", p.analyzed_samples},
          {"selected_length", p.selected_length},
          {"fallback", p.fallback}};
}

Json to_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

Json to_json(const EvalReport& r) {
  return {{"legit_user", r.legit_user},
          {"f1", r.f1},
          {"auc", r.auc},
          {"eer", r.eer},
          {"eer_threshold", r.eer_threshold},
          {"dsr", r.dsr ? Json(*r.dsr) : Json(nullptr)},
          {"dsr_at_eer", r.dsr_at_eer ? Json(*r.dsr_at_eer) : Json(nullptr)},
          {"counts", to_json(r.counts)},
          {"samples", r.samples},
          {"unseen_samples", r.unseen_samples}};
}

Json to_json(const AggregateReport& r) {
  return {{"users", r.users},
          {"f1", summary_json(r.f1)},
          {"auc", summary_json(r.auc)},
          {"eer", summary_json(r.eer)},
          {"dsr", summary_json(r.dsr)}};
}

Json to_json(const ModelConfig& c) {
  return {{"input_length", c.input_length}, {"conv_channels", c.conv_channels},
          {"kernel_size", c.kernel_size},   {"res_blocks", c.res_blocks},
          {"res_kernel", c.res_kernel},     {"gru_hidden", c.gru_hidden},
          {"classes", c.classes},           {"input_scaling", input_scaling_name(c.input_scaling)},
          {"input_shift", c.input_shift},   {"input_scale", c.input_scale},
          {"seed", c.seed}};
}

Json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},
          {"beta2", c.beta2},                 {"epsilon", c.epsilon},
          {"batch_size", c.batch_size},       {"epochs", c.epochs},
          {"pos_neg_ratio", c.pos_neg_ratio}, {"grad_clip_norm", c.grad_clip_norm},
          {"seed", c.seed}};
}

Json to_json(const Mau& m) {
  return {{"user_id", m.user_id},
          {"session_id", m.session_id},
          {"start_index", m.start_index},
          {"values", m.values}};
}

ModelConfig model_config_from_json(const Json& j) {
  ModelConfig c;
  c.input_length = get_or(j, "input_length", c.input_length);
  c.conv_channels = get_or(j, "conv_channels", c.conv_channels);
  c.kernel_size = get_or(j, "kernel_size", c.kernel_size);
  c.res_blocks = get_or(j, "res_blocks", c.res_blocks);
  c.res_kernel = get_or(j, "res_kernel", c.res_kernel);
  c.gru_hidden = get_or(j, "gru_hidden", c.gru_hidden);
  c.classes = get_or(j, "classes", c.classes);
  if (j.contains("input_scaling")) {
    c.input_scaling = parse_input_scaling(j.at("input_scaling").get<std::string>());
  }
  c.input_shift = get_or(j, "input_shift", c.input_shift);
  c.input_scale = get_or(j, "input_scale", c.input_scale);
  c.seed = get_or(j, "seed", c.seed);
  return c;
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
  c.beta1 = get_or(j, "beta1", c.beta1);
  c.beta2 = get_or(j, "beta2", c.beta2);
  c.epsilon = get_or(j, "epsilon", c.epsilon);
  c.batch_size = get_or(j, "batch_size", c.batch_size);
  c.epochs = get_or(j, "epochs", c.epochs);
  c.pos_neg_ratio = get_or(j, "pos_neg_ratio", c.pos_neg_ratio);
  c.grad_clip_norm = get_or(j, "grad_clip_norm", c.grad_clip_norm);
  c.seed = get_or(j, "seed", c.seed);
  return c;
}

Mau mau_from_json(const Json& j) {
  return {j.at("user_id").get<std::string>(), j.at("session_id").get<std::string>(),
          j.at("start_index").get<std::size_t>(), j.at("values").get<std::vector<double>>()};
}

Json checkpoint_to_json(const ModelParams& params) {
  Json tensors = Json::array();
  for (const auto& s : params.layout()) {
    const auto values = params.tensor(s.name);
    tensors.push_back({{"name", s.name},
                       {"shape", s.shape},
                       {"values", std::vector<double>(values.begin(), values.end())}});
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"model_config", to_json(params.config())},
          {"tensors", tensors}};
}

ModelParams checkpoint_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      fail(ErrorCode::kIoError, "not a mouseauth checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      fail(ErrorCode::kIoError, "unsupported checkpoint version");
    }
    ModelParams params(model_config_from_json(j.at("model_config")));
    const auto& tensors = j.at("tensors");
    if (tensors.size() != params.layout().size()) {
      fail(ErrorCode::kShapeMismatch, "checkpoint tensor count does not match config");
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const auto& spec = params.layout()[i];
      const auto& t = tensors[i];
      if (t.at("name").get<std::string>() != spec.name ||
          t.at("shape").get<std::vector<std::size_t>>() != spec.shape) {
        fail(ErrorCode::kShapeMismatch, "checkpoint tensor '" + spec.name + "' mismatch");
      }
      const auto values = t.at("values").get<std::vector<double>>();
      if (values.size() != spec.size) {
        fail(ErrorCode::kShapeMismatch, "checkpoint tensor '" + spec.name + "' size");
      }
      std::copy(values.begin(), values.end(), params.tensor(spec.name).begin());
    }
    return params;
  } catch (const Json::exception& e) {
    fail(ErrorCode::kIoError, std::string("malformed checkpoint: ") + e.what());
  }
}

Json split_to_json(const Split& split) {
  auto samples = [](const std::vector<SplitSample>& xs) {
    Json out = Json::array();
    for (const auto& s : xs) {
      Json m = to_json(s.mau);
      m["label"] = s.label;
      m["unseen"] = s.unseen;
      out.push_back(std::move(m));
    }
    return out;
  };
  return {{"legit_user", split.legit_user},
          {"known_users", split.known_users},
          {"unseen_users", split.unseen_users},
          {"train", samples(split.train)},
          {"test", samples(split.test)}};
}

Split split_from_json(const Json& j) {
  try {
    Split split;
    split.legit_user = j.at("legit_user").get<std::string>();
    split.known_users = j.at("known_users").get<std::vector<std::string>>();
    split.unseen_users = j.at("unseen_users").get<std::vector<std::string>>();
    for (const char* part : {"train", "test"}) {
      auto& dest = std::string(part) == "train" ? split.train : split.test;
      for (const auto& s : j.at(part)) {
        dest.push_back({mau_from_json(s), s.at("label").get<int>(), s.at("unseen").get<bool>()});
      }
    }
    return split;
  } catch (const Json::exception& e) {
    fail(ErrorCode::kIoError, std::string("malformed split: ") + e.what());
  }
}

std::string trajectory_csv(const SufficiencyReport& r) {
  std::string out = "n,kl\n";
  for (const auto& p : r.kl_trajectory) out += std::to_string(p.n) + "," + fmt_double(p.kl) + "\n";
  return out;
}

std::string apen_csv(const ApEnProfile& p) {
  std::string out = "length,apen\n";
  for (std::size_t k = 0; k < p.candidate_lengths.size(); ++k) {
    out += std::to_string(p.candidate_lengths[k]) + "," + fmt_double(p.apen_values[k]) + "\n";
  }
  return out;
}

std::string loss_csv(std::span<const double> losses) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) {
    out += std::to_string(e + 1) + "," + fmt_double(losses[e]) + "\n";
  }
  return out;
}

std::string roc_csv(std::span<const RocPoint> points) {
  std::string out = "threshold,far,tpr\n";
  for (const auto& p : points) {
    out += fmt_double(p.threshold) + "," + fmt_double(p.far) + "," + fmt_double(p.tpr) + "\n";
  }
  return out;
}

std::string velocity_csv(const VelocitySequence& vel) {
  std::string out = "v\n";
  for (double v : vel.v) out += fmt_double(v) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string json_hash(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mouseauth
