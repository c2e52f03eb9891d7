#include "mouseauth/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "mouseauth/error.hpp"
#include "mouseauth/parallel.hpp"
#include "mouseauth/sufficiency.hpp"

namespace mouseauth {
namespace fs = std::filesystem;

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) {
      fail(ErrorCode::kInvalidConfig, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_into(const Json& j, const char* key, T& dest) {
  if (j.contains(key)) dest = j.at(key).get<T>();
}

Json seeds_json(const PipelineConfig& cfg) {
  return {{"model", cfg.model.seed}, {"train", cfg.train.seed}, {"split", cfg.split.seed}};
}

Json stamp(const PipelineConfig& cfg, const char* command) {
  return {{"command", command},
          {"config_hash", cfg.hash()},
          {"preset", cfg.preset},
          {"seeds", seeds_json(cfg)}};
}

std::string file_tag(const std::string& user, const std::string& session) {
  std::string tag = user + "__" + session;
  for (char& c : tag) {
    if (c == '/' || c == '\\' || c == '#' || c == ' ') c = '_';
  }
  return tag;
}

}  // namespace

void PipelineConfig::apply_preset(const std::string& name) {
  if (name == "custom") {
    preset = name;
    return;
  }
  schema = SchemaMap::preset(name);
  sufficiency.eps1 = 1e-4;
  sufficiency.step_m = 200;
  if (name == "balabit") {
    sufficiency.eps2 = 1e-7;
    split.pos_neg_ratio = 5.0;
  } else {
    sufficiency.eps2 = 1e-6;
    split.pos_neg_ratio = 8.0;
  }
  train.pos_neg_ratio = split.pos_neg_ratio;
  preset = name;
}

void PipelineConfig::merge_json(const Json& j) {
  try {
    reject_unknown(j,
                   {"preset", "schema", "dt", "actual_dt", "gap_split_seconds", "sufficiency",
                    "apen", "mau_length", "model", "train", "split", "threads", "out"},
                   "config");
    if (j.contains("preset")) apply_preset(j.at("preset").get<std::string>());
    if (j.contains("schema")) {
      const auto& s = j.at("schema");
      if (s.is_string()) {
        schema = SchemaMap::preset(s.get<std::string>());
      } else {
        reject_unknown(s,
                       {"timestamp_col", "x_col", "y_col", "state_col", "delimiter",
                        "has_header", "timestamp_scale"},
                       "schema");
        read_into(s, "timestamp_col", schema.timestamp_col);
        read_into(s, "x_col", schema.x_col);
        read_into(s, "y_col", schema.y_col);
        if (s.contains("state_col")) {
          schema.state_col = s.at("state_col").is_null()
                                 ? std::nullopt
                                 : std::optional(s.at("state_col").get<std::string>());
        }
        if (s.contains("delimiter")) {
          const auto d = s.at("delimiter").get<std::string>();
          if (d.size() != 1) fail(ErrorCode::kInvalidConfig, "delimiter must be one character");
          schema.delimiter = d[0];
        }
        read_into(s, "has_header", schema.has_header);
        read_into(s, "timestamp_scale", schema.timestamp_scale);
      }
    }
    read_into(j, "dt", velocity.dt);
    read_into(j, "actual_dt", velocity.actual_dt);
    if (j.contains("gap_split_seconds")) {
      velocity.gap_split_seconds = j.at("gap_split_seconds").is_null()
                                       ? std::nullopt
                                       : std::optional(j.at("gap_split_seconds").get<double>());
    }
    if (j.contains("sufficiency")) {
      const auto& s = j.at("sufficiency");
      reject_unknown(s, {"eps1", "eps2", "step_m"}, "sufficiency");
      read_into(s, "eps1", sufficiency.eps1);
      read_into(s, "eps2", sufficiency.eps2);
      read_into(s, "step_m", sufficiency.step_m);
    }
    if (j.contains("apen")) {
      const auto& a = j.at("apen");
      reject_unknown(a, {"candidates", "r_factor", "slope_threshold", "cap"}, "apen");
      read_into(a, "candidates", apen.candidates);
      read_into(a, "r_factor", apen.r_factor);
      read_into(a, "slope_threshold", apen.slope_threshold);
      read_into(a, "cap", apen.cap);
    }
    if (j.contains("mau_length")) {
      mau_length = j.at("mau_length").is_null()
                       ? std::nullopt
                       : std::optional(j.at("mau_length").get<std::size_t>());
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      reject_unknown(m,
                     {"input_length", "conv_channels", "kernel_size", "res_blocks",
                      "res_kernel", "gru_hidden", "classes", "input_scaling", "input_shift", "input_scale", "seed"},
                     "model");
      const std::size_t keep_length = model.input_length;
      Json merged = mouseauth::to_json(model);
      merged.update(m);
      model = model_config_from_json(merged);
      if (!m.contains("input_length")) model.input_length = keep_length;
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      reject_unknown(t,
                     {"learning_rate", "beta1", "beta2", "epsilon", "batch_size", "epochs",
                      "pos_neg_ratio", "grad_clip_norm", "seed"},
                     "train");
      Json merged = mouseauth::to_json(train);
      merged.update(t);
      train = train_config_from_json(merged);
      if (t.contains("pos_neg_ratio")) split.pos_neg_ratio = train.pos_neg_ratio;
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      reject_unknown(s, {"pos_neg_ratio", "unseen_count", "unseen_users", "train_fraction", "seed"},
                     "split");
      if (s.contains("unseen_users")) {
        split.unseen_users = s.at("unseen_users").get<std::vector<std::string>>();
      }
      read_into(s, "pos_neg_ratio", split.pos_neg_ratio);
      read_into(s, "unseen_count", split.unseen_count);
      read_into(s, "train_fraction", split.train_fraction);
      read_into(s, "seed", split.seed);
      train.pos_neg_ratio = split.pos_neg_ratio;
    }
    read_into(j, "threads", threads);
    if (j.contains("out")) out_dir = j.at("out").get<std::string>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
  }
}

void PipelineConfig::validate() const {
  try {
    schema.validate();
    velocity.validate();
    if (!(sufficiency.eps1 > 0.0) || !(sufficiency.eps2 > 0.0)) {
      fail(ErrorCode::kInvalidConfig, "eps1 and eps2 must be positive");
    }
    if (sufficiency.step_m < 2) fail(ErrorCode::kInvalidConfig, "step_m must be >= 2");
    apen.validate();
    if (mau_length && *mau_length < 1) fail(ErrorCode::kInvalidConfig, "mau_length must be >= 1");
    model.validate();
    train.validate();
    split.validate();
    if (threads < 1) fail(ErrorCode::kInvalidConfig, "threads must be >= 1");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig) throw;
    fail(ErrorCode::kInvalidConfig, e.what());
  }
}

Json PipelineConfig::to_json() const {
  Json schema_json = {{"timestamp_col", schema.timestamp_col},
                      {"x_col", schema.x_col},
                      {"y_col", schema.y_col},
                      {"state_col", schema.state_col ? Json(*schema.state_col) : Json(nullptr)},
                      {"delimiter", std::string(1, schema.delimiter)},
                      {"has_header", schema.has_header},
                      {"timestamp_scale", schema.timestamp_scale}};
  return {{"preset", preset},
          {"schema", schema_json},
          {"dt", velocity.dt},
          {"actual_dt", velocity.actual_dt},
          {"gap_split_seconds",
           velocity.gap_split_seconds ? Json(*velocity.gap_split_seconds) : Json(nullptr)},
          {"sufficiency",
           {{"eps1", sufficiency.eps1},
            {"eps2", sufficiency.eps2},
            {"step_m", sufficiency.step_m}}},
          {"apen",
           {{"candidates",
             apen.candidates.empty() ? ApEnOptions::default_candidates() : apen.candidates},
            {"r_factor", apen.r_factor},
            {"slope_threshold", apen.slope_threshold},
            {"cap", apen.cap}}},
          {"mau_length", mau_length ? Json(*mau_length) : Json(nullptr)},
          {"model", mouseauth::to_json(model)},
          {"train", mouseauth::to_json(train)},
          {"split",
           {{"pos_neg_ratio", split.pos_neg_ratio},
            {"unseen_count", split.unseen_count},
            {"unseen_users", split.unseen_users},
            {"train_fraction", split.train_fraction},
            {"seed", split.seed}}},
          {"threads", threads}};
}

std::string PipelineConfig::hash() const {
  // Thread count and output location do not change results.
  Json j = to_json();
  j.erase("threads");
  return json_hash(j);
}

void PipelineConfig::set_seed(std::uint64_t seed) {
  model.seed = seed;
  train.seed = seed;
  split.seed = seed;
}

std::vector<DatasetUser> discover_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    fail(ErrorCode::kIoError, "input directory not found: " + root.string());
  }
  std::vector<DatasetUser> users;
  std::vector<fs::path> loose_files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) {
      DatasetUser user{entry.path().filename().string(), {}};
      for (const auto& f : fs::directory_iterator(entry.path())) {
        if (f.is_regular_file()) user.files.push_back(f.path());
      }
      std::sort(user.files.begin(), user.files.end());
      if (!user.files.empty()) users.push_back(std::move(user));
    } else if (entry.is_regular_file()) {
      loose_files.push_back(entry.path());
    }
  }
  if (users.empty() && !loose_files.empty()) {
    std::sort(loose_files.begin(), loose_files.end());
    users.push_back({fs::absolute(root).lexically_normal().filename().string(), loose_files});
  }
  std::sort(users.begin(), users.end(),
            [](const DatasetUser& a, const DatasetUser& b) { return a.user_id < b.user_id; });
  if (users.empty()) fail(ErrorCode::kNoSessions, "no session files under " + root.string());
  return users;
}

UserVelocities load_user_velocities(const PipelineConfig& cfg, const DatasetUser& user) {
  UserVelocities out;
  out.user_id = user.user_id;
  out.load = load_user(user.files, cfg.schema, user.user_id);
  for (const auto& session : out.load.sessions) {
    if (session.events.size() < 2) {
      out.too_short.push_back({session.session_id, "fewer than 2 events"});
      continue;
    }
    for (auto& seq : velocity_sequences(session, cfg.velocity)) {
      out.sequences.push_back(std::move(seq));
    }
  }
  return out;
}

std::size_t select_mau_length(const PipelineConfig& cfg,
                              const std::vector<VelocitySequence>& sequences) {
  const auto candidates =
      cfg.apen.candidates.empty() ? ApEnOptions::default_candidates() : cfg.apen.candidates;
  std::vector<const VelocitySequence*> usable;
  for (const auto& s : sequences) {
    if (std::min(s.v.size(), cfg.apen.cap) >= candidates.back() + 2) usable.push_back(&s);
  }
  if (usable.empty()) {
    fail(ErrorCode::kInsufficientData, "no session is long enough for the ApEn profile");
  }
  std::vector<std::size_t> picks(usable.size());
  ApEnOptions options = cfg.apen;
  options.threads = 1;
  parallel_for(usable.size(), cfg.threads, [&](std::size_t i) {
    picks[i] = apen_profile(*usable[i], options).selected_length;
  });
  std::sort(picks.begin(), picks.end());
  return picks[(picks.size() - 1) / 2];
}

Json cmd_sufficiency(const PipelineConfig& cfg, const fs::path& data_root) {
  cfg.validate();
  const auto users = discover_dataset(data_root);
  std::vector<UserVelocities> loaded;
  for (const auto& u : users) loaded.push_back(load_user_velocities(cfg, u));

  struct Item {
    std::size_t user;
    const VelocitySequence* seq;
  };
  std::vector<Item> items;
  for (std::size_t u = 0; u < loaded.size(); ++u) {
    for (const auto& s : loaded[u].sequences) items.push_back({u, &s});
  }
  std::vector<SufficiencyReport> reports(items.size());
  const auto& opt = cfg.sufficiency;
  parallel_for(items.size(), cfg.threads, [&](std::size_t i) {
    const auto& seq = *items[i].seq;
    if (seq.v.size() < 3 * opt.step_m) {
      reports[i] = {seq.user_id, seq.session_id, seq.v.size(), opt.step_m, opt.eps1,
                    opt.eps2,    {},             {},           true};
      return;
    }
    reports[i] = sufficiency_point(seq, opt.step_m, opt.eps1, opt.eps2);
  });

  const fs::path dir = cfg.out_dir / "sufficiency";
  Json report = stamp(cfg, "sufficiency");
  Json users_json = Json::array();
  double proper_sum = 0.0;
  double total_sum = 0.0;
  std::size_t below = 0;
  for (std::size_t u = 0; u < loaded.size(); ++u) {
    std::vector<SufficiencyReport> mine;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].user == u) mine.push_back(reports[i]);
    }
    const UserVolume volume = aggregate_user_volume(mine);
    Json uj = to_json(volume);
    uj["user_id"] = loaded[u].user_id;
    uj["sessions"] = Json::array();
    for (const auto& r : mine) {
      uj["sessions"].push_back(to_json(r));
      write_text(dir / "trajectories" / (file_tag(r.user_id, r.session_id) + ".csv"),
                 trajectory_csv(r));
    }
    Json parse = Json::array();
    for (const auto& p : loaded[u].load.reports) parse.push_back(to_json(p));
    uj["parse_reports"] = parse;
    Json skipped = Json::array();
    for (const auto& s : loaded[u].load.skipped) skipped.push_back(to_json(s));
    for (const auto& s : loaded[u].too_short) skipped.push_back(to_json(s));
    uj["skipped"] = skipped;
    users_json.push_back(uj);
    proper_sum += static_cast<double>(volume.total);
    total_sum += static_cast<double>(volume.raw_total);
    if (volume.total < volume.raw_total) ++below;
  }
  const double n_users = static_cast<double>(loaded.size());
  report["users"] = users_json;
  report["average_proper_volume"] = proper_sum / n_users;
  report["average_total_volume"] = total_sum / n_users;
  report["users_below_total"] = below;
  write_json(dir / "report.json", report);
  return report;
}

Json cmd_apen(const PipelineConfig& cfg, const fs::path& data_root) {
  cfg.validate();
  const auto users = discover_dataset(data_root);
  const auto candidates =
      cfg.apen.candidates.empty() ? ApEnOptions::default_candidates() : cfg.apen.candidates;
  const fs::path dir = cfg.out_dir / "apen";
  Json report = stamp(cfg, "apen");
  Json users_json = Json::array();
  std::vector<std::size_t> user_picks;

  for (const auto& u : users) {
    const auto loaded = load_user_velocities(cfg, u);
    std::vector<const VelocitySequence*> usable;
    Json skipped = Json::array();
    for (const auto& s : loaded.sequences) {
      if (std::min(s.v.size(), cfg.apen.cap) >= candidates.back() + 2) {
        usable.push_back(&s);
      } else {
        skipped.push_back({{"file", s.session_id}, {"reason", "too short for ApEn profile"}});
      }
    }
    std::vector<ApEnProfile> profiles(usable.size());
    ApEnOptions options = cfg.apen;
    options.threads = 1;
    parallel_for(usable.size(), cfg.threads,
                 [&](std::size_t i) { profiles[i] = apen_profile(*usable[i], options); });

    Json uj = {{"user_id", u.user_id}, {"sessions", Json::array()}, {"skipped", skipped}};
    std::vector<std::size_t> picks;
    for (std::size_t i = 0; i < usable.size(); ++i) {
      Json pj = to_json(profiles[i]);
      pj["session_id"] = usable[i]->session_id;
      uj["sessions"].push_back(pj);
      picks.push_back(profiles[i].selected_length);
      write_text(dir / "profiles" / (file_tag(u.user_id, usable[i]->session_id) + ".csv"),
                 apen_csv(profiles[i]));
    }
    if (!picks.empty()) {
      std::sort(picks.begin(), picks.end());
      uj["selected_length"] = picks[(picks.size() - 1) / 2];
      user_picks.push_back(picks[(picks.size() - 1) / 2]);
    } else {
      uj["selected_length"] = nullptr;
    }
    users_json.push_back(uj);
  }
  report["users"] = users_json;
  if (!user_picks.empty()) {
    std::sort(user_picks.begin(), user_picks.end());
    report["selected_length"] = user_picks[(user_picks.size() - 1) / 2];
  } else {
    report["selected_length"] = nullptr;
  }
  write_json(dir / "report.json", report);
  return report;
}

Json cmd_train(const PipelineConfig& cfg, const fs::path& data_root,
               const std::vector<std::string>& legit_users) {
  cfg.validate();
  const auto users = discover_dataset(data_root);
  std::map<std::string, std::vector<VelocitySequence>> velocities;
  for (const auto& u : users) velocities[u.user_id] = load_user_velocities(cfg, u).sequences;

  std::vector<std::string> targets = legit_users;
  if (targets.empty()) {
    for (const auto& [user, seqs] : velocities) targets.push_back(user);
  }
  for (const auto& t : targets) {
    if (!velocities.contains(t)) {
      fail(ErrorCode::kInsufficientUsers, "legitimate user '" + t + "' not in dataset");
    }
  }

  const fs::path dir = cfg.out_dir / "train";
  Json report = stamp(cfg, "train");
  report["runs"] = Json::array();
  for (const auto& legit : targets) {
    const std::size_t length =
        cfg.mau_length ? *cfg.mau_length : select_mau_length(cfg, velocities.at(legit));
    std::map<std::string, std::vector<Mau>> maus;
    for (const auto& [user, seqs] : velocities) {
      auto& dest = maus[user];
      for (const auto& s : seqs) {
        auto windows = segment(s, length);
        std::move(windows.begin(), windows.end(), std::back_inserter(dest));
      }
    }
    const Split split = build_splits(maus, legit, cfg.split);
    std::vector<Mau> inputs;
    std::vector<int> labels;
    for (const auto& s : split.train) {
      inputs.push_back(s.mau);
      labels.push_back(s.label);
    }
    ModelConfig mcfg = cfg.model;
    mcfg.input_length = length;
    const TrainResult result = train(inputs, labels, mcfg, cfg.train);

    const fs::path run = dir / legit;
    Json checkpoint = checkpoint_to_json(result.params);
    checkpoint["train_config"] = to_json(cfg.train);
    checkpoint["config_hash"] = cfg.hash();
    write_json(run / "checkpoint.json", checkpoint);
    write_json(run / "split.json", split_to_json(split));
    write_text(run / "loss.csv", loss_csv(result.loss_history));

    std::size_t positives = 0;
    for (int y : labels) positives += y == kLegitimateClass ? 1 : 0;
    report["runs"].push_back({{"legit_user", legit},
                              {"mau_length", length},
                              {"train_samples", inputs.size()},
                              {"train_positives", positives},
                              {"test_samples", split.test.size()},
                              {"unseen_users", split.unseen_users},
                              {"final_loss", result.loss_history.back()},
                              {"loss_history", result.loss_history}});
  }
  write_json(dir / "summary.json", report);
  return report;
}

std::vector<Mau> read_mau_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<Mau> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;
    Mau mau{"attack", path.stem().string(), line_no - 1, {}};
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string_view::npos) comma = line.size();
      std::string_view field = line.substr(pos, comma - pos);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        fail(ErrorCode::kIoError,
             path.string() + ":" + std::to_string(line_no) + ": not a number");
      }
      mau.values.push_back(value);
      pos = comma + 1;
    }
    out.push_back(std::move(mau));
  }
  if (out.empty()) fail(ErrorCode::kEmptySet, "no MAUs in " + path.string());
  return out;
}

Json cmd_eval(const PipelineConfig& cfg, const fs::path& run_dir,
              const std::optional<fs::path>& attack_maus) {
  cfg.validate();
  std::error_code ec;
  if (!fs::is_directory(run_dir, ec)) {
    fail(ErrorCode::kIoError, "run directory not found: " + run_dir.string());
  }
  std::vector<fs::path> runs;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "checkpoint.json") &&
        fs::exists(entry.path() / "split.json")) {
      runs.push_back(entry.path());
    }
  }
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) {
    fail(ErrorCode::kIoError, "no checkpoint/split pairs under " + run_dir.string());
  }
  std::vector<Mau> attack;
  if (attack_maus) attack = read_mau_csv(*attack_maus);

  const fs::path dir = cfg.out_dir / "eval";
  Json report = stamp(cfg, "eval");
  report["reports"] = Json::array();
  std::vector<EvalReport> all;
  for (const auto& run : runs) {
    const ModelParams params = checkpoint_from_json(read_json(run / "checkpoint.json"));
    const Split split = split_from_json(read_json(run / "split.json"));
    EvalReport r = blind_attack_eval(params, split, cfg.threads);
    Json rj = to_json(r);

    ScoredSet scored;
    std::vector<Mau> batch;
    for (const auto& s : split.test) {
      batch.push_back(s.mau);
      scored.labels.push_back(s.label);
    }
    scored.scores = predict_batch(params, batch, cfg.threads);
    const std::string user = run.filename().string();
    write_text(dir / user / "roc.csv", roc_csv(roc_curve(scored)));

    if (!attack.empty()) {
      const auto scores = predict_batch(params, attack, cfg.threads);
      rj["imitation_dsr"] = dsr(scores, kDecisionThreshold);
      rj["imitation_dsr_at_eer"] = dsr(scores, r.eer_threshold);
      rj["imitation_samples"] = scores.size();
    }
    write_json(dir / user / "report.json", rj);
    report["reports"].push_back(rj);
    all.push_back(r);
  }
  report["aggregate"] = to_json(aggregate_reports(all));
  write_json(dir / "summary.json", report);
  return report;
}

SynthCorpusSpec default_synth_corpus(std::uint64_t seed, std::size_t length) {
  SynthCorpusSpec spec;
  const struct {
    double phi, sigma;
  } users[] = {{0.9, 1.0}, {0.5, 2.0}, {0.2, 4.0}};
  for (std::size_t u = 0; u < 3; ++u) {
    auto& list = spec.users["user" + std::to_string(u)];
    for (std::size_t s = 0; s < 2; ++s) {
      SynthSpec sp;
      sp.kind = SynthKind::kAr1;
      sp.phi = users[u].phi;
      sp.sigma = users[u].sigma;
      sp.mean = 20.0;
      sp.length = length;
      sp.seed = seed * 1000 + u * 10 + s;
      list.push_back(sp);
    }
  }
  return spec;
}

SynthCorpusSpec synth_corpus_from_json(const Json& j) {
  try {
    reject_unknown(j, {"users", "dt"}, "synth spec");
    SynthCorpusSpec spec;
    read_into(j, "dt", spec.dt);
    for (const auto& [user, list] : j.at("users").items()) {
      auto& dest = spec.users[user];
      for (const auto& item : list) {
        reject_unknown(item,
                       {"kind", "mean", "std", "phi", "sigma", "amplitude", "period",
                        "noise_std", "length", "seed"},
                       "synth spec entry");
        SynthSpec s;
        s.kind = parse_synth_kind(item.at("kind").get<std::string>());
        read_into(item, "mean", s.mean);
        read_into(item, "std", s.std);
        read_into(item, "phi", s.phi);
        read_into(item, "sigma", s.sigma);
        read_into(item, "amplitude", s.amplitude);
        read_into(item, "period", s.period);
        read_into(item, "noise_std", s.noise_std);
        read_into(item, "length", s.length);
        read_into(item, "seed", s.seed);
        s.validate();
        dest.push_back(s);
      }
    }
    if (!(spec.dt > 0.0)) fail(ErrorCode::kInvalidConfig, "synth dt must be positive");
    return spec;
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("synth spec: ") + e.what());
  }
}

Json cmd_synth(const SynthCorpusSpec& spec, const fs::path& out_dir) {
  const UserPool pool = generate_user_pool(spec.users);
  Json report = {{"command", "synth"}, {"dt", spec.dt}, {"users", Json::array()}};
  report["warnings"] = pool.warnings;
  std::uint64_t heading_seed = 0;
  for (const auto& [user, sessions] : pool.users) {
    Json uj = {{"user_id", user}, {"sessions", Json::array()}};
    const auto& specs = spec.users.at(user);
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      VelocitySequence vel = sessions[i];
      vel.dt = spec.dt;
      const Session s = to_session(vel, specs[i].seed ^ 0x5eedULL ^ (heading_seed++ << 32));
      const fs::path file = out_dir / user / (vel.session_id + ".csv");
      write_text(file, session_to_csv(s));
      uj["sessions"].push_back({{"session_id", vel.session_id},
                                {"file", file.string()},
                                {"kind", synth_kind_name(specs[i].kind)},
                                {"seed", specs[i].seed},
                                {"samples", vel.v.size()}});
    }
    report["users"].push_back(uj);
  }
  write_json(out_dir / "synth.json", report);
  return report;
}

}  // namespace mouseauth
