#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mouseauth/eval.hpp"
#include "mouseauth/ingest.hpp"
#include "mouseauth/io.hpp"
#include "mouseauth/kinematics.hpp"
#include "mouseauth/mau.hpp"
#include "mouseauth/model.hpp"
#include "mouseauth/synth.hpp"

namespace mouseauth {

struct SufficiencyOptions {
  double eps1 = 1e-4;
  double eps2 = 1e-6;
  std::size_t step_m = 200;
};

/// Everything a pipeline run depends on. Built as: defaults, then the preset,
/// then the config file, then command-line overrides.
struct PipelineConfig {
  std::string preset = "custom";
  SchemaMap schema;
  VelocityOptions velocity;
  SufficiencyOptions sufficiency;
  ApEnOptions apen;
  /// Fixed MAU length; when unset, train picks it with the ApEn slope rule.
  std::optional<std::size_t> mau_length;
  ModelConfig model;
  TrainConfig train;
  SplitOptions split;
  std::size_t threads = 1;
  std::filesystem::path out_dir = "out";

  /// balabit: eps2 1e-7, ratio 5:1. dfl: eps2 1e-6, ratio 8:1. Both use
  /// eps1 1e-4 and step 200.
  void apply_preset(const std::string& name);
  /// Applies the keys present in `j`; unknown keys throw InvalidConfig.
  void merge_json(const Json& j);
  /// Rejects anything that would violate a downstream precondition.
  void validate() const;
  Json to_json() const;
  /// Stable across runs for identical settings.
  std::string hash() const;
  void set_seed(std::uint64_t seed);
};

/// Dataset layout: one sub-directory per user, one file per session. A
/// directory holding only files is read as a single user named after it.
/// Users and files are sorted by name.
struct DatasetUser {
  std::string user_id;
  std::vector<std::filesystem::path> files;
};
std::vector<DatasetUser> discover_dataset(const std::filesystem::path& root);

struct UserVelocities {
  std::string user_id;
  std::vector<VelocitySequence> sequences;
  UserLoad load;
  std::vector<SkippedFile> too_short;  // sessions with fewer than 2 events
};
UserVelocities load_user_velocities(const PipelineConfig& cfg, const DatasetUser& user);

/// Lower median of the per-session selections among sessions long enough
/// for the candidate grid. InsufficientData when none qualifies.
std::size_t select_mau_length(const PipelineConfig& cfg,
                              const std::vector<VelocitySequence>& sequences);

// Commands write under cfg.out_dir/<command>/ and return the top-level report.
Json cmd_sufficiency(const PipelineConfig& cfg, const std::filesystem::path& data_root);
Json cmd_apen(const PipelineConfig& cfg, const std::filesystem::path& data_root);
/// Trains one model per legitimate user (all users when `legit_users` is
/// empty) and stores checkpoint, split and loss curve per user.
Json cmd_train(const PipelineConfig& cfg, const std::filesystem::path& data_root,
               const std::vector<std::string>& legit_users);
/// Evaluates every <user>/checkpoint.json + split.json under `run_dir`.
/// `attack_maus` optionally names a CSV of forged MAUs (one per line) that
/// every model scores for an imitation DSR.
Json cmd_eval(const PipelineConfig& cfg, const std::filesystem::path& run_dir,
              const std::optional<std::filesystem::path>& attack_maus);

struct SynthCorpusSpec {
  std::map<std::string, std::vector<SynthSpec>> users;
  double dt = 0.01;
};
/// Three users with AR(1) speeds (phi 0.9/0.5/0.2, sigma 1/2/4), two
/// sessions each.
SynthCorpusSpec default_synth_corpus(std::uint64_t seed, std::size_t length);
SynthCorpusSpec synth_corpus_from_json(const Json& j);
/// Writes <out>/<user>/<session>.csv in the default "t,x,y" schema.
Json cmd_synth(const SynthCorpusSpec& spec, const std::filesystem::path& out_dir);

/// Parses lines of comma-separated speeds into MAUs.
std::vector<Mau> read_mau_csv(const std::filesystem::path& path);

}  // namespace mouseauth
