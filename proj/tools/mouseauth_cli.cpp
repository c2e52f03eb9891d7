// Command-line front end: one subcommand per pipeline stage.
//
//   mouseauth synth       --out DIR [--spec FILE] [--length N]
//   mouseauth sufficiency --data DIR [--preset balabit|dfl] [--out DIR]
//   mouseauth apen        --data DIR
//   mouseauth train       --data DIR [--legit USER]...
//   mouseauth eval        [--run DIR] [--attack-maus FILE]
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mouseauth/error.hpp"
#include "mouseauth/io.hpp"
#include "mouseauth/pipeline.hpp"

namespace {

using mouseauth::ErrorCode;
using mouseauth::Json;
using mouseauth::PipelineConfig;

struct Overrides {
  std::string config_path;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<double> dt;
  bool actual_dt = false;
  std::optional<double> gap_split;
  std::optional<double> eps1, eps2;
  std::optional<std::size_t> step;
  std::optional<double> r_factor, slope_threshold;
  std::optional<std::size_t> cap;
  std::vector<std::size_t> candidates;
  std::optional<std::size_t> mau_length;
  std::optional<std::size_t> epochs, batch_size;
  std::optional<double> learning_rate, ratio;
  std::optional<std::size_t> unseen;
};

void add_config_options(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_path, "JSON config file");
  app.add_option("--preset", o.preset, "Dataset preset")
      ->check(CLI::IsMember({"balabit", "dfl", "custom"}));
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Seed for model init, shuffling and splits");
  app.add_option("--threads", o.threads, "Worker threads");
  app.add_option("--dt", o.dt, "Sampling interval in seconds");
  app.add_flag("--actual-dt", o.actual_dt, "Use observed timestamp gaps");
  app.add_option("--gap-split", o.gap_split, "Split sessions at idle gaps (seconds)");
  app.add_option("--eps1", o.eps1, "KL level threshold");
  app.add_option("--eps2", o.eps2, "KL change threshold");
  app.add_option("--step", o.step, "Prefix step size");
  app.add_option("--r-factor", o.r_factor, "ApEn tolerance as a multiple of the sd");
  app.add_option("--slope-threshold", o.slope_threshold, "ApEn slope threshold");
  app.add_option("--cap", o.cap, "Samples analysed per ApEn profile");
  app.add_option("--candidates", o.candidates, "Candidate MAU lengths")->delimiter(',');
  app.add_option("--mau-length", o.mau_length, "Fixed MAU length");
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("--batch-size", o.batch_size, "Mini-batch size");
  app.add_option("--lr", o.learning_rate, "Adam learning rate");
  app.add_option("--ratio", o.ratio, "Positive:negative ratio in training");
  app.add_option("--unseen", o.unseen, "Unseen users held out for the blind attack");
}

PipelineConfig build_config(const Overrides& o) {
  PipelineConfig cfg;
  Json file = Json::object();
  if (!o.config_path.empty()) {
    try {
      file = mouseauth::read_json(o.config_path);
    } catch (const mouseauth::Error& e) {
      mouseauth::fail(ErrorCode::kInvalidConfig, e.what());
    }
  }
  std::string preset = o.preset;
  if (preset.empty() && file.is_object() && file.contains("preset")) {
    preset = file.at("preset").get<std::string>();
  }
  if (!preset.empty()) cfg.apply_preset(preset);
  if (file.is_object()) file.erase("preset");
  cfg.merge_json(file);

  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed) cfg.set_seed(*o.seed);
  if (o.threads) cfg.threads = *o.threads;
  if (o.dt) cfg.velocity.dt = *o.dt;
  if (o.actual_dt) cfg.velocity.actual_dt = true;
  if (o.gap_split) cfg.velocity.gap_split_seconds = *o.gap_split;
  if (o.eps1) cfg.sufficiency.eps1 = *o.eps1;
  if (o.eps2) cfg.sufficiency.eps2 = *o.eps2;
  if (o.step) cfg.sufficiency.step_m = *o.step;
  if (o.r_factor) cfg.apen.r_factor = *o.r_factor;
  if (o.slope_threshold) cfg.apen.slope_threshold = *o.slope_threshold;
  if (o.cap) cfg.apen.cap = *o.cap;
  if (!o.candidates.empty()) cfg.apen.candidates = o.candidates;
  if (o.mau_length) cfg.mau_length = *o.mau_length;
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.batch_size) cfg.train.batch_size = *o.batch_size;
  if (o.learning_rate) cfg.train.learning_rate = *o.learning_rate;
  if (o.ratio) {
    cfg.split.pos_neg_ratio = *o.ratio;
    cfg.train.pos_neg_ratio = *o.ratio;
  }
  if (o.unseen) cfg.split.unseen_count = *o.unseen;
  cfg.validate();
  return cfg;
}

int report_error(const std::string& command, const mouseauth::Error& e,
                 const std::filesystem::path& out_dir) {
  const Json record = {{"command", command},
                       {"error", mouseauth::error_code_name(e.code())},
                       {"message", e.what()}};
  std::cerr << record.dump() << "\n";
  try {
    mouseauth::write_json(out_dir / "error.json", record);
  } catch (const mouseauth::Error&) {
    // Output directory itself may be the problem; stderr already has it.
  }
  return e.code() == ErrorCode::kInvalidConfig ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mouse-dynamics authentication pipeline"};
  app.require_subcommand(1);
  Overrides o;

  std::string data;
  std::vector<std::string> legit;
  std::string run_dir;
  std::string attack;
  std::string synth_spec;
  std::size_t synth_length = 20000;

  auto* suff = app.add_subcommand("sufficiency", "Proper data volume per session and user");
  auto* apen = app.add_subcommand("apen", "ApEn profiles and MAU length selection");
  auto* train = app.add_subcommand("train", "Train one model per legitimate user");
  auto* eval = app.add_subcommand("eval", "Blind-attack evaluation of trained models");
  auto* synth = app.add_subcommand("synth", "Write a synthetic session corpus");
  for (auto* sub : {suff, apen, train, eval, synth}) add_config_options(*sub, o);
  for (auto* sub : {suff, apen, train}) {
    sub->add_option("--data", data, "Dataset root (one directory per user)")->required();
  }
  train->add_option("--legit", legit, "Legitimate user(s); default all");
  eval->add_option("--run", run_dir, "Training output directory (default <out>/train)");
  eval->add_option("--attack-maus", attack, "CSV of forged MAUs, one per line");
  synth->add_option("--spec", synth_spec, "JSON corpus spec (default: 3 AR(1) users)");
  synth->add_option("--length", synth_length, "Samples per session for the default corpus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* active = app.get_subcommands().front();
  const std::string command = active->get_name();
  std::filesystem::path out_dir = o.out.empty() ? "out" : o.out;
  try {
    const PipelineConfig cfg = build_config(o);
    out_dir = cfg.out_dir;
    Json result;
    if (command == "sufficiency") {
      result = mouseauth::cmd_sufficiency(cfg, data);
    } else if (command == "apen") {
      result = mouseauth::cmd_apen(cfg, data);
    } else if (command == "train") {
      result = mouseauth::cmd_train(cfg, data, legit);
    } else if (command == "eval") {
      const std::filesystem::path run =
          run_dir.empty() ? cfg.out_dir / "train" : std::filesystem::path(run_dir);
      std::optional<std::filesystem::path> attack_path;
      if (!attack.empty()) attack_path = attack;
      result = mouseauth::cmd_eval(cfg, run, attack_path);
    } else {
      const auto spec = synth_spec.empty()
                            ? mouseauth::default_synth_corpus(cfg.split.seed, synth_length)
                            : mouseauth::synth_corpus_from_json(mouseauth::read_json(synth_spec));
      result = mouseauth::cmd_synth(spec, cfg.out_dir);
    }
    std::cout << result.dump(2) << "\n";
    return 0;
  } catch (const mouseauth::Error& e) {
    return report_error(command, e, out_dir);
  } catch (const std::exception& e) {
    return report_error(command, mouseauth::Error(ErrorCode::kIoError, e.what()), out_dir);
  }
}
