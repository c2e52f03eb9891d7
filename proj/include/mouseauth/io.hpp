#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "mouseauth/eval.hpp"
#include "mouseauth/ingest.hpp"
#include "mouseauth/mau.hpp"
#include "mouseauth/model.hpp"
#include "mouseauth/sufficiency.hpp"

namespace mouseauth {

using Json = nlohmann::json;

Json to_json(const ParseReport& r);
Json to_json(const SkippedFile& s);
Json to_json(const SufficiencyReport& r);
Json to_json(const UserVolume& v);
Json to_json(const ApEnProfile& p);
Json to_json(const Confusion& c);
Json to_json(const EvalReport& r);
Json to_json(const AggregateReport& r);
Json to_json(const ModelConfig& c);
Json to_json(const TrainConfig& c);
Json to_json(const Mau& m);

ModelConfig model_config_from_json(const Json& j);
TrainConfig train_config_from_json(const Json& j);
Mau mau_from_json(const Json& j);

/// Versioned checkpoint: model config plus one flat array per named tensor.
Json checkpoint_to_json(const ModelParams& params);
ModelParams checkpoint_from_json(const Json& j);

Json split_to_json(const Split& split);
Split split_from_json(const Json& j);

std::string trajectory_csv(const SufficiencyReport& r);  // n,kl
std::string apen_csv(const ApEnProfile& p);              // length,apen
std::string loss_csv(std::span<const double> losses);    // epoch,loss
std::string roc_csv(std::span<const RocPoint> points);   // threshold,far,tpr
std::string velocity_csv(const VelocitySequence& vel);   // v

/// Writes text, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

/// FNV-1a 64-bit of the compact dump, as 16 hex digits.
std::string json_hash(const Json& j);

}  // namespace mouseauth
