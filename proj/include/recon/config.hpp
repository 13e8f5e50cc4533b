#pragma once

#include "recon/evaluation.hpp"

#include <json.hpp>

namespace recon {

using Json = nlohmann::ordered_json;

// Readers start from the defaults, overwrite the keys that are present, and
// reject keys they do not know. Writers emit every field, so their output is
// a fully resolved config.

RandomSeqConfig random_config_from_json(const Json& j, RandomSeqConfig base = {});
PowerProfileConfig power_config_from_json(const Json& j, PowerProfileConfig base = {});
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});
ExperimentPlan plan_from_json(const Json& j, ExperimentPlan base = {});

Json to_json(const RandomSeqConfig& c);
Json to_json(const PowerProfileConfig& c);
Json to_json(const TrainConfig& c);
Json to_json(const ExperimentPlan& p);

Json parse_json_file(const std::filesystem::path& path);

}  // namespace recon
