#ifndef COURSEVEC_TRAIN_CONFIG_JSON_HPP
#define COURSEVEC_TRAIN_CONFIG_JSON_HPP

#include "coursevec/course2vec.hpp"

#include <json.hpp>

#include <filesystem>

namespace coursevec {

nlohmann::json to_json(const TrainConfig& config);

/// Overlays the keys present in `j` on `base`. Unknown keys and bad values
/// raise UsageError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base = {});

}  // namespace coursevec

#endif
