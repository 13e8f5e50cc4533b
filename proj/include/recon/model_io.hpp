#pragma once

#include "recon/models.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace recon {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary container; byte layout in docs/model_format.md.
std::string serialize_model(const TrainedModel& model);
/// Throws VersionMismatch, CorruptFile, or ShapeMismatch.
TrainedModel deserialize_model(std::string_view bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace recon
