#pragma once

#include "recon/series.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace recon {

// Grid schema: header `t,<channel_1>,...,<channel_L>`, then one row per time
// step whose first field is the integer index t. Masks share the grid with
// 0/1 entries.

TimeSeries parse_series_csv(std::string_view text, double dt = 1.0);
CorruptionMask parse_mask_csv(std::string_view text);
std::string series_to_csv(const TimeSeries& series);
std::string mask_to_csv(const CorruptionMask& mask, const std::vector<std::string>& channel_names);

TimeSeries read_series_csv(const std::filesystem::path& path, double dt = 1.0);
CorruptionMask read_mask_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const TimeSeries& series);
void write_mask_csv(const std::filesystem::path& path, const CorruptionMask& mask,
                    const std::vector<std::string>& channel_names);

}  // namespace recon
