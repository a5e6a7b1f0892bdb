#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sera/sera_metric.hpp"

namespace sera {

// Binary64 -> decimal with 17 significant digits (lossless round trip).
std::string fmt_g17(double v);

// Write-temp-then-rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

void write_curve_csv(const std::filesystem::path& path, const SeraCurve& curve);
void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const std::size_t> row_ids,
                           std::span<const double> y, std::span<const double> y_hat);
void write_relevance_csv(const std::filesystem::path& path,
                         std::span<const double> ys, std::span<const double> phis);

} // namespace sera
