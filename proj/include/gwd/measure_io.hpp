#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gwd/measures.hpp"
#include "json.hpp"

namespace gwd {

// On-disk layout of a grid measure:
//
//   <stem>.json   {"d":1, "bounds":[[lo,hi],...], "cells":[n,...],
//                  "reference":"lebesgue"|"gibbs"|"masked", "order":"row-major",
//                  "data":"<stem>.f64", "weights":"<stem>.weights.f64"}
//   <stem>.f64    raw little-endian float64 densities, row-major
//
// "weights" is present only for non-Lebesgue references.

nlohmann::json grid_header(const Grid& grid);
Grid grid_from_header(const nlohmann::json& header);

void write_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path& path);

/// Writes <stem>.json plus its data files; returns the header path.
std::filesystem::path write_measure(const std::filesystem::path& stem, const GridMeasure& mu);
GridMeasure read_measure(const std::filesystem::path& header_path);

/// x[,y[,z]],density rows; only d <= 2 is plotted in practice but any d is written.
void write_measure_csv(const std::filesystem::path& path, const GridMeasure& mu);

}  // namespace gwd
