#pragma once

#include "rbto/fea.hpp"
#include "rbto/filter.hpp"
#include "rbto/verification.hpp"

#include <json.hpp>

#include <filesystem>

namespace rbto::cli {

/// ny rows by nx columns of physical densities, top row first, 6 decimals.
void write_density_csv(const std::filesystem::path& path, const StructuredGrid& grid, const Vector& physical);

/// Reads a density CSV back. Physical densities come from the file; the design
/// variables are set to the physical densities of the active elements.
DensityField read_density_csv(const std::filesystem::path& path, const StructuredGrid& grid, double rho_min = 1e-3);

/// Plain (P2) 8-bit graymap, pixel = round(255 (1 - rho)): solid is black.
void write_pgm(const std::filesystem::path& path, const StructuredGrid& grid, const Vector& physical);

/// Columns displacement,empirical_cdf.
void write_cdf_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& cdf);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);

} // namespace rbto::cli
