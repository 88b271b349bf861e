#pragma once

#include <string>

#include "ripple/grid.hpp"

namespace ripple {

// CSV with header "x,re,im", one row per sample, 17 significant digits.
void write_grid_csv(const std::string& path, const GridFunction& f);
// Reads a CSV written by write_grid_csv; the length is n * (x_1 - x_0).
GridFunction read_grid_csv(const std::string& path);
// JSON manifest {"n_points": n, "domain_length": L}.
void write_grid_manifest(const std::string& path, const GridFunction& f);
std::string grid_manifest_json(const GridFunction& f);

}  // namespace ripple
