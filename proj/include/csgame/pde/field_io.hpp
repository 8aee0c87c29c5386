#pragma once

#include <filesystem>
#include <vector>

#include "csgame/pde/grid.hpp"
#include "csgame/pde/vi_report.hpp"

namespace csgame {

/// Evenly spaced time levels 0, ..., nt (at most `count`, always including
/// both ends).
std::vector<int> slice_levels(const Grid& grid, int count);

/// CSV with header t,x1[,x2],u,ux1[,ux2],residual_minmax,residual_maxmin,inC,inI
/// for the given levels. Without a report the residual columns are nan and
/// the mask columns 0.
void write_field_csv(const std::filesystem::path& path, const GridField& field, const std::vector<int>& levels,
                     const VIReport* report = nullptr);

/// Plain PGM (P2, maxval 2) of the region codes. d = 1: rows are the given
/// time levels (latest first), columns are nodes. d = 2: one slice, rows
/// are x2 (descending), columns x1.
void write_region_pgm_1d(const std::filesystem::path& path, const VIReport& report, const std::vector<int>& levels);
void write_region_pgm_2d(const std::filesystem::path& path, const VIReport& report, int level);

/// Raw little-endian dump with a small header; round-trips exactly.
void write_field_binary(const std::filesystem::path& path, const GridField& field);
GridField read_field_binary(const std::filesystem::path& path);

}  // namespace csgame
