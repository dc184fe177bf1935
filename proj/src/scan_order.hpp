#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace vqssm {

struct GridShape {
  int64_t rows = 0;
  int64_t cols = 0;
  int64_t cells() const { return rows * cols; }
  bool operator==(const GridShape&) const = default;
};

enum class ScanMode { Raster1D, BiScan, CrossScan, SIP };

const char* scan_mode_name(ScanMode m);
ScanMode scan_mode_from_name(const std::string& name);

// One quadrant of the grid in its local frame. Local axes both point away
// from the grid center; local (0,0) is the quadrant cell nearest the center.
struct QuadrantSpec {
  int id = 0;                // 1..4 = I..IV
  int64_t count_x = 0;       // cells along local x (N_x + 1)
  int64_t count_y = 0;       // cells along local y (N_y + 1)
  int64_t origin_row = 0;    // global cell of local (0,0)
  int64_t origin_col = 0;
  int step_col = 0;          // global col step per +x
  int step_row = 0;          // global row step per +y
  bool empty() const { return count_x == 0 || count_y == 0; }
  int64_t cell_index(int64_t x, int64_t y, int64_t grid_cols) const {
    return (origin_row + step_row * y) * grid_cols + (origin_col + step_col * x);
  }
};

// Quadrants in scan visit order: I, IV, III, II.
std::array<QuadrantSpec, 4> quadrant_partition(GridShape shape);

// Radial trajectory over the square [0,N]^2 starting at (alpha, beta);
// terminates when the next point leaves the square. Throws CoverageError if
// a cell is ever revisited, ContractError if the start is out of range.
std::vector<std::pair<int64_t, int64_t>> sip_quadrant_trajectory(int64_t N, int64_t alpha, int64_t beta);

struct ScanOrder {
  ScanMode mode = ScanMode::Raster1D;
  GridShape shape;
  std::vector<int64_t> perm;  // sequence position -> cell index (row * W + col)
  std::vector<int64_t> inv;   // cell index -> sequence position
  // Direction orders consumed by the fusion module: Raster1D has one
  // (unidirectional), BiScan/SIP two (forward + reverse), CrossScan four
  // (row-major, column-major and both reverses).
  std::vector<std::vector<int64_t>> directions;
};

// Default SIP start is (0, N) per quadrant; configurable via sip_start
// with coordinates clamped into the quadrant's [0,N] range by the caller.
ScanOrder build_scan_order(GridShape shape, ScanMode mode);
ScanOrder build_scan_order(GridShape shape, ScanMode mode, std::pair<int64_t, int64_t> sip_start);

struct LocalityReport {
  double mean_index_gap = 1.0;
  int64_t max_run_break = 0;
};

// mean_index_gap over 4-connected adjacent cell pairs inside the mask;
// a single-cell mask reports {1, 0} by convention.
LocalityReport locality_score(const ScanOrder& order, const std::vector<uint8_t>& mask);

// Binary PPM (P6), cell_px pixels per grid cell, hue encoding scan position.
std::vector<uint8_t> render_ppm(const ScanOrder& order, int cell_px = 1);

std::string scan_order_to_json(const ScanOrder& order);

}  // namespace vqssm
