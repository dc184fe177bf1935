#include "scan_order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace vqssm {

const char* scan_mode_name(ScanMode m) {
  switch (m) {
    case ScanMode::Raster1D: return "raster1d";
    case ScanMode::BiScan: return "biscan";
    case ScanMode::CrossScan: return "crossscan";
    case ScanMode::SIP: return "sip";
  }
  return "?";
}

ScanMode scan_mode_from_name(const std::string& name) {
  std::string s;
  for (char c : name)
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "raster1d" || s == "raster" || s == "simple1d") return ScanMode::Raster1D;
  if (s == "biscan" || s == "bi") return ScanMode::BiScan;
  if (s == "crossscan" || s == "cross") return ScanMode::CrossScan;
  if (s == "sip") return ScanMode::SIP;
  throw ContractError("unknown scan mode: " + name);
}

std::array<QuadrantSpec, 4> quadrant_partition(GridShape g) {
  if (g.rows < 1 || g.cols < 1) throw ContractError("grid must be at least 1x1");
  const int64_t top_h = (g.rows + 1) / 2;       // rows [0, top_h) are "top"
  const int64_t right_c0 = (g.cols + 1) / 2;    // cols [right_c0, W) are "right"
  const int64_t right_w = g.cols - right_c0;
  const int64_t left_w = right_c0;
  const int64_t bottom_h = g.rows - top_h;
  // Visit order I, IV, III, II.
  QuadrantSpec q1{1, right_w, top_h, top_h - 1, right_c0, +1, -1};
  QuadrantSpec q4{4, right_w, bottom_h, top_h, right_c0, +1, +1};
  QuadrantSpec q3{3, left_w, bottom_h, top_h, right_c0 - 1, -1, +1};
  QuadrantSpec q2{2, left_w, top_h, top_h - 1, right_c0 - 1, -1, -1};
  return {q1, q4, q3, q2};
}

std::vector<std::pair<int64_t, int64_t>> sip_quadrant_trajectory(int64_t N, int64_t alpha, int64_t beta) {
  if (N < 0) throw ContractError("sip trajectory: N must be >= 0");
  if (alpha < 0 || alpha > N || beta < 0 || beta > N)
    throw ContractError("sip trajectory: start outside [0,N]^2");
  std::vector<std::pair<int64_t, int64_t>> out;
  std::vector<uint8_t> seen(static_cast<size_t>((N + 1) * (N + 1)), 0);
  int64_t x = alpha, y = beta;
  while (x >= 0 && x <= N && y >= 0 && y <= N) {
    uint8_t& mark = seen[static_cast<size_t>(y * (N + 1) + x)];
    if (mark) throw CoverageError("sip trajectory revisits cell");
    mark = 1;
    out.emplace_back(x, y);
    if (y == N && x != N) {
      const int64_t k = (y > x) ? x + 1 : y - 1;
      x = 0;
      y = y - k;
    } else if (x == N) {
      const int64_t k = (y > x) ? x + 1 : y - 1;
      x = x - k;
      y = 0;
    } else {
      x += 1;
      y += 1;
    }
  }
  return out;
}

namespace {

std::vector<int64_t> raster_perm(GridShape g) {
  std::vector<int64_t> p(static_cast<size_t>(g.cells()));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

std::vector<int64_t> column_major_perm(GridShape g) {
  std::vector<int64_t> p;
  p.reserve(static_cast<size_t>(g.cells()));
  for (int64_t c = 0; c < g.cols; ++c)
    for (int64_t r = 0; r < g.rows; ++r) p.push_back(r * g.cols + c);
  return p;
}

std::vector<int64_t> reversed(std::vector<int64_t> p) {
  std::reverse(p.begin(), p.end());
  return p;
}

std::vector<int64_t> sip_perm(GridShape g, std::pair<int64_t, int64_t> start, bool start_is_default) {
  std::vector<int64_t> perm;
  perm.reserve(static_cast<size_t>(g.cells()));
  for (const QuadrantSpec& q : quadrant_partition(g)) {
    if (q.empty()) continue;
    const int64_t N = std::max(q.count_x, q.count_y) - 1;
    const int64_t alpha = start_is_default ? 0 : std::min(start.first, N);
    const int64_t beta = start_is_default ? N : std::min(start.second, N);
    std::vector<uint8_t> hit(static_cast<size_t>(q.count_x * q.count_y), 0);
    int64_t kept = 0;
    for (const auto& [x, y] : sip_quadrant_trajectory(N, alpha, beta)) {
      if (x >= q.count_x || y >= q.count_y) continue;  // padding of a non-square quadrant
      uint8_t& h = hit[static_cast<size_t>(y * q.count_x + x)];
      if (h) throw CoverageError("sip scan revisits cell in quadrant " + std::to_string(q.id));
      h = 1;
      ++kept;
      perm.push_back(q.cell_index(x, y, g.cols));
    }
    if (kept != q.count_x * q.count_y)
      throw CoverageError("sip start does not cover quadrant " + std::to_string(q.id) + " (" +
                          std::to_string(kept) + " of " + std::to_string(q.count_x * q.count_y) + " cells)");
  }
  return perm;
}

void validate_bijection(const std::vector<int64_t>& perm, int64_t n) {
  if (static_cast<int64_t>(perm.size()) != n) throw CoverageError("scan order has wrong length");
  std::vector<uint8_t> seen(static_cast<size_t>(n), 0);
  for (int64_t v : perm) {
    if (v < 0 || v >= n || seen[static_cast<size_t>(v)]) throw CoverageError("scan order is not a bijection");
    seen[static_cast<size_t>(v)] = 1;
  }
}

}  // namespace

ScanOrder build_scan_order(GridShape shape, ScanMode mode) {
  return build_scan_order(shape, mode, {-1, -1});  // sentinel: default start (0, N)
}

ScanOrder build_scan_order(GridShape shape, ScanMode mode, std::pair<int64_t, int64_t> sip_start) {
  if (shape.rows < 1 || shape.cols < 1) throw ContractError("grid must be at least 1x1");
  ScanOrder o;
  o.mode = mode;
  o.shape = shape;
  switch (mode) {
    case ScanMode::Raster1D:
      o.perm = raster_perm(shape);
      o.directions = {o.perm};
      break;
    case ScanMode::BiScan:
      o.perm = raster_perm(shape);
      o.directions = {o.perm, reversed(o.perm)};
      break;
    case ScanMode::CrossScan: {
      o.perm = raster_perm(shape);
      auto col = column_major_perm(shape);
      o.directions = {o.perm, col, reversed(o.perm), reversed(col)};
      break;
    }
    case ScanMode::SIP: {
      const bool use_default = sip_start.first < 0;
      o.perm = sip_perm(shape, sip_start, use_default);
      o.directions = {o.perm, reversed(o.perm)};
      break;
    }
  }
  validate_bijection(o.perm, shape.cells());
  o.inv.assign(o.perm.size(), 0);
  for (size_t i = 0; i < o.perm.size(); ++i) o.inv[static_cast<size_t>(o.perm[i])] = static_cast<int64_t>(i);
  return o;
}

LocalityReport locality_score(const ScanOrder& order, const std::vector<uint8_t>& mask) {
  const int64_t H = order.shape.rows, W = order.shape.cols;
  if (static_cast<int64_t>(mask.size()) != H * W) throw ContractError("locality_score: mask shape mismatch");
  int64_t cell_count = 0;
  for (uint8_t m : mask) cell_count += m ? 1 : 0;
  if (cell_count == 0) throw ContractError("locality_score: empty mask");

  double gap_sum = 0.0;
  int64_t pairs = 0;
  for (int64_t r = 0; r < H; ++r)
    for (int64_t c = 0; c < W; ++c) {
      if (!mask[static_cast<size_t>(r * W + c)]) continue;
      const int64_t pos = order.inv[static_cast<size_t>(r * W + c)];
      if (c + 1 < W && mask[static_cast<size_t>(r * W + c + 1)]) {
        gap_sum += std::abs(static_cast<double>(pos - order.inv[static_cast<size_t>(r * W + c + 1)]));
        ++pairs;
      }
      if (r + 1 < H && mask[static_cast<size_t>((r + 1) * W + c)]) {
        gap_sum += std::abs(static_cast<double>(pos - order.inv[static_cast<size_t>((r + 1) * W + c)]));
        ++pairs;
      }
    }

  LocalityReport rep;
  rep.mean_index_gap = pairs == 0 ? 1.0 : gap_sum / static_cast<double>(pairs);

  // Largest positional gap between consecutive visits within one 4-connected component.
  std::vector<int64_t> comp(static_cast<size_t>(H * W), -1);
  int64_t ncomp = 0;
  std::vector<int64_t> stack;
  for (int64_t s = 0; s < H * W; ++s) {
    if (!mask[static_cast<size_t>(s)] || comp[static_cast<size_t>(s)] >= 0) continue;
    stack.push_back(s);
    comp[static_cast<size_t>(s)] = ncomp;
    while (!stack.empty()) {
      const int64_t cur = stack.back();
      stack.pop_back();
      const int64_t r = cur / W, c = cur % W;
      const int64_t nbr[4] = {r > 0 ? cur - W : -1, r + 1 < H ? cur + W : -1, c > 0 ? cur - 1 : -1,
                              c + 1 < W ? cur + 1 : -1};
      for (int64_t nb : nbr)
        if (nb >= 0 && mask[static_cast<size_t>(nb)] && comp[static_cast<size_t>(nb)] < 0) {
          comp[static_cast<size_t>(nb)] = ncomp;
          stack.push_back(nb);
        }
    }
    ++ncomp;
  }
  std::vector<std::vector<int64_t>> positions(static_cast<size_t>(ncomp));
  for (int64_t cell = 0; cell < H * W; ++cell)
    if (mask[static_cast<size_t>(cell)])
      positions[static_cast<size_t>(comp[static_cast<size_t>(cell)])].push_back(order.inv[static_cast<size_t>(cell)]);
  int64_t max_break = 0;
  for (auto& ps : positions) {
    std::sort(ps.begin(), ps.end());
    for (size_t i = 1; i < ps.size(); ++i) max_break = std::max(max_break, ps[i] - ps[i - 1]);
  }
  rep.max_run_break = max_break;
  return rep;
}

namespace {

void hue_to_rgb(double hue_deg, uint8_t* rgb) {
  const double h = hue_deg / 60.0;
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  if (h < 1) r = 1, g = x;
  else if (h < 2) r = x, g = 1;
  else if (h < 3) g = 1, b = x;
  else if (h < 4) g = x, b = 1;
  else if (h < 5) r = x, b = 1;
  else r = 1, b = x;
  rgb[0] = static_cast<uint8_t>(std::lround(r * 255.0));
  rgb[1] = static_cast<uint8_t>(std::lround(g * 255.0));
  rgb[2] = static_cast<uint8_t>(std::lround(b * 255.0));
}

}  // namespace

std::vector<uint8_t> render_ppm(const ScanOrder& order, int cell_px) {
  if (cell_px < 1) throw ContractError("render_ppm: cell_px must be >= 1");
  const int64_t H = order.shape.rows, W = order.shape.cols;
  const int64_t ph = H * cell_px, pw = W * cell_px;
  std::ostringstream head;
  head << "P6\n" << pw << " " << ph << "\n255\n";
  const std::string hs = head.str();
  std::vector<uint8_t> img(hs.size() + static_cast<size_t>(ph * pw * 3));
  std::copy(hs.begin(), hs.end(), img.begin());
  uint8_t* px = img.data() + hs.size();
  const double denom = std::max<int64_t>(H * W, 1);
  for (int64_t cell = 0; cell < H * W; ++cell) {
    uint8_t rgb[3];
    hue_to_rgb(300.0 * static_cast<double>(order.inv[static_cast<size_t>(cell)]) / denom, rgb);
    const int64_t r0 = (cell / W) * cell_px, c0 = (cell % W) * cell_px;
    for (int64_t dr = 0; dr < cell_px; ++dr)
      for (int64_t dc = 0; dc < cell_px; ++dc) {
        uint8_t* p = px + ((r0 + dr) * pw + (c0 + dc)) * 3;
        p[0] = rgb[0];
        p[1] = rgb[1];
        p[2] = rgb[2];
      }
  }
  return img;
}

std::string scan_order_to_json(const ScanOrder& order) {
  nlohmann::json j;
  j["mode"] = scan_mode_name(order.mode);
  j["rows"] = order.shape.rows;
  j["cols"] = order.shape.cols;
  j["perm"] = order.perm;
  j["directions"] = order.directions;
  return j.dump(2);
}

}  // namespace vqssm
