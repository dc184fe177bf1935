#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "scan_order.hpp"

using namespace vqssm;

namespace {

// Frozen 16-cell trace for N=3 from (0,3), worked by hand from the radial
// recurrence; also the anchor for the acceptance suite.
const std::vector<std::pair<int64_t, int64_t>> kTraceN3 = {
    {0, 3}, {0, 2}, {1, 3}, {0, 1}, {1, 2}, {2, 3}, {0, 0}, {1, 1},
    {2, 2}, {3, 3}, {1, 0}, {2, 1}, {3, 2}, {2, 0}, {3, 1}, {3, 0}};

bool is_bijection(const std::vector<int64_t>& perm, int64_t n) {
  if (static_cast<int64_t>(perm.size()) != n) return false;
  std::vector<int64_t> s = perm;
  std::sort(s.begin(), s.end());
  for (int64_t i = 0; i < n; ++i)
    if (s[static_cast<size_t>(i)] != i) return false;
  return true;
}

}  // namespace

TEST_CASE("sip quadrant trajectory N=3 from (0,3) covers all 16 cells in the known order") {
  auto tr = sip_quadrant_trajectory(3, 0, 3);
  REQUIRE(tr.size() == 16);
  CHECK(tr == kTraceN3);
}

TEST_CASE("sip quadrant trajectory N=0") {
  auto tr = sip_quadrant_trajectory(0, 0, 0);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0] == std::pair<int64_t, int64_t>{0, 0});
}

TEST_CASE("sip quadrant trajectory from (0,0) covers only y <= x cells") {
  auto tr = sip_quadrant_trajectory(3, 0, 0);
  CHECK(tr.size() == 10);
  for (const auto& [x, y] : tr) CHECK(y <= x);
}

TEST_CASE("sip trajectory start out of range is a contract error") {
  CHECK_THROWS_AS(sip_quadrant_trajectory(3, 0, 4), ContractError);
  CHECK_THROWS_AS(sip_quadrant_trajectory(3, -1, 0), ContractError);
}

TEST_CASE("default start (0,N) yields full square coverage for N <= 15") {
  for (int64_t n = 0; n <= 15; ++n) {
    auto tr = sip_quadrant_trajectory(n, 0, n);
    CHECK(static_cast<int64_t>(tr.size()) == (n + 1) * (n + 1));
  }
}

TEST_CASE("every mode yields a bijection with exact inverse for H,W in 1..16") {
  for (int64_t h = 1; h <= 16; ++h)
    for (int64_t w = 1; w <= 16; ++w)
      for (ScanMode m : {ScanMode::Raster1D, ScanMode::BiScan, ScanMode::CrossScan, ScanMode::SIP}) {
        ScanOrder o = build_scan_order({h, w}, m);
        CHECK(is_bijection(o.perm, h * w));
        for (int64_t i = 0; i < h * w; ++i) CHECK(o.inv[static_cast<size_t>(o.perm[static_cast<size_t>(i)])] == i);
        for (const auto& d : o.directions) CHECK(is_bijection(d, h * w));
      }
}

TEST_CASE("trivial shapes") {
  for (ScanMode m : {ScanMode::Raster1D, ScanMode::BiScan, ScanMode::CrossScan, ScanMode::SIP}) {
    ScanOrder o = build_scan_order({1, 1}, m);
    CHECK(o.perm == std::vector<int64_t>{0});
  }
  ScanOrder r = build_scan_order({2, 2}, ScanMode::Raster1D);
  CHECK(r.perm == std::vector<int64_t>{0, 1, 2, 3});
}

TEST_CASE("direction counts per mode") {
  GridShape g{4, 4};
  CHECK(build_scan_order(g, ScanMode::Raster1D).directions.size() == 1);
  CHECK(build_scan_order(g, ScanMode::BiScan).directions.size() == 2);
  CHECK(build_scan_order(g, ScanMode::CrossScan).directions.size() == 4);
  CHECK(build_scan_order(g, ScanMode::SIP).directions.size() == 2);
  ScanOrder bi = build_scan_order(g, ScanMode::BiScan);
  std::vector<int64_t> rev = bi.directions[0];
  std::reverse(rev.begin(), rev.end());
  CHECK(bi.directions[1] == rev);
}

TEST_CASE("8x8 SIP restriction to quadrant I equals the N=3 trace through the quadrant frame") {
  ScanOrder o = build_scan_order({8, 8}, ScanMode::SIP);
  auto quads = quadrant_partition({8, 8});
  const QuadrantSpec& q1 = quads[0];
  REQUIRE(q1.id == 1);
  for (size_t i = 0; i < kTraceN3.size(); ++i) {
    const auto& [x, y] = kTraceN3[i];
    CHECK(o.perm[i] == q1.cell_index(x, y, 8));
  }
}

TEST_CASE("quadrants partition the grid") {
  for (int64_t h : {1, 2, 3, 5, 8})
    for (int64_t w : {1, 2, 3, 5, 8}) {
      auto quads = quadrant_partition({h, w});
      std::vector<int> cover(static_cast<size_t>(h * w), 0);
      for (const auto& q : quads)
        for (int64_t y = 0; y < q.count_y; ++y)
          for (int64_t x = 0; x < q.count_x; ++x) ++cover[static_cast<size_t>(q.cell_index(x, y, w))];
      for (int v : cover) CHECK(v == 1);
    }
}

TEST_CASE("180 degree rotation maps quadrant I onto III and IV onto II") {
  for (int64_t h : {2, 4, 6, 8})
    for (int64_t w : {2, 4, 6, 8}) {
      auto quads = quadrant_partition({h, w});  // order I, IV, III, II
      const QuadrantSpec &q1 = quads[0], &q4 = quads[1], &q3 = quads[2], &q2 = quads[3];
      const int64_t n1 = std::max(q1.count_x, q1.count_y) - 1;
      auto tr = sip_quadrant_trajectory(n1, 0, n1);
      auto rot = [&](int64_t cell) {
        const int64_t r = cell / w, c = cell % w;
        return (h - 1 - r) * w + (w - 1 - c);
      };
      for (const auto& [x, y] : tr) {
        if (x >= q1.count_x || y >= q1.count_y) continue;
        CHECK(rot(q1.cell_index(x, y, w)) == q3.cell_index(x, y, w));
        CHECK(rot(q4.cell_index(x, y, w)) == q2.cell_index(x, y, w));
      }
    }
}

TEST_CASE("locality: identity raster on 1xL grid gives mean gap exactly 1") {
  ScanOrder o = build_scan_order({1, 9}, ScanMode::Raster1D);
  std::vector<uint8_t> mask(9, 1);
  CHECK(locality_score(o, mask).mean_index_gap == 1.0);
}

TEST_CASE("locality: single-cell mask reports the documented convention") {
  ScanOrder o = build_scan_order({4, 4}, ScanMode::SIP);
  std::vector<uint8_t> mask(16, 0);
  mask[5] = 1;
  LocalityReport r = locality_score(o, mask);
  CHECK(r.mean_index_gap == 1.0);
  CHECK(r.max_run_break == 0);
}

TEST_CASE("locality: empty mask is a contract error") {
  ScanOrder o = build_scan_order({4, 4}, ScanMode::Raster1D);
  std::vector<uint8_t> mask(16, 0);
  CHECK_THROWS_AS(locality_score(o, mask), ContractError);
}

TEST_CASE("locality: full-grid raster matches a pair-enumeration oracle") {
  for (int64_t h : {2, 3, 5, 8})
    for (int64_t w : {2, 4, 7, 8}) {
      ScanOrder o = build_scan_order({h, w}, ScanMode::Raster1D);
      std::vector<uint8_t> mask(static_cast<size_t>(h * w), 1);
      // Oracle: enumerate adjacent pairs and positional gaps from scratch.
      double sum = 0.0;
      int64_t pairs = 0;
      for (int64_t r = 0; r < h; ++r)
        for (int64_t c = 0; c < w; ++c) {
          if (c + 1 < w) {
            sum += std::abs(static_cast<double>((r * w + c) - (r * w + c + 1)));
            ++pairs;
          }
          if (r + 1 < h) {
            sum += std::abs(static_cast<double>((r * w + c) - ((r + 1) * w + c)));
            ++pairs;
          }
        }
      LocalityReport rep = locality_score(o, mask);
      CHECK(rep.mean_index_gap == doctest::Approx(sum / static_cast<double>(pairs)).epsilon(1e-15));
      // Closed form: horizontal pairs H(W-1) gap 1, vertical pairs W(H-1) gap W.
      const double closed = (static_cast<double>(h * (w - 1)) + static_cast<double>(w * (h - 1)) * w) /
                            static_cast<double>(h * (w - 1) + w * (h - 1));
      CHECK(rep.mean_index_gap == doctest::Approx(closed).epsilon(1e-15));
    }
}

TEST_CASE("radial diagonal arm in quadrant I: SIP strictly beats raster on 8x8") {
  ScanOrder sip = build_scan_order({8, 8}, ScanMode::SIP);
  ScanOrder ras = build_scan_order({8, 8}, ScanMode::Raster1D);
  std::vector<uint8_t> mask(64, 0);
  // 4-connected staircase arm from the top-right corner toward the center.
  for (const auto& [r, c] : {std::pair{3, 4}, {3, 5}, {2, 5}, {2, 6}, {1, 6}, {1, 7}, {0, 7}})
    mask[static_cast<size_t>(r * 8 + c)] = 1;
  CHECK(locality_score(sip, mask).mean_index_gap < locality_score(ras, mask).mean_index_gap);
}

TEST_CASE("render_ppm 1x1 and determinism") {
  ScanOrder o = build_scan_order({1, 1}, ScanMode::SIP);
  auto img = render_ppm(o);
  const std::string header = "P6\n1 1\n255\n";
  REQUIRE(img.size() == header.size() + 3);
  CHECK(std::equal(header.begin(), header.end(), img.begin()));
  CHECK(render_ppm(o) == img);
  ScanOrder o8 = build_scan_order({8, 8}, ScanMode::SIP);
  CHECK(render_ppm(o8, 4) == render_ppm(o8, 4));
}

TEST_CASE("scan order json export round-trips the permutation") {
  ScanOrder o = build_scan_order({2, 3}, ScanMode::SIP);
  const std::string j = scan_order_to_json(o);
  CHECK(j.find("\"sip\"") != std::string::npos);
  CHECK(j.find("perm") != std::string::npos);
}

TEST_CASE("mode names parse") {
  CHECK(scan_mode_from_name("SIP") == ScanMode::SIP);
  CHECK(scan_mode_from_name("Raster1D") == ScanMode::Raster1D);
  CHECK(scan_mode_from_name("Bi-Scan") == ScanMode::BiScan);
  CHECK(scan_mode_from_name("Cross-Scan") == ScanMode::CrossScan);
  CHECK_THROWS_AS(scan_mode_from_name("zigzag"), ContractError);
}
