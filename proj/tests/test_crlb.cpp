#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "owcsim/crlb.hpp"
#include "owcsim/grid.hpp"
#include "owcsim/rng.hpp"

using namespace owcsim;
using Catch::Approx;

namespace {

const Scenario& scn() {
  static const Scenario s = Scenario::table1();
  return s;
}

// Central finite differences of the echo-power vector.
crlb::Matrix fd_jacobian_position(const crlb::PowerModel& pm, Vec2 p, double h = 1e-6) {
  const auto fx1 = crlb::power_vector(pm, {p.x + h, p.y});
  const auto fx0 = crlb::power_vector(pm, {p.x - h, p.y});
  const auto fy1 = crlb::power_vector(pm, {p.x, p.y + h});
  const auto fy0 = crlb::power_vector(pm, {p.x, p.y - h});
  crlb::Matrix j(fx1.size(), 2);
  j.col(0) = (fx1 - fx0) / (2 * h);
  j.col(1) = (fy1 - fy0) / (2 * h);
  return j;
}

crlb::Matrix fd_jacobian_distance(const crlb::PowerModel& pm, Vec2 p, double h = 1e-6) {
  const auto l = crlb::planar_distances(pm, p);
  crlb::Matrix j(l.size(), l.size());
  for (Eigen::Index k = 0; k < l.size(); ++k) {
    auto lp = l, lm = l;
    lp[k] += h;
    lm[k] -= h;
    j.col(k) = (crlb::power_vector_from_l(pm, lp) - crlb::power_vector_from_l(pm, lm)) / (2 * h);
  }
  return j;
}

// Entrywise relative error over the entries large enough to sit above the
// finite-difference roundoff floor, plus a matrix-level Frobenius check so
// the small entries stay covered in aggregate.
double max_rel_err(const crlb::Matrix& a, const crlb::Matrix& b) {
  const double dominant = b.cwiseAbs().maxCoeff();
  double worst = (a - b).norm() / b.norm();
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double scale = std::max(std::abs(a(r, c)), std::abs(b(r, c)));
      if (scale < 1e-3 * dominant) continue;  // below the FD noise floor
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)) / scale);
    }
  return worst;
}

}  // namespace

TEST_CASE("echo-power vector: beneath-the-transceiver algebra and monotonicity") {
  const auto pm = crlb::PowerModel::from(scn(), 0);
  const Vec2 below{pm.footprints[0].x, pm.footprints[0].y};
  const auto f = crlb::power_vector(pm, below);
  CHECK(f[0] == Approx(pm.delta_l / std::pow(pm.eta, 4.0)).epsilon(1e-12));
  // Bistatic entries shrink as the transmitter distance grows.
  const auto l = crlb::planar_distances(pm, below);
  for (Eigen::Index a = 1; a < f.size(); ++a)
    for (Eigen::Index b = a + 1; b < f.size(); ++b)
      if (l[a] < l[b] - 1e-9) CHECK(f[a] > f[b]);
}

TEST_CASE("distance jacobian: zero at the axis, finite differences, diagonal variant") {
  const auto pm = crlb::PowerModel::from(scn(), 0);
  const Vec2 below{pm.footprints[0].x, pm.footprints[0].y};
  const auto j0 = crlb::jacobian_wrt_distance(pm, below);
  CHECK(j0(0, 0) == 0.0);  // stationary point directly beneath the transceiver

  rng::Stream stream(31);
  for (int t = 0; t < 10; ++t) {
    const Vec2 p{0.3 + 3.4 * stream.uniform(), 0.3 + 7.4 * stream.uniform()};
    const auto exact = crlb::jacobian_wrt_distance(pm, p);
    CHECK(max_rel_err(exact, fd_jacobian_distance(pm, p)) < 1e-6);
    // Diagonal entries are negative away from the axes.
    for (Eigen::Index k = 0; k < exact.rows(); ++k) CHECK(exact(k, k) < 0.0);
    // The diagonal-only variant drops the shared-distance column.
    const auto diag = crlb::jacobian_wrt_distance(pm, p, /*exact=*/false);
    for (Eigen::Index k = 1; k < diag.rows(); ++k) {
      CHECK(diag(k, 0) == 0.0);
      CHECK(diag(k, k) == Approx(exact(k, k)));
    }
  }
}

TEST_CASE("position jacobian: finite differences, symmetry, zero row at the axis") {
  const auto pm = crlb::PowerModel::from(scn(), 0);
  rng::Stream stream(32);
  for (int t = 0; t < 10; ++t) {
    const Vec2 p{0.3 + 3.4 * stream.uniform(), 0.3 + 7.4 * stream.uniform()};
    CHECK(max_rel_err(crlb::jacobian_wrt_position(pm, p), fd_jacobian_position(pm, p)) < 1e-6);
  }
  // Directly beneath the transceiver the collocated row vanishes.
  const Vec2 below{pm.footprints[0].x, pm.footprints[0].y};
  const auto j = crlb::jacobian_wrt_position(pm, below);
  CHECK(j(0, 0) == 0.0);
  CHECK(j(0, 1) == 0.0);
  // Mirror symmetry between the two transmitter columns of the lattice
  // (diagonal chain-rule form: the shared collocated distance is an even
  // function of the mirror, so only the per-transmitter factor flips).
  const Vec2 mid{2.0, 3.0};  // equidistant from (1,3) and (3,3)
  const auto pm2 = crlb::PowerModel::from(scn(), 1);
  const auto jm = crlb::jacobian_wrt_position(pm2, mid, /*exact=*/false);
  const auto lm = crlb::planar_distances(pm2, mid);
  for (Eigen::Index a = 1; a < lm.size(); ++a)
    for (Eigen::Index b = a + 1; b < lm.size(); ++b) {
      if (std::abs(lm[a] - lm[b]) > 1e-12) continue;
      const bool mirrored_x =
          std::abs((pm2.footprints[static_cast<std::size_t>(a)].x - mid.x) +
                   (pm2.footprints[static_cast<std::size_t>(b)].x - mid.x)) < 1e-12;
      const bool same_y = std::abs(pm2.footprints[static_cast<std::size_t>(a)].y -
                                   pm2.footprints[static_cast<std::size_t>(b)].y) < 1e-12;
      if (mirrored_x && same_y) {
        CHECK(jm(a, 0) == Approx(-jm(b, 0)).epsilon(1e-9));
        CHECK(jm(a, 1) == Approx(jm(b, 1)).epsilon(1e-9));
      }
    }
}

TEST_CASE("bound: covariance scaling, information monotonicity, PSD") {
  const auto pm = crlb::PowerModel::from(scn(), 0);
  const Vec2 p{0.7, 1.6};
  const auto cov = crlb::NoiseCovariance::from(scn(), pm, p);
  const auto base = crlb::crlb_at(pm, cov, p);
  CHECK(base.fisher(0, 1) == Approx(base.fisher(1, 0)));
  CHECK(base.fisher(0, 0) > 0);
  CHECK(base.bound(0, 0) > 0);
  CHECK(base.bound(1, 1) > 0);

  const auto scaled = crlb::crlb_at(pm, crlb::NoiseCovariance(4.0 * cov.q), p);
  CHECK(scaled.b_l == Approx(2.0 * base.b_l).epsilon(1e-9));
  CHECK(scaled.bound(0, 0) == Approx(4.0 * base.bound(0, 0)).epsilon(1e-9));

  // Dropping a footprint can only weaken the information.
  crlb::PowerModel smaller = pm;
  smaller.footprints.pop_back();
  const auto n = static_cast<Eigen::Index>(smaller.size());
  const auto sub = crlb::crlb_at(smaller, crlb::NoiseCovariance(cov.q.topLeftCorner(n, n)), p);
  CHECK(sub.b_l >= base.b_l - 1e-12);
}

TEST_CASE("bound: singular information geometry raises") {
  crlb::PowerModel pm = crlb::PowerModel::from(scn(), 0);
  pm.footprints.resize(1);  // one echo observation cannot pin two coordinates
  crlb::Matrix q = crlb::Matrix::Identity(1, 1) * 1e-18;
  CHECK_THROWS_AS(crlb::crlb_at(pm, crlb::NoiseCovariance(q), Vec2{0.7, 1.6}), std::runtime_error);
  CHECK_THROWS_AS(crlb::NoiseCovariance(crlb::Matrix::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("bound map: single point, lattice mirror symmetry, CDF sanity") {
  const auto& s = scn();
  const Vec2 p{1.3, 2.2};
  const auto single = crlb::crlb_map(s, {p});
  const auto pm = crlb::PowerModel::from(s, s.nearest_ap(p));
  const auto direct = crlb::crlb_at(pm, crlb::NoiseCovariance::from(s, pm, p), p);
  REQUIRE(single.size() == 1);
  CHECK(single[0].b_l == Approx(direct.b_l).epsilon(1e-12));

  const auto grid = harness::generate_grid(s, harness::GridSpec{s.resolution_m});
  const auto bounds = crlb::crlb_map(s, grid);
  // Mirror in x across the room center maps grid points onto grid points.
  std::vector<double> sorted;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sorted.push_back(bounds[i].b_l);
    const Vec2 mirrored{s.room_x - grid[i].x, grid[i].y};
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (std::abs(grid[j].x - mirrored.x) < 1e-9 && std::abs(grid[j].y - mirrored.y) < 1e-9)
        CHECK(bounds[i].b_l == Approx(bounds[j].b_l).epsilon(1e-9));
  }
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) CHECK(sorted[i] >= sorted[i - 1]);
  CHECK_THROWS_AS(crlb::crlb_map(s, {}), std::invalid_argument);
}

TEST_CASE("bound shrinks when the observation noise shrinks") {
  const auto& s = scn();
  rng::Stream stream(77);
  const auto pm = crlb::PowerModel::from(s, 0);
  for (int t = 0; t < 20; ++t) {
    const Vec2 p{0.2 + 3.6 * stream.uniform(), 0.2 + 7.6 * stream.uniform()};
    const auto cov = crlb::NoiseCovariance::from(s, pm, p);
    const auto full = crlb::crlb_at(pm, cov, p);
    const auto less = crlb::crlb_at(pm, crlb::NoiseCovariance(0.5 * cov.q), p);
    CHECK(less.b_l < full.b_l + 1e-15);
  }
}
