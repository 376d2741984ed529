#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "owcsim/lidal.hpp"
#include "owcsim/rng.hpp"

using namespace owcsim;
using Catch::Approx;

namespace {
const Scenario& scn() {
  static const Scenario s = Scenario::table1();
  return s;
}
}  // namespace

TEST_CASE("noise-free trace puts the echo at the propagation delay") {
  const auto& s = scn();
  rng::Stream stream(5);
  // Target straight below AP 0: monostatic range equals the height gap.
  const Vec2 below{s.aps[0].x, s.aps[0].y};
  const auto trace = lidal::simulate_pulse_trace(s, s.aps[0], s.aps[0], below, s.rho_mean,
                                                 stream, /*noise_free=*/true);
  const auto ccm = lidal::ccm_toa(trace, lidal::pulse_template(s));
  const double expect = 2.0 * s.eta() / lidal::kSpeedOfLight;
  CHECK(std::abs(ccm.toa_s - expect) <= 0.5 * s.time_bin_s + 1e-15);
  CHECK(ccm.statistic_w == Approx(optics::monostatic_reflection_power(
                               s, s.aps[0], s.user_point(below), s.rho_mean)).epsilon(1e-2));
}

TEST_CASE("no target and zero reflectivity leave a noise-only trace") {
  const auto& s = scn();
  rng::Stream stream(6);
  const Vec2 p{1.0, 1.0};
  const auto absent = lidal::simulate_pulse_trace(s, s.aps[0], s.aps[0], p, s.rho_mean, stream,
                                                  false, /*target_present=*/false);
  double mean = 0;
  for (double v : absent.samples) mean += v;
  mean /= static_cast<double>(absent.samples.size());
  const double se = std::sqrt(optics::lidal_bin_noise_variance(s, 0) /
                              static_cast<double>(absent.samples.size())) +
                    std::sqrt(optics::ambient_variance(s, s.lidal_fov_deg));
  CHECK(std::abs(mean) < 3 * se);
  // rho = 0 gives the same all-zero signal content.
  rng::Stream s1(7), s2(7);
  const auto rho0 = lidal::simulate_pulse_trace(s, s.aps[0], s.aps[0], p, 0.0, s1);
  const auto none = lidal::simulate_pulse_trace(s, s.aps[0], s.aps[0], p, s.rho_mean, s2, false, false);
  REQUIRE(rho0.samples.size() == none.samples.size());
  for (std::size_t i = 0; i < rho0.samples.size(); ++i)
    REQUIRE(rho0.samples[i] == Approx(none.samples[i]));
  CHECK_THROWS_AS(lidal::simulate_pulse_trace(s, s.aps[0], s.aps[0], Vec2{9, 9}, 0.5, stream),
                  std::invalid_argument);
}

TEST_CASE("known monostatic range is recovered to within one bin") {
  const auto& s = scn();
  rng::Stream stream(8);
  // Plant the target so the line-of-sight range is exactly 2.5 m.
  const double planar = std::sqrt(2.5 * 2.5 - s.eta() * s.eta());
  const Vec2 p{s.aps[0].x + planar, s.aps[0].y};
  const auto trace =
      lidal::simulate_pulse_trace(s, s.aps[0], s.aps[0], p, s.rho_mean, stream, true);
  const auto ccm = lidal::ccm_toa(trace, lidal::pulse_template(s));
  const double expect = 2.0 * 2.5 / lidal::kSpeedOfLight;  // 16.678 ns
  CHECK(expect == Approx(16.678e-9).epsilon(1e-4));
  CHECK(std::abs(ccm.toa_s - expect) <= s.time_bin_s);
  CHECK(lidal::planar_from_los(ccm.toa_s * lidal::kSpeedOfLight / 2.0, s.eta()) ==
        Approx(planar).margin(2e-3));
}

TEST_CASE("correlating a trace against itself peaks at zero lag") {
  lidal::PulseTrace trace;
  trace.bin_duration_s = 1e-11;
  trace.window_s = 1e-9;
  trace.samples = {0.9, 1.0, 0.7, 0.4, 0.2, 0.1, 0.05, 0.0, 0.0, 0.0};
  const auto ccm = lidal::ccm_toa(trace, trace.samples);  // non-flat template path
  CHECK(ccm.lag == 0);
  CHECK(ccm.toa_s == 0.0);
  lidal::PulseTrace flatline = trace;
  std::fill(flatline.samples.begin(), flatline.samples.end(), 0.0);
  CHECK_THROWS_AS(lidal::ccm_toa(flatline, std::vector<double>{1.0, 1.0}), std::runtime_error);
  CHECK_THROWS_AS(lidal::ccm_toa(trace, std::vector<double>(64, 1.0)), std::invalid_argument);
}

TEST_CASE("ranging error shrinks as the receiver noise shrinks") {
  Scenario s = scn();
  const Vec2 p{1.6, 1.8};
  const std::vector<double> scales = {16.0, 1.0, 0.0625};
  std::vector<double> rmse;
  for (double scale : scales) {
    Scenario noisy = s;
    noisy.lidal_shot_w = s.lidal_shot_w * scale;
    noisy.lidal_thermal_w2 = s.lidal_thermal_w2 * scale;
    double sum_sq = 0;
    int got = 0;
    for (int t = 0; t < 1000; ++t) {
      rng::Stream stream(rng::derive(99, "snr", static_cast<std::uint64_t>(scale * 16), t));
      const auto out = lidal::localize_once(noisy, p, stream);
      if (!out.located) continue;
      ++got;
      sum_sq += std::pow(out.estimate.position.x - p.x, 2) +
                std::pow(out.estimate.position.y - p.y, 2);
    }
    REQUIRE(got > 800);
    rmse.push_back(std::sqrt(sum_sq / got));
  }
  CHECK(rmse[0] >= rmse[1]);
  CHECK(rmse[1] >= rmse[2]);
}

TEST_CASE("detection threshold closed form") {
  // Equal costs and equal spreads cancel every log term.
  const double mu = 2e-8, sigma = 4e-9;
  const double beta = 1.8;
  const double u = 1.0 / (beta - 1.0);
  const double expect = std::sqrt(mu * mu * u * u + mu * mu * u) - mu * u;
  CHECK(lidal::detection_threshold(mu, sigma, beta, 1.0, 1.0, sigma) ==
        Approx(expect).epsilon(1e-12));
  // The configured cost pair lowers the threshold and so raises detection.
  const double d_equal = lidal::detection_threshold(mu, sigma, beta, 1.0, 1.0, 0.8 * sigma);
  const double d_lopsided = lidal::detection_threshold(mu, sigma, beta, 1.0, 100.0, 0.8 * sigma);
  CHECK(d_lopsided < d_equal);
  CHECK(lidal::detection_probability(d_lopsided, mu, sigma) >
        lidal::detection_probability(d_equal, mu, sigma));
  // Scenario-scale values stay finite and positive.
  const double d = lidal::detection_threshold(8e-8, 1e-8, 2.5, 1.0, 100.0, 6e-9);
  CHECK(std::isfinite(d));
  CHECK_THROWS_AS(lidal::detection_threshold(mu, sigma, 0.9, 1, 100, sigma), std::invalid_argument);
  // Tiny mean with a dominant noise spread drives the radicand negative.
  CHECK_THROWS_AS(lidal::detection_threshold(1e-12, 1e-8, 1.001, 1, 100, 9.999e-9),
                  std::domain_error);
}

TEST_CASE("detection probability endpoints") {
  CHECK(lidal::detection_probability(2e-8, 2e-8, 1e-9) == Approx(0.5).epsilon(1e-12));
  CHECK(lidal::detection_probability(-1.0, 2e-8, 1e-9) == Approx(1.0).margin(1e-12));
  CHECK(lidal::detection_probability(1.0, 2e-8, 1e-9) == Approx(0.0).margin(1e-12));
  CHECK(lidal::detection_probability(2e-8, 2e-8, 1e-9, /*q_is_erfc=*/false) ==
        Approx(0.25).epsilon(1e-12));
  double prev = 1.1;
  for (double d : {0.0, 1e-8, 2e-8, 3e-8, 5e-8}) {
    const double v = lidal::detection_probability(d, 2e-8, 5e-9);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("analytic detection probability matches the trace comparator") {
  const auto& s = scn();
  const Vec2 target{1.35, 1.25};  // mid-footprint monostatic geometry
  const auto stats = lidal::link_stats(s, s.aps[0], s.aps[0], target);
  REQUIRE(stats.mu > 0);
  const double d_th = lidal::detection_threshold(stats.mu, stats.sigma(), stats.beta_sigma(),
                                                 s.cost_miss, s.cost_false,
                                                 std::sqrt(stats.sigma_t2));
  const double analytic = lidal::detection_probability(d_th, stats.mu, stats.sigma());
  const auto tmpl = lidal::pulse_template(s);
  const int trials = 10000;
  int hits = 0;
  double stat_sum = 0, stat_sq = 0;
  for (int t = 0; t < trials; ++t) {
    rng::Stream stream(rng::derive(7, "det", static_cast<std::uint64_t>(t)));
    const double rho = optics::sample_reflectivity(s, stream);
    const auto trace = lidal::simulate_pulse_trace(s, s.aps[0], s.aps[0], target, rho, stream);
    const auto ccm = lidal::ccm_toa(trace, tmpl);
    hits += ccm.statistic_w >= d_th ? 1 : 0;
    stat_sum += ccm.statistic_w;
    stat_sq += ccm.statistic_w * ccm.statistic_w;
  }
  const double rate = static_cast<double>(hits) / trials;
  const double se = std::sqrt(std::max(analytic * (1 - analytic), 1e-6) / trials);
  CHECK(std::abs(rate - analytic) <= 3 * se + 0.003);
  // Measured statistic variance reproduces the variance-ratio factor.
  const double var = stat_sq / trials - std::pow(stat_sum / trials, 2);
  const double beta_hat = var / stats.sigma_t2;
  CHECK(beta_hat == Approx(stats.beta_sigma()).epsilon(0.15));
}

TEST_CASE("localization probability: product structure, coverage, spatial shape") {
  const auto& s = scn();
  const Vec2 center{s.aps[0].x, s.aps[0].y};
  const double p_center = lidal::localization_probability(s, center);
  // Exactly the product of the contributing subsystem detection probabilities.
  double expect = lidal::subsystem_detection_probability(
      s, lidal::link_stats(s, s.aps[0], s.aps[0], center));
  for (std::size_t j : s.adjacent_aps(0)) {
    const auto bi = lidal::link_stats(s, s.aps[0], s.aps[j], center);
    if (bi.mu > 0) expect *= lidal::subsystem_detection_probability(s, bi);
  }
  CHECK(p_center == Approx(expect).epsilon(1e-12));
  CHECK(p_center > 0.5);
  // Footprint center beats the footprint edge.
  const Vec2 edge{s.aps[0].x + 1.0, s.aps[0].y + 0.8};
  CHECK(lidal::localization_probability(s, edge) <= p_center);
  // Room corners fall outside two neighbour FOVs at the configured angle.
  CHECK_THROWS_AS(lidal::localization_probability(s, Vec2{0.05, 0.1}), std::runtime_error);
}

TEST_CASE("trilateration: exact ranges, perturbation, degenerate geometry, solvers") {
  const auto& s = scn();
  const std::vector<Vec2> centers = {{1, 1}, {1, 3}, {3, 1}};
  const Vec2 truth{2, 2};
  std::vector<double> ranges;
  for (const auto& c : centers) ranges.push_back(planar_distance(c, truth));
  const auto est = lidal::trilaterate(centers, ranges, s);
  CHECK(est.position.x == Approx(2.0).margin(1e-9));
  CHECK(est.position.y == Approx(2.0).margin(1e-9));
  CHECK(est.residual_norm < 1e-9);

  // A common range inflation moves the estimate smoothly and boundedly.
  Vec2 prev = est.position;
  for (double eps : {0.01, 0.02, 0.04}) {
    auto inflated = ranges;
    for (auto& r : inflated) r += eps;
    const auto shifted = lidal::trilaterate(centers, inflated, s);
    const double step = std::hypot(shifted.position.x - prev.x, shifted.position.y - prev.y);
    CHECK(step < 10 * eps);
    prev = shifted.position;
  }

  CHECK_THROWS_AS(lidal::trilaterate({{1, 1}, {1, 3}, {1, 5}}, {1.0, 1.2, 1.4}, s),
                  std::runtime_error);
  CHECK_THROWS_AS(lidal::trilaterate({{1, 1}, {1, 3}}, {1.0, 1.2}, s), std::invalid_argument);

  const auto direct = lidal::trilaterate(centers, ranges, s, lidal::Solver::kDirect);
  const auto iterative = lidal::trilaterate(centers, ranges, s, lidal::Solver::kBicgstab);
  CHECK(direct.position.x == Approx(iterative.position.x).margin(1e-9));
  CHECK(direct.position.y == Approx(iterative.position.y).margin(1e-9));
}

TEST_CASE("noise-free ranging pipeline recovers sample grid points to millimetres") {
  const auto& s = scn();
  rng::Stream stream(11);
  for (const Vec2 p : {Vec2{0.05, 0.1}, Vec2{1.0, 1.0}, Vec2{2.15, 3.7}, Vec2{3.95, 7.9}}) {
    const auto out = lidal::localize_once(s, p, stream, /*noise_free=*/true);
    REQUIRE(out.located);
    CHECK(std::hypot(out.estimate.position.x - p.x, out.estimate.position.y - p.y) < 5e-3);
  }
}
