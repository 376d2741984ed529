#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "owcsim/geometry.hpp"
#include "owcsim/optics.hpp"
#include "owcsim/rng.hpp"
#include "owcsim/scenario.hpp"

// Pulse-echo sensing: time-binned trace simulation, cross-correlation TOA,
// likelihood-ratio detection thresholds and probabilities, and least-squares
// trilateration. Ranging traces are collected at the footprint receiver the
// target sits under; detection coverage of the neighbouring receivers is
// what the receiver FOV trades off.

namespace owcsim::lidal {

inline constexpr double kSpeedOfLight = 299792458.0;

struct PulseTrace {
  std::vector<double> samples;  // received power per time bin (W), raw (noise may go negative)
  double bin_duration_s = 0;
  double window_s = 0;
  std::size_t footprint = 0;
};

struct DetectionDecision {
  bool indicator = false;  // set iff statistic >= threshold
  double threshold_w = 0;
  double statistic_w = 0;
  std::size_t footprint = 0;
};

struct RangeSet {
  std::size_t own_ap = 0;
  double monostatic_m = 0;                    // own transceiver range
  std::vector<std::size_t> bistatic_aps;      // contributing neighbour transmitters
  std::vector<double> bistatic_m;             // target-to-transmitter ranges
  std::vector<double> toas_s;                 // raw arrival times, monostatic first
};

struct LocationEstimate {
  Vec2 position;
  double residual_norm = 0;
  std::size_t footprints = 0;
};

inline std::size_t trace_bins(const Scenario& scn) {
  return static_cast<std::size_t>(std::llround(scn.trace_window_s / scn.time_bin_s));
}
inline std::size_t pulse_bins(const Scenario& scn) {
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(scn.pulse_width_s / scn.time_bin_s)));
}

inline std::vector<double> pulse_template(const Scenario& scn) {
  return std::vector<double>(pulse_bins(scn), 1.0);
}

// Simulate the echo of one ranging pulse: a rectangular pulse of the
// configured width lands at the propagation delay of tx -> target -> rx,
// fractional-bin edges included, with per-bin receiver noise and one
// ambient level draw per trace.
inline PulseTrace simulate_pulse_trace(const Scenario& scn, Vec3 tx, Vec3 rx, Vec2 target,
                                       double rho, rng::Stream& stream,
                                       bool noise_free = false, bool target_present = true) {
  if (target.x < 0 || target.x > scn.room_x || target.y < 0 || target.y > scn.room_y)
    throw std::invalid_argument("lidal: target outside room");
  PulseTrace trace;
  trace.bin_duration_s = scn.time_bin_s;
  trace.window_s = scn.trace_window_s;
  trace.samples.assign(trace_bins(scn), 0.0);

  if (target_present) {
    const Vec3 t3 = scn.user_point(target);
    const bool monostatic = distance(tx, rx) < 1e-12;
    const double amplitude = monostatic
                                 ? optics::monostatic_reflection_power(scn, tx, t3, rho)
                                 : optics::bistatic_reflection_power(scn, tx, t3, rx, rho);
    if (amplitude > 0) {
      const double delay_s = (distance(tx, t3) + distance(t3, rx)) / kSpeedOfLight;
      const double start = delay_s / scn.time_bin_s;
      const auto first = static_cast<std::size_t>(start);
      const double frac = start - static_cast<double>(first);
      const std::size_t width = pulse_bins(scn);
      if (first + width + 1 >= trace.samples.size())
        throw std::invalid_argument("lidal: trace window shorter than echo delay");
      trace.samples[first] += amplitude * (1.0 - frac);
      for (std::size_t i = 1; i < width; ++i) trace.samples[first + i] += amplitude;
      trace.samples[first + width] += amplitude * frac;
    }
  }

  if (!noise_free) {
    const double ambient_sd =
        std::sqrt(optics::ambient_variance(scn, scn.lidal_fov_deg));
    const double ambient = ambient_sd > 0 ? stream.normal(0.0, ambient_sd) : 0.0;
    for (auto& s : trace.samples) {
      const double var = optics::lidal_bin_noise_variance(scn, s);
      s += ambient + stream.normal(0.0, std::sqrt(var));
    }
  }
  return trace;
}

struct CcmResult {
  double toa_s = 0;
  double statistic_w = 0;  // matched-filter power estimate at the peak
  std::size_t lag = 0;
};

// Cross-correlation arrival time: argmax of the correlation against the
// pulse template, quantized to the bin resolution (no sub-bin
// interpolation). The statistic is the correlation peak normalized by the
// template energy.
inline CcmResult ccm_toa(const PulseTrace& trace, const std::vector<double>& tmpl) {
  if (tmpl.empty() || trace.samples.size() < tmpl.size())
    throw std::invalid_argument("lidal: template longer than trace");
  const std::size_t lags = trace.samples.size() - tmpl.size() + 1;

  bool flat = true;
  for (double v : tmpl)
    if (std::abs(v - tmpl.front()) > 1e-15) { flat = false; break; }

  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_lag = 0;
  double energy = 0;
  for (double v : tmpl) energy += v * v;

  if (flat) {
    // Constant template: the correlation is a running window sum.
    double window = 0;
    for (std::size_t i = 0; i < tmpl.size(); ++i) window += trace.samples[i];
    best = window;
    for (std::size_t lag = 1; lag < lags; ++lag) {
      window += trace.samples[lag + tmpl.size() - 1] - trace.samples[lag - 1];
      if (window > best) { best = window; best_lag = lag; }
    }
    best *= tmpl.front();
  } else {
    for (std::size_t lag = 0; lag < lags; ++lag) {
      double acc = 0;
      for (std::size_t i = 0; i < tmpl.size(); ++i) acc += trace.samples[lag + i] * tmpl[i];
      if (acc > best) { best = acc; best_lag = lag; }
    }
  }

  if (!(best > 0)) throw std::runtime_error("lidal: no echo above the noise floor");
  CcmResult r;
  r.lag = best_lag;
  r.toa_s = static_cast<double>(best_lag) * trace.bin_duration_s;
  r.statistic_w = best / energy;
  return r;
}

// Likelihood-ratio detection threshold on the received-power statistic.
inline double detection_threshold(double mu, double sigma, double beta_sigma, double gamma_fp,
                                  double gamma_fa, double sigma_t) {
  if (!(mu > 0) || !(sigma > 0) || !(sigma_t > 0))
    throw std::invalid_argument("lidal: detection statistics must be positive");
  if (!(beta_sigma > 1))
    throw std::invalid_argument("lidal: beta_sigma <= 1 leaves no target-induced variance");
  const double u = 1.0 / (beta_sigma - 1.0);
  const double radicand = mu * mu * u * u + mu * mu * u +
                          2.0 * sigma * sigma * u *
                              (std::log(gamma_fp / gamma_fa) - std::log(sigma_t / sigma));
  if (radicand < 0)
    throw std::domain_error("lidal: invalid detection parameter regime (negative radicand)");
  return std::sqrt(radicand) - mu * u;
}

// Half-Q detection probability; the erfc reading makes it the exact Gaussian
// exceedance of the threshold, the alternative halves it once more.
inline double detection_probability(double d_th, double mu, double sigma, bool q_is_erfc = true) {
  if (!(sigma > 0)) throw std::invalid_argument("lidal: sigma must be positive");
  const double arg = (d_th - mu) / (std::sqrt(2.0) * sigma);
  const double q = q_is_erfc ? std::erfc(arg) : 0.5 * std::erfc(arg / std::sqrt(2.0));
  return std::clamp(0.5 * q, 0.0, 1.0);
}

// First/second moments of the received echo power for one subsystem link.
struct SubsystemStats {
  double mu = 0;        // mean echo power (W)
  double sigma_s2 = 0;  // echo variance: reflectivity spread plus ambient
  double sigma_t2 = 0;  // matched-filter receiver noise variance

  double sigma2() const { return sigma_s2 + sigma_t2; }
  double sigma() const { return std::sqrt(sigma2()); }
  double beta_sigma() const { return sigma2() / sigma_t2; }
};

inline SubsystemStats link_stats(const Scenario& scn, Vec3 tx, Vec3 rx, Vec2 target) {
  const Vec3 t3 = scn.user_point(target);
  const bool monostatic = distance(tx, rx) < 1e-12;
  const double unit = monostatic ? optics::monostatic_reflection_power(scn, tx, t3, 1.0)
                                 : optics::bistatic_reflection_power(scn, tx, t3, rx, 1.0);
  SubsystemStats s;
  s.mu = unit * scn.rho_mean;
  const double mf_bins = static_cast<double>(pulse_bins(scn));
  s.sigma_t2 = optics::lidal_bin_noise_variance(scn, s.mu) / mf_bins;
  s.sigma_s2 = std::pow(unit * scn.rho_sigma, 2.0) +
               optics::ambient_variance(scn, scn.lidal_fov_deg);
  return s;
}

// Threshold for one link, or nothing when the link cannot support a
// decision: no echo inside the FOV, or a mean too weak for the
// likelihood-ratio form to have a real solution.
inline std::optional<double> subsystem_threshold(const Scenario& scn, const SubsystemStats& s) {
  if (!(s.mu > 0)) return std::nullopt;
  try {
    return detection_threshold(s.mu, s.sigma(), s.beta_sigma(), scn.cost_miss, scn.cost_false,
                               std::sqrt(s.sigma_t2));
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

inline double subsystem_detection_probability(const Scenario& scn, const SubsystemStats& s) {
  const auto d = subsystem_threshold(scn, s);
  if (!d) return 0.0;
  return detection_probability(*d, s.mu, s.sigma(), scn.detection_q_is_erfc);
}

// Probability that the target is both detected by its own transceiver and
// ranged by the adjacent receivers listening to that transceiver's pulse.
inline double localization_probability(const Scenario& scn, Vec2 target) {
  const std::size_t own = scn.nearest_ap(target);
  const SubsystemStats mono = link_stats(scn, scn.aps[own], scn.aps[own], target);
  const auto mono_th = subsystem_threshold(scn, mono);
  if (!mono_th)
    throw std::runtime_error("lidal: unlocatable position (outside monostatic coverage)");
  double p = detection_probability(*mono_th, mono.mu, mono.sigma(), scn.detection_q_is_erfc);
  std::size_t covered = 0;
  for (std::size_t j : scn.adjacent_aps(own)) {
    const SubsystemStats bi = link_stats(scn, scn.aps[own], scn.aps[j], target);
    const auto th = subsystem_threshold(scn, bi);
    if (!th) continue;  // outside this receiver's FOV or below its decision floor
    ++covered;
    p *= detection_probability(*th, bi.mu, bi.sigma(), scn.detection_q_is_erfc);
  }
  if (covered < 2)
    throw std::runtime_error("lidal: unlocatable position (fewer than two bistatic footprints)");
  return p;
}

enum class Solver { kDirect, kBicgstab };

namespace detail {
// Biconjugate-gradient-stabilized solve of a symmetric 2x2 system; kept as
// an alternative route to the direct normal-equation solve.
inline void bicgstab2(const double a[2][2], const double b[2], double x[2]) {
  double r[2] = {b[0] - a[0][0] * x[0] - a[0][1] * x[1],
                 b[1] - a[1][0] * x[0] - a[1][1] * x[1]};
  double r0[2] = {r[0], r[1]};
  double p[2] = {0, 0}, v[2] = {0, 0};
  double rho = 1, alpha = 1, w = 1;
  for (int it = 0; it < 64; ++it) {
    const double rho1 = r0[0] * r[0] + r0[1] * r[1];
    if (std::abs(rho1) < 1e-300) break;
    const double beta = (rho1 / rho) * (alpha / w);
    p[0] = r[0] + beta * (p[0] - w * v[0]);
    p[1] = r[1] + beta * (p[1] - w * v[1]);
    v[0] = a[0][0] * p[0] + a[0][1] * p[1];
    v[1] = a[1][0] * p[0] + a[1][1] * p[1];
    alpha = rho1 / (r0[0] * v[0] + r0[1] * v[1]);
    const double s[2] = {r[0] - alpha * v[0], r[1] - alpha * v[1]};
    const double t[2] = {a[0][0] * s[0] + a[0][1] * s[1], a[1][0] * s[0] + a[1][1] * s[1]};
    const double tt = t[0] * t[0] + t[1] * t[1];
    w = tt > 0 ? (t[0] * s[0] + t[1] * s[1]) / tt : 0;
    x[0] += alpha * p[0] + w * s[0];
    x[1] += alpha * p[1] + w * s[1];
    r[0] = s[0] - w * t[0];
    r[1] = s[1] - w * t[1];
    if (std::sqrt(r[0] * r[0] + r[1] * r[1]) < 1e-14 * std::sqrt(b[0] * b[0] + b[1] * b[1] + 1e-300))
      break;
    rho = rho1;
  }
}
}  // namespace detail

// Least-squares circle intersection: centers (projected transceivers) with
// planar ranges, first entry taken as the linearization reference.
inline LocationEstimate trilaterate(const std::vector<Vec2>& centers,
                                    const std::vector<double>& planar_ranges,
                                    const Scenario& scn, Solver solver = Solver::kDirect) {
  if (centers.size() != planar_ranges.size() || centers.size() < 3)
    throw std::invalid_argument("lidal: trilateration needs at least three footprints");
  const std::size_t n = centers.size() - 1;
  std::vector<double> ax(n), ay(n), b(n);
  const Vec2 c1 = centers[0];
  const double r1sq = planar_ranges[0] * planar_ranges[0];
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 ck = centers[k + 1];
    ax[k] = ck.x - c1.x;
    ay[k] = ck.y - c1.y;
    b[k] = 0.5 * (r1sq - planar_ranges[k + 1] * planar_ranges[k + 1] - c1.x * c1.x + ck.x * ck.x -
                  c1.y * c1.y + ck.y * ck.y);
  }
  double ata[2][2] = {{0, 0}, {0, 0}};
  double atb[2] = {0, 0};
  for (std::size_t k = 0; k < n; ++k) {
    ata[0][0] += ax[k] * ax[k];
    ata[0][1] += ax[k] * ay[k];
    ata[1][1] += ay[k] * ay[k];
    atb[0] += ax[k] * b[k];
    atb[1] += ay[k] * b[k];
  }
  ata[1][0] = ata[0][1];
  const double det = ata[0][0] * ata[1][1] - ata[0][1] * ata[0][1];
  const double scale = std::max(ata[0][0], ata[1][1]);
  if (!(det > 1e-12 * scale * scale))
    throw std::runtime_error("lidal: ill-posed geometry (collinear footprints)");

  double x[2];
  if (solver == Solver::kDirect) {
    x[0] = (ata[1][1] * atb[0] - ata[0][1] * atb[1]) / det;
    x[1] = (ata[0][0] * atb[1] - ata[0][1] * atb[0]) / det;
  } else {
    x[0] = x[1] = 0;
    detail::bicgstab2(ata, atb, x);
  }

  LocationEstimate est;
  est.position = {std::clamp(x[0], 0.0, scn.room_x), std::clamp(x[1], 0.0, scn.room_y)};
  est.footprints = centers.size();
  double res = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = ax[k] * x[0] + ay[k] * x[1] - b[k];
    res += r * r;
  }
  est.residual_norm = std::sqrt(res);
  return est;
}

inline double planar_from_los(double los_range, double eta) {
  const double sq = los_range * los_range - eta * eta;
  return sq > 0 ? std::sqrt(sq) : 0.0;
}

struct RangingOutcome {
  bool located = false;
  LocationEstimate estimate;
  RangeSet ranges;
  std::vector<DetectionDecision> decisions;
};

// One full ranging round at the footprint receiver: monostatic echo first,
// then the echoes of the adjacent transmitters. Each link is gated by the
// snapshot comparator before its arrival time is used.
inline RangingOutcome localize_once(const Scenario& scn, Vec2 target, rng::Stream& stream,
                                    bool noise_free = false, Solver solver = Solver::kDirect) {
  RangingOutcome out;
  const std::size_t own = scn.nearest_ap(target);
  const Vec3 rx = scn.aps[own];
  const std::vector<double> tmpl = pulse_template(scn);
  out.ranges.own_ap = own;

  auto measure = [&](Vec3 tx, std::size_t footprint) -> std::optional<CcmResult> {
    const SubsystemStats stats = link_stats(scn, tx, rx, target);
    if (!(stats.mu > 0)) return std::nullopt;
    const double d_th = detection_threshold(stats.mu, stats.sigma(), stats.beta_sigma(),
                                            scn.cost_miss, scn.cost_false,
                                            std::sqrt(stats.sigma_t2));
    std::optional<CcmResult> best;
    const int snaps = noise_free ? 1 : std::max(1, scn.snapshots);
    for (int s = 0; s < snaps; ++s) {
      const double rho = noise_free ? scn.rho_mean : optics::sample_reflectivity(scn, stream);
      const PulseTrace trace = simulate_pulse_trace(scn, tx, rx, target, rho, stream, noise_free);
      CcmResult ccm;
      try {
        ccm = ccm_toa(trace, tmpl);
      } catch (const std::runtime_error&) {
        continue;  // flat trace, nothing above the floor
      }
      if (!best || ccm.statistic_w > best->statistic_w) best = ccm;
    }
    DetectionDecision dec;
    dec.footprint = footprint;
    dec.threshold_w = d_th;
    dec.statistic_w = best ? best->statistic_w : 0.0;
    dec.indicator = noise_free ? static_cast<bool>(best)
                               : (best && best->statistic_w >= d_th);
    out.decisions.push_back(dec);
    if (!dec.indicator) return std::nullopt;
    return best;
  };

  const auto mono = measure(rx, own);
  if (!mono) return out;
  const double r_own = mono->toa_s * kSpeedOfLight / 2.0;
  out.ranges.monostatic_m = r_own;
  out.ranges.toas_s.push_back(mono->toa_s);

  std::vector<Vec2> centers{rx.xy()};
  std::vector<double> planar{planar_from_los(r_own, scn.eta())};
  for (std::size_t j : scn.adjacent_aps(own)) {
    const auto bi = measure(scn.aps[j], j);
    if (!bi) continue;
    const double r_j = bi->toa_s * kSpeedOfLight - r_own;
    if (!(r_j > 0)) continue;
    out.ranges.bistatic_aps.push_back(j);
    out.ranges.bistatic_m.push_back(r_j);
    out.ranges.toas_s.push_back(bi->toa_s);
    centers.push_back(scn.aps[j].xy());
    planar.push_back(planar_from_los(r_j, scn.eta()));
  }

  if (centers.size() < 3) return out;
  try {
    out.estimate = trilaterate(centers, planar, scn, solver);
  } catch (const std::runtime_error&) {
    return out;  // the links that survived gating were collinear this round
  }
  out.located = true;
  return out;
}

}  // namespace owcsim::lidal
