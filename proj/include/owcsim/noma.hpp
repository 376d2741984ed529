#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "owcsim/optics.hpp"
#include "owcsim/scenario.hpp"

// Downlink power-domain multiple access: superposition power allocation with
// the DC-bias feasibility constraints, SIC-ordered achievable rates, the
// analytic per-packet failure probability under exponential channel fading,
// and the total success probabilities of the coded and conventional schemes.

namespace owcsim::noma {

struct PowerAllocation {
  std::vector<double> alphas;  // ascending with access distance

  PowerAllocation(std::vector<double> a, const Scenario& scn) : alphas(std::move(a)) {
    if (alphas.empty()) throw std::invalid_argument("noma: empty allocation");
    double sum = 0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      if (alphas[i] < 0 || alphas[i] > 1)
        throw std::invalid_argument("noma: allocation outside [0, 1]");
      if (i > 0 && alphas[i] + 1e-12 < alphas[i - 1])
        throw std::invalid_argument("noma: allocation must ascend with access distance");
      sum += alphas[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("noma: allocation must sum to one");
    const double total = scn.pulse_power_w * sum;
    if (total > scn.dc_bias_w + 1e-9 || total > scn.max_intensity_w - scn.dc_bias_w + 1e-9)
      throw std::invalid_argument("noma: allocation violates intensity constraints");
  }

  std::size_t users() const { return alphas.size(); }
};

struct UserState {
  Vec2 true_position;
  Vec2 estimated_position;
  double access_distance = 0;     // LOS distance to the serving AP
  double true_gain = 0;           // channel gain at the true location
  double estimated_gain = 0;      // gain believed by the transmitter
  double gain_error = 0;          // estimated_gain - true_gain
  double location_error_bound_m = 0;  // scalar location-error bound
  std::size_t group_ap = 0;
  std::size_t order = 0;  // 0-based intra-group SIC order (ascending distance)
};

struct SuccessModelParams {
  int generation_size = 3;   // f
  int coded_attempts = 4;    // coded packets on the air
  int retransmissions = 1;   // per-packet budget V of the conventional scheme
  double zeta_bits_per_hz = 0.5;
  double bandwidth_hz = 20e6;
  double mu = 1.0;
  double sigma_a2 = 2e-11;
  double transmit_power_w = 18.0;
  double responsivity = 0.4;

  static SuccessModelParams from(const Scenario& scn) {
    SuccessModelParams p;
    p.generation_size = scn.generation_size;
    p.coded_attempts = scn.coded_attempts;
    p.retransmissions = scn.conventional_retx;
    p.zeta_bits_per_hz = scn.zeta_bits_per_hz;
    p.bandwidth_hz = scn.comm_bandwidth_hz;
    p.mu = scn.noma_mu;
    p.sigma_a2 = scn.noma_sigma_a2;
    p.transmit_power_w = scn.pulse_power_w;
    p.responsivity = scn.responsivity;
    return p;
  }

  double snr_threshold() const { return std::pow(2.0, zeta_bits_per_hz) - 1.0; }
  double oma_snr_threshold(std::size_t users) const {
    return std::pow(2.0, zeta_bits_per_hz * static_cast<double>(users)) - 1.0;
  }
};

// Gain mismatch caused by a location-error radius b around the true access
// distance; exact cancellation at b = 0, negative otherwise (an inflated
// distance can only lower the believed gain).
inline double csi_error_approx(const Scenario& scn, double access_distance, double b) {
  if (!(access_distance > 0)) throw std::invalid_argument("noma: access distance must be positive");
  if (b < 0) throw std::invalid_argument("noma: negative error radius");
  const double m = scn.lambertian_order();
  const double eta_pow = std::pow(scn.eta(), m + 1.0);
  const double l2 = access_distance * access_distance;
  return optics::gain_prefactor(scn) *
         (eta_pow / std::pow(l2 + b * b, (m + 3.0) / 2.0) -
          eta_pow / std::pow(l2, (m + 3.0) / 2.0));
}

// Rate of user `order` (0-based) under SIC with ascending-distance ordering:
// users after it in the order remain as interference, the last user sees
// noise only.
inline double achievable_rate(double gain, std::size_t order, const PowerAllocation& alloc,
                              const SuccessModelParams& p) {
  if (order >= alloc.users()) throw std::invalid_argument("noma: user order out of range");
  const double r2 = p.responsivity * p.responsivity;
  const double g2 = gain * gain;
  const double pt2 = p.transmit_power_w * p.transmit_power_w;
  const double a2 = alloc.alphas[order] * alloc.alphas[order];
  double interference = 0;
  for (std::size_t j = order + 1; j < alloc.users(); ++j)
    interference += alloc.alphas[j] * alloc.alphas[j];
  const double sinr = p.mu * r2 * g2 * pt2 * a2 /
                      (r2 * g2 * pt2 * interference + p.sigma_a2);
  return p.bandwidth_hz * std::log2(1.0 + sinr);
}

// Normalized fading threshold for user `order`: expected channel power over
// the allocated power margin. The mean-square gain plays the role of the
// fading scale.
inline double omega(double mean_square_gain, const SuccessModelParams& p) {
  if (!(mean_square_gain > 0)) throw std::invalid_argument("noma: degenerate channel");
  return p.sigma_a2 * p.snr_threshold() /
         (p.mu * p.responsivity * p.responsivity * mean_square_gain);
}

inline double epsilon_ratio(double mean_square_gain, std::size_t order,
                            const PowerAllocation& alloc, const SuccessModelParams& p) {
  if (order >= alloc.users()) throw std::invalid_argument("noma: user order out of range");
  const double pt2 = p.transmit_power_w * p.transmit_power_w;
  const double ai2 = alloc.alphas[order] * alloc.alphas[order];
  double margin = ai2;
  if (order + 1 < alloc.users()) {
    const double next2 = alloc.alphas[order + 1] * alloc.alphas[order + 1];
    margin = ai2 - next2 * p.snr_threshold();
    if (!(margin > 0))
      throw std::domain_error("noma: allocation violates the decoding-order condition");
  }
  return omega(mean_square_gain, p) / (pt2 * margin);
}

// Failure probability of one packet within a budget of V transmissions
// (regularized lower incomplete gamma form).
inline double packet_failure_prob(double eps, int budget) {
  if (eps < 0) throw std::invalid_argument("noma: negative epsilon");
  if (budget < 1) throw std::invalid_argument("noma: transmission budget < 1");
  double term = 1.0, sum = 1.0;  // eps^(v-1)/(v-1)! accumulated from v = 1
  for (int v = 2; v <= budget; ++v) {
    term *= eps / static_cast<double>(v - 1);
    sum += term;
  }
  return std::clamp(1.0 - std::exp(-eps) * sum, 0.0, 1.0);
}

namespace detail {
inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}
}  // namespace detail

// Per-user probability of collecting at least f of tau coded packets.
inline double rlnc_user_success(double delta, int f, int tau) {
  if (tau < f) throw std::invalid_argument("noma: fewer attempts than generation size");
  if (delta < 0 || delta > 1) throw std::invalid_argument("noma: delta outside [0, 1]");
  double tail = 0;
  for (int lambda = 0; lambda <= f - 1; ++lambda)
    tail += detail::binomial(tau, lambda) * std::pow(delta, tau - lambda) *
            std::pow(1.0 - delta, lambda);
  return std::clamp(1.0 - tail, 0.0, 1.0);
}

inline double rlnc_noma_success(const std::vector<double>& deltas, int f, int tau) {
  double p = 1.0;
  for (double d : deltas) p *= rlnc_user_success(d, f, tau);
  return p;
}

inline double noma_success(const std::vector<double>& deltas, int f) {
  double p = 1.0;
  for (double d : deltas) {
    if (d < 0 || d > 1) throw std::invalid_argument("noma: delta outside [0, 1]");
    p *= std::pow(1.0 - d, f);
  }
  return p;
}

// Gain-ratio power allocation: alpha_i proportional to (h_1/h_i)^i over the
// SIC order (i counted from zero), re-sorted ascending so the ordering
// constraint holds.
inline PowerAllocation grpa_allocation(const std::vector<double>& gains, const Scenario& scn) {
  if (gains.empty()) throw std::invalid_argument("noma: no gains");
  for (double g : gains)
    if (!(g > 0)) throw std::invalid_argument("noma: degenerate channel gain");
  std::vector<double> w(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i)
    w[i] = std::pow(gains[0] / gains[i], static_cast<double>(i));
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= sum;
  std::sort(w.begin(), w.end());
  return PowerAllocation(std::move(w), scn);
}

enum class CsiMode { kPerfect, kImperfect, kLidalApprox };

// Gain the transmitter believes for a user under the given CSI mode.
inline double believed_gain(const Scenario& scn, const UserState& u, CsiMode mode) {
  switch (mode) {
    case CsiMode::kPerfect:
      return u.true_gain;
    case CsiMode::kImperfect:
      return u.true_gain +
             csi_error_approx(scn, u.access_distance, scn.csi_error_radius_m);
    case CsiMode::kLidalApprox:
      return u.true_gain +
             csi_error_approx(scn, u.access_distance, u.location_error_bound_m);
  }
  throw std::logic_error("noma: unknown CSI mode");
}

inline double group_sum_rate(const Scenario& scn, const std::vector<UserState>& group,
                             const PowerAllocation& alloc, CsiMode mode,
                             const SuccessModelParams& p) {
  if (group.size() != alloc.users()) throw std::invalid_argument("noma: group/allocation mismatch");
  double sum = 0;
  for (const auto& u : group)
    sum += achievable_rate(believed_gain(scn, u, mode), u.order, alloc, p);
  return sum;
}

}  // namespace owcsim::noma
