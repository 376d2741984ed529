#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "owcsim/geometry.hpp"
#include "owcsim/rng.hpp"
#include "owcsim/scenario.hpp"

// Lambertian line-of-sight channel gain, monostatic/bistatic echo power from
// a reflecting target cross-section, diffuse reflectivity sampling, and
// receiver noise. All pure functions over an immutable Scenario.

namespace owcsim::optics {

inline double lambertian_order(double phi_half_deg) {
  if (!(phi_half_deg > 0 && phi_half_deg < 90))
    throw std::invalid_argument("optics: half-power semi-angle outside (0, 90)");
  return -std::log(2.0) / std::log(std::cos(deg2rad(phi_half_deg)));
}

// LOS gain between a ceiling AP and an upward-facing user PD. Zero outside
// the receiver FOV cone.
inline double los_channel_gain(const Scenario& scn, Vec3 ap, Vec3 user) {
  if (!(user.z < ap.z)) throw std::invalid_argument("optics: user above transmitter plane");
  const double m = lambertian_order(scn.phi_half_deg);
  const double lambda = distance(ap, user);
  const double cos_angle = (ap.z - user.z) / lambda;  // irradiance == incidence here
  const double psi = std::acos(std::clamp(cos_angle, -1.0, 1.0));
  if (psi > deg2rad(scn.user_fov_deg)) return 0.0;
  return (m + 1.0) * scn.pd_area_m2 / (2.0 * M_PI * lambda * lambda) *
         std::pow(cos_angle, m) * cos_angle * scn.filter_gain * scn.concentrator_gain;
}

// Gain as a function of LOS distance for a vertically aligned link; the
// prefactor (m+1) A_PD T_f g_c / 2pi is shared with the CSI error model.
inline double gain_prefactor(const Scenario& scn) {
  const double m = lambertian_order(scn.phi_half_deg);
  return (m + 1.0) * scn.pd_area_m2 / (2.0 * M_PI) * scn.filter_gain * scn.concentrator_gain;
}

inline double los_gain_from_distance(const Scenario& scn, double lambda) {
  const double m = lambertian_order(scn.phi_half_deg);
  const double eta = scn.eta();
  return gain_prefactor(scn) * std::pow(eta, m + 1.0) /
         std::pow(lambda * lambda, (m + 3.0) / 2.0);
}

// Echo power from a horizontal target cross-section at height h', pulse sent
// by `tx` and collected by `rx` (spaced configuration). The FOV gate applies
// at the receiver.
inline double bistatic_reflection_power(const Scenario& scn, Vec3 tx, Vec3 target, Vec3 rx,
                                        double rho) {
  if (distance(tx, rx) < 1e-12)
    throw std::invalid_argument("optics: bistatic geometry needs distinct tx/rx");
  const double m = lambertian_order(scn.phi_half_deg);
  const double r1 = distance(tx, target);
  const double r2 = distance(target, rx);
  const double cos_tx = (tx.z - target.z) / r1;   // irradiance at tx, incidence at target
  const double cos_rx = (rx.z - target.z) / r2;   // re-irradiance at target, incidence at rx
  const double psi = std::acos(std::clamp(cos_rx, -1.0, 1.0));
  if (psi >= deg2rad(scn.lidal_fov_deg)) return 0.0;
  return (m + 1.0) * scn.pd_area_m2 / (2.0 * M_PI * M_PI * r1 * r1 * r2 * r2) *
         scn.pulse_power_w * scn.cross_section_m2 * rho *
         std::pow(cos_tx, m) * cos_tx * cos_rx * cos_rx *
         scn.filter_gain * scn.concentrator_gain;
}

// Collocated transceiver echo power; exhibits the R^-4 envelope on top of
// the Lambertian cos^(m+3) factor.
inline double monostatic_reflection_power(const Scenario& scn, Vec3 transceiver, Vec3 target,
                                          double rho) {
  const double m = lambertian_order(scn.phi_half_deg);
  const double r = distance(transceiver, target);
  const double cos_psi = (transceiver.z - target.z) / r;
  const double psi = std::acos(std::clamp(cos_psi, -1.0, 1.0));
  if (psi >= deg2rad(scn.lidal_fov_deg)) return 0.0;
  return (m + 1.0) * scn.pd_area_m2 / (2.0 * M_PI * M_PI * std::pow(r, 4.0)) *
         scn.pulse_power_w * scn.cross_section_m2 * rho * std::pow(cos_psi, m + 3.0) *
         scn.filter_gain * scn.concentrator_gain;
}

// Gaussian diffuse reflectivity, clamped to [0, 1].
inline double sample_reflectivity(const Scenario& scn, rng::Stream& stream) {
  const double rho = scn.rho_sigma == 0.0 ? scn.rho_mean
                                          : stream.normal(scn.rho_mean, scn.rho_sigma);
  return std::clamp(rho, 0.0, 1.0);
}

inline double sample_reflectivity(const Scenario& scn, std::uint64_t seed) {
  rng::Stream stream(seed);
  return sample_reflectivity(scn, stream);
}

// Communication receiver noise variance (A^2): thermal plus a shot term
// linear in the received optical power.
inline double receiver_noise_variance(const Scenario& scn, double received_power_w) {
  if (received_power_w < 0) throw std::invalid_argument("optics: negative received power");
  return scn.comm_thermal_a2 + scn.comm_shot_a2_per_w * received_power_w;
}

// Ranging receiver per-bin noise variance (W^2), optical-power referred.
inline double lidal_bin_noise_variance(const Scenario& scn, double bin_power_w) {
  return scn.lidal_thermal_w2 + scn.lidal_shot_w * std::max(bin_power_w, 0.0);
}

// Ambient floor admitted by the ranging receiver; grows with the floor area
// seen by the FOV cone.
inline double ambient_variance(const Scenario& scn, double fov_deg) {
  const double t = std::tan(deg2rad(fov_deg));
  return scn.ambient_w2_unit * t * t;
}

}  // namespace owcsim::optics

namespace owcsim {
inline double Scenario::lambertian_order() const {
  return optics::lambertian_order(phi_half_deg);
}
}  // namespace owcsim
