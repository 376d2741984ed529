#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "owcsim/geometry.hpp"
#include "owcsim/optics.hpp"
#include "owcsim/scenario.hpp"

// Location-error lower bound for the power-domain observation model: one
// collocated echo plus bistatic echoes from the remaining transmitters, all
// collected by the footprint receiver. The bound is the inverse Fisher
// information of the K-vector of received echo powers with respect to the
// planar target position.

namespace owcsim::crlb {

struct PowerModel {
  double delta_l = 0;  // amplitude constant of the echo-power closed forms
  double m = 0;        // Lambertian order
  double eta = 0;      // height difference between ceiling and cross-section
  std::vector<Vec2> footprints;  // [0]: collocated transceiver, [1..]: bistatic transmitters

  double pi_mono() const { return (m + 7.0) * std::pow(eta, m + 3.0); }
  double pi_bi() const { return (m + 3.0) * std::pow(eta, m + 3.0); }
  std::size_t size() const { return footprints.size(); }

  // Footprint 0 is the transceiver whose footprint covers the target; the
  // rest keep ascending AP order.
  static PowerModel from(const Scenario& scn, std::size_t own_ap) {
    PowerModel pm;
    pm.m = scn.lambertian_order();
    pm.eta = scn.eta();
    pm.delta_l = scn.pulse_power_w * (pm.m + 1.0) * scn.pd_area_m2 / (2.0 * M_PI * M_PI) *
                 scn.cross_section_m2 * scn.rho_mean * scn.filter_gain * scn.concentrator_gain;
    pm.footprints.push_back(scn.aps[own_ap].xy());
    for (std::size_t k = 0; k < scn.aps.size(); ++k)
      if (k != own_ap) pm.footprints.push_back(scn.aps[k].xy());
    return pm;
  }
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Vector planar_distances(const PowerModel& pm, Vec2 target) {
  Vector l(static_cast<Eigen::Index>(pm.size()));
  for (std::size_t k = 0; k < pm.size(); ++k)
    l[static_cast<Eigen::Index>(k)] = planar_distance(pm.footprints[k], target);
  return l;
}

// Echo power closed forms as a function of the planar distance vector.
inline Vector power_vector_from_l(const PowerModel& pm, const Vector& l) {
  const std::size_t K = pm.size();
  const double eta2 = pm.eta * pm.eta;
  const double eta_pow = std::pow(pm.eta, pm.m + 3.0);
  Vector f(static_cast<Eigen::Index>(K));
  const double own = l[0] * l[0] + eta2;
  f[0] = pm.delta_l * eta_pow / std::pow(own, (pm.m + 7.0) / 2.0);
  for (std::size_t k = 1; k < K; ++k) {
    const double rk = l[static_cast<Eigen::Index>(k)] * l[static_cast<Eigen::Index>(k)] + eta2;
    f[static_cast<Eigen::Index>(k)] =
        pm.delta_l * eta_pow / (own * own * std::pow(rk, (pm.m + 3.0) / 2.0));
  }
  return f;
}

inline Vector power_vector(const PowerModel& pm, Vec2 target) {
  return power_vector_from_l(pm, planar_distances(pm, target));
}

// d f / d l^T. The collocated distance also appears inside every bistatic
// entry, so the exact matrix carries a nonzero first column on top of the
// diagonal; `exact = false` keeps the diagonal-only variant.
inline Matrix jacobian_wrt_distance(const PowerModel& pm, Vec2 target, bool exact = true) {
  const std::size_t K = pm.size();
  const Vector l = planar_distances(pm, target);
  const double eta2 = pm.eta * pm.eta;
  const double eta_pow = std::pow(pm.eta, pm.m + 3.0);
  const double own = l[0] * l[0] + eta2;
  Matrix j = Matrix::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
  j(0, 0) = -pm.delta_l * pm.pi_mono() * l[0] / std::pow(own, (pm.m + 9.0) / 2.0);
  for (std::size_t k = 1; k < K; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    const double rk = l[ki] * l[ki] + eta2;
    j(ki, ki) = -pm.delta_l * pm.pi_bi() * l[ki] /
                (own * own * std::pow(rk, (pm.m + 5.0) / 2.0));
    if (exact)
      j(ki, 0) = -4.0 * pm.delta_l * eta_pow * l[0] /
                 (own * own * own * std::pow(rk, (pm.m + 3.0) / 2.0));
  }
  return j;
}

// d f / d X^T (K x 2), composed through d l / d X^T.
inline Matrix jacobian_wrt_position(const PowerModel& pm, Vec2 target, bool exact = true) {
  const std::size_t K = pm.size();
  const Vector l = planar_distances(pm, target);
  const double eta2 = pm.eta * pm.eta;
  const double eta_pow = std::pow(pm.eta, pm.m + 3.0);
  const double own = l[0] * l[0] + eta2;
  Matrix j = Matrix::Zero(static_cast<Eigen::Index>(K), 2);
  const Vec2 d0 = Vec2{target.x, target.y} - pm.footprints[0];
  const double mono = pm.delta_l * pm.pi_mono() / std::pow(own, (pm.m + 9.0) / 2.0);
  j(0, 0) = -mono * d0.x;
  j(0, 1) = -mono * d0.y;
  for (std::size_t k = 1; k < K; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    const double rk = l[ki] * l[ki] + eta2;
    const Vec2 dk = Vec2{target.x, target.y} - pm.footprints[k];
    const double bi = pm.delta_l * pm.pi_bi() / (own * own * std::pow(rk, (pm.m + 5.0) / 2.0));
    j(ki, 0) = -bi * dk.x;
    j(ki, 1) = -bi * dk.y;
    if (exact) {
      const double through_own =
          4.0 * pm.delta_l * eta_pow / (own * own * own * std::pow(rk, (pm.m + 3.0) / 2.0));
      j(ki, 0) -= through_own * d0.x;
      j(ki, 1) -= through_own * d0.y;
    }
  }
  return j;
}

// Noise covariance of the K power observations: matched-filter receiver
// noise plus an ambient floor on the diagonal, a constant coupling term for
// overlapping footprints off it.
struct NoiseCovariance {
  Matrix q;

  explicit NoiseCovariance(Matrix m) : q(std::move(m)) {
    if (q.rows() != q.cols()) throw std::invalid_argument("crlb: covariance not square");
    if (!q.isApprox(q.transpose(), 1e-12))
      throw std::invalid_argument("crlb: covariance not symmetric");
    Eigen::LLT<Matrix> llt(q);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("crlb: covariance not positive definite");
  }

  static NoiseCovariance from(const Scenario& scn, const PowerModel& pm, Vec2 target) {
    const std::size_t K = pm.size();
    const Vector f = power_vector(pm, target);
    const double mf_bins = std::max(1.0, std::round(scn.pulse_width_s / scn.time_bin_s));
    const double amb = scn.q_ambient_w2 * std::pow(std::tan(deg2rad(scn.lidal_fov_deg)), 2.0);
    Matrix q = Matrix::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    for (std::size_t a = 0; a < K; ++a) {
      const auto ai = static_cast<Eigen::Index>(a);
      q(ai, ai) = optics::lidal_bin_noise_variance(scn, f[ai]) / mf_bins + amb;
      for (std::size_t b = a + 1; b < K; ++b) {
        const auto bi = static_cast<Eigen::Index>(b);
        if (planar_distance(pm.footprints[a], pm.footprints[b]) < scn.footprint_diameter_m) {
          q(ai, bi) = scn.q_overlap_w2;
          q(bi, ai) = scn.q_overlap_w2;
        }
      }
    }
    return NoiseCovariance(scn.q_scale * q);
  }
};

struct CrlbResult {
  Eigen::Matrix2d fisher;
  Eigen::Matrix2d bound;
  double b_l = 0;  // sqrt of the bound trace (distance RMSE convention)
};

inline CrlbResult crlb_at(const PowerModel& pm, const NoiseCovariance& cov, Vec2 target,
                          bool exact = true) {
  if (cov.q.rows() != static_cast<Eigen::Index>(pm.size()))
    throw std::invalid_argument("crlb: covariance size mismatch");
  const Matrix j = jacobian_wrt_position(pm, target, exact);
  const Matrix qinv_j = Eigen::LLT<Matrix>(cov.q).solve(j);
  CrlbResult r;
  r.fisher = (j.transpose() * qinv_j).eval();
  const double det = r.fisher.determinant();
  if (!(det > 0) || !std::isfinite(det))
    throw std::runtime_error("crlb: unobservable geometry (singular information matrix)");
  r.bound = r.fisher.inverse();
  r.b_l = std::sqrt(r.bound.trace());
  return r;
}

// Map of the bound over a list of target positions, each with its own
// nearest-footprint observation model.
inline std::vector<CrlbResult> crlb_map(const Scenario& scn, const std::vector<Vec2>& grid,
                                        bool exact = true) {
  if (grid.empty()) throw std::invalid_argument("crlb: empty grid");
  std::vector<CrlbResult> out;
  out.reserve(grid.size());
  for (const auto& p : grid) {
    const PowerModel pm = PowerModel::from(scn, scn.nearest_ap(p));
    out.push_back(crlb_at(pm, NoiseCovariance::from(scn, pm, p), p, exact));
  }
  return out;
}

}  // namespace owcsim::crlb
