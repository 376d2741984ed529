#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "owcsim/crlb.hpp"
#include "owcsim/csv.hpp"
#include "owcsim/grid.hpp"
#include "owcsim/grouping.hpp"
#include "owcsim/lidal.hpp"
#include "owcsim/noma.hpp"
#include "owcsim/rlnc.hpp"
#include "owcsim/scenario.hpp"

// Experiment drivers behind the CLI: each one sweeps the scenario, writes
// one or two CSV files with a provenance header (experiment id, seed, config
// hash), and stays byte-deterministic for a fixed (config, seed) pair.

namespace owcsim::harness {

struct RunOptions {
  Scenario scn = Scenario::table1();
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string config_hash = "builtin";

  double alpha_min = 0.26, alpha_max = 0.97, alpha_step = 0.01;
  int success_mc_trials = 20000;
  int localization_trials = 100;
  int crlb_empirical_trials = 200;
  double fov_min_deg = 45, fov_max_deg = 65, fov_step_deg = 1;
  int fig7_group_size = 4;
  int map_group_size = 2;

  static RunOptions from_config(const cfg::Config& c) {
    RunOptions o;
    o.scn = Scenario::from_config(c);
    o.config_hash = csv::hex64(csv::hash_bytes(c.raw_text()));
    o.alpha_min = c.get_double_or("experiments.alpha_min", o.alpha_min);
    o.alpha_max = c.get_double_or("experiments.alpha_max", o.alpha_max);
    o.alpha_step = c.get_double_or("experiments.alpha_step", o.alpha_step);
    o.success_mc_trials = static_cast<int>(c.get_int_or("experiments.success_mc_trials", o.success_mc_trials));
    o.localization_trials = static_cast<int>(c.get_int_or("experiments.localization_trials", o.localization_trials));
    o.crlb_empirical_trials = static_cast<int>(c.get_int_or("experiments.crlb_empirical_trials", o.crlb_empirical_trials));
    o.fov_min_deg = c.get_double_or("experiments.fov_min_deg", o.fov_min_deg);
    o.fov_max_deg = c.get_double_or("experiments.fov_max_deg", o.fov_max_deg);
    o.fov_step_deg = c.get_double_or("experiments.fov_step_deg", o.fov_step_deg);
    o.fig7_group_size = static_cast<int>(c.get_int_or("experiments.fig7_group_size", o.fig7_group_size));
    o.map_group_size = static_cast<int>(c.get_int_or("experiments.map_group_size", o.map_group_size));
    return o;
  }
};

namespace detail {

inline std::string out_path(const RunOptions& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  return (std::filesystem::path(o.out_dir) / name).string();
}

inline void provenance(csv::Writer& w, const RunOptions& o, const std::string& id) {
  w.comment("experiment=" + id + " seed=" + std::to_string(o.seed) + " config_hash=" + o.config_hash);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shared per-grid products.

struct GridModel {
  std::vector<Vec2> points;
  std::vector<crlb::CrlbResult> bounds;  // location-error bound per point

  static GridModel build(const Scenario& scn) {
    GridModel g;
    g.points = generate_grid(scn, GridSpec{scn.resolution_m});
    g.bounds = crlb::crlb_map(scn, g.points);
    return g;
  }

  std::vector<grouping::UserRecord> user_records() const {
    std::vector<grouping::UserRecord> users(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      users[i] = {i, points[i], bounds[i].b_l};
    return users;
  }
};

struct PointAccuracy {
  double rate = 0;          // fraction of rounds that produced an estimate
  double rmse_m = 0;        // over successful rounds
  double bias_m = 0;        // norm of the mean error vector
  Vec2 mean_estimate;
  std::size_t successes = 0;
};

// Monte-Carlo ranging accuracy at one point; error samples are appended for
// histogramming when sample sinks are given.
inline PointAccuracy point_accuracy(const Scenario& scn, Vec2 target, int trials,
                                    std::uint64_t seed, std::size_t point_idx,
                                    std::vector<double>* err_x = nullptr,
                                    std::vector<double>* err_y = nullptr) {
  PointAccuracy acc;
  double sum_sq = 0, sum_dx = 0, sum_dy = 0, sum_x = 0, sum_y = 0;
  for (int t = 0; t < trials; ++t) {
    rng::Stream stream(seed, "ranging", point_idx, static_cast<std::uint64_t>(t));
    const auto outcome = lidal::localize_once(scn, target, stream);
    if (!outcome.located) continue;
    ++acc.successes;
    const double dx = outcome.estimate.position.x - target.x;
    const double dy = outcome.estimate.position.y - target.y;
    sum_sq += dx * dx + dy * dy;
    sum_dx += dx;
    sum_dy += dy;
    sum_x += outcome.estimate.position.x;
    sum_y += outcome.estimate.position.y;
    if (err_x) err_x->push_back(dx);
    if (err_y) err_y->push_back(dy);
  }
  acc.rate = trials > 0 ? static_cast<double>(acc.successes) / trials : 0.0;
  if (acc.successes > 0) {
    const double inv = 1.0 / static_cast<double>(acc.successes);
    acc.rmse_m = std::sqrt(sum_sq * inv);
    acc.bias_m = std::hypot(sum_dx * inv, sum_dy * inv);
    acc.mean_estimate = {sum_x * inv, sum_y * inv};
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Packet success probability sweep (coded/conventional, power vs orthogonal).

struct SweepGroup {
  std::vector<noma::UserState> users;  // ordered by access distance
  std::size_t ap = 0;
};

// The representative group: first group of the requested size at the lowest
// AP index under the default grouping of all grid locations.
inline SweepGroup representative_group(const Scenario& scn, const GridModel& grid, int size) {
  const auto assignment = grouping::assign_groups(scn, grid.user_records(), size);
  for (std::size_t k = 0; k < assignment.groups.size(); ++k) {
    for (const auto& members : assignment.groups[k]) {
      if (static_cast<int>(members.size()) != size) continue;
      SweepGroup g;
      g.ap = k;
      for (const auto& m : members) {
        noma::UserState u;
        u.true_position = grid.points[m.user];
        u.estimated_position = grid.points[m.user];
        u.access_distance = m.access_distance_m;
        u.true_gain = optics::los_channel_gain(scn, scn.aps[k], scn.user_point(grid.points[m.user]));
        u.estimated_gain = u.true_gain;
        u.location_error_bound_m = grid.bounds[m.user].b_l;
        u.group_ap = k;
        u.order = m.order;
        g.users.push_back(u);
      }
      return g;
    }
  }
  throw std::runtime_error("harness: no group of the requested size");
}

// Ascending geometric allocation pinned at the last user's coefficient:
// alpha_i = a q^(M-i) with q solving a (1 + q + ... + q^(M-1)) = 1.
inline std::optional<std::vector<double>> geometric_allocation(double alpha_last, std::size_t users) {
  if (!(alpha_last > 0) || alpha_last >= 1) return std::nullopt;
  if (users == 1) return std::vector<double>{1.0};
  const double target = (1.0 - alpha_last) / alpha_last;  // q + q^2 + ... + q^(M-1)
  double q = 0.8;
  for (int it = 0; it < 80; ++it) {
    double g = 0, dg = 0, pow_q = 1;
    for (std::size_t i = 1; i < users; ++i) {
      dg += static_cast<double>(i) * pow_q;
      pow_q *= q;
      g += pow_q;
    }
    const double step = (g - target) / dg;
    q -= step;
    if (!(q > 0)) q = 1e-6;
    if (std::abs(step) < 1e-14) break;
  }
  if (q > 1.0 + 1e-9) return std::nullopt;  // would break the ascending order
  q = std::min(q, 1.0);
  std::vector<double> alphas(users);
  for (std::size_t i = 0; i < users; ++i)
    alphas[i] = alpha_last * std::pow(q, static_cast<double>(users - 1 - i));
  const double sum = std::accumulate(alphas.begin(), alphas.end(), 0.0);
  for (auto& a : alphas) a /= sum;
  return alphas;
}

struct SuccessPoint {
  double alpha = 0;
  bool feasible = false;
  double rlnc_noma = 0, conv_noma = 0, rlnc_oma = 0, conv_oma = 0;
};

// Analytic per-user packet-failure probabilities for both access schemes.
// All four curves use the single-shot failure probability; see the module
// notes on the transmission-budget reading.
struct SchemeDeltas {
  std::vector<double> noma;
  std::vector<double> oma;
};

inline SchemeDeltas scheme_deltas(const Scenario& scn, const SweepGroup& group,
                                  const noma::PowerAllocation& alloc) {
  const auto params = noma::SuccessModelParams::from(scn);
  SchemeDeltas d;
  const double t_oma = params.oma_snr_threshold(group.users.size());
  for (const auto& u : group.users) {
    const double ms_gain = u.true_gain * u.true_gain;
    const double eps_noma = noma::epsilon_ratio(ms_gain, u.order, alloc, params);
    const double eps_oma = noma::omega(ms_gain, params) * t_oma / params.snr_threshold() /
                           (params.transmit_power_w * params.transmit_power_w);
    d.noma.push_back(noma::packet_failure_prob(eps_noma, scn.conventional_retx));
    d.oma.push_back(noma::packet_failure_prob(eps_oma, scn.conventional_retx));
  }
  return d;
}

inline SuccessPoint success_point(const Scenario& scn, const SweepGroup& group, double alpha) {
  SuccessPoint pt;
  pt.alpha = alpha;
  const auto alphas = geometric_allocation(alpha, group.users.size());
  if (!alphas) return pt;
  try {
    const noma::PowerAllocation alloc(*alphas, scn);
    const auto d = scheme_deltas(scn, group, alloc);
    pt.rlnc_noma = noma::rlnc_noma_success(d.noma, scn.generation_size, scn.coded_attempts);
    pt.conv_noma = noma::noma_success(d.noma, scn.generation_size);
    pt.rlnc_oma = noma::rlnc_noma_success(d.oma, scn.generation_size, scn.coded_attempts);
    pt.conv_oma = noma::noma_success(d.oma, scn.generation_size);
    pt.feasible = true;
  } catch (const std::exception&) {
    pt.feasible = false;  // decoding-order condition violated at this alpha
  }
  return pt;
}

// Packet-level Monte-Carlo of the same four schemes; the coded ones draw
// real coefficient vectors so linear dependence is part of the simulation.
struct McSuccess {
  double rlnc_noma = 0, conv_noma = 0, rlnc_oma = 0, conv_oma = 0;
};

inline McSuccess mc_success(const Scenario& scn, const SchemeDeltas& d, int trials,
                            std::uint64_t seed, std::uint64_t tag) {
  const int f = scn.generation_size;
  const int tau = scn.coded_attempts;
  McSuccess mc;
  auto run = [&](const std::vector<double>& deltas, const char* label, bool coded) {
    rng::Stream stream(seed, label, tag);
    int ok = 0;
    for (int t = 0; t < trials; ++t) {
      bool all = true;
      for (double delta : deltas) {
        if (coded) {
          rlnc::Decoder dec(static_cast<std::size_t>(f), 1);
          for (int a = 0; a < tau; ++a) {
            if (stream.uniform() < delta) continue;  // packet lost on the air
            std::vector<std::uint8_t> coeffs(static_cast<std::size_t>(f));
            for (auto& c : coeffs) c = stream.byte();
            dec.ingest({coeffs, std::vector<std::uint8_t>{0}});
          }
          if (!dec.complete()) { all = false; break; }
        } else {
          for (int p = 0; p < f; ++p)
            if (stream.uniform() < delta) { all = false; break; }
          if (!all) break;
        }
      }
      ok += all ? 1 : 0;
    }
    return static_cast<double>(ok) / trials;
  };
  mc.rlnc_noma = run(d.noma, "mc_rlnc_noma", true);
  mc.conv_noma = run(d.noma, "mc_noma", false);
  mc.rlnc_oma = run(d.oma, "mc_rlnc_oma", true);
  mc.conv_oma = run(d.oma, "mc_oma", false);
  return mc;
}

inline std::vector<std::string> run_success_prob(const RunOptions& o) {
  const GridModel grid = GridModel::build(o.scn);
  const SweepGroup group = representative_group(o.scn, grid, o.fig7_group_size);
  const std::string path = detail::out_path(o, "success_prob.csv");
  csv::Writer w(path);
  detail::provenance(w, o, "success_prob");
  {
    std::string ids = "group_ap=" + std::to_string(group.ap) + " users=";
    for (std::size_t i = 0; i < group.users.size(); ++i) {
      if (i) ids += "|";
      ids += csv::cell(group.users[i].true_position.x) + ":" +
             csv::cell(group.users[i].true_position.y);
    }
    w.comment(ids);
  }
  w.row({"alpha", "scheme", "success_prob", "feasible"});
  std::uint64_t row_tag = 0;
  for (double a = o.alpha_min; a <= o.alpha_max + 1e-9; a += o.alpha_step) {
    const SuccessPoint pt = success_point(o.scn, group, a);
    const std::string fl = pt.feasible ? "1" : "0";
    auto emit = [&](const char* scheme, double v) {
      w.row({csv::cell(a), scheme, pt.feasible ? csv::cell(v) : "", fl});
    };
    emit("rlnc_noma", pt.rlnc_noma);
    emit("noma", pt.conv_noma);
    emit("rlnc_oma", pt.rlnc_oma);
    emit("oma", pt.conv_oma);
    if (pt.feasible && o.success_mc_trials > 0) {
      const auto alphas = geometric_allocation(a, group.users.size());
      const noma::PowerAllocation alloc(*alphas, o.scn);
      const auto d = scheme_deltas(o.scn, group, alloc);
      const McSuccess mc = mc_success(o.scn, d, o.success_mc_trials, o.seed, row_tag);
      emit("rlnc_noma_mc", mc.rlnc_noma);
      emit("noma_mc", mc.conv_noma);
      emit("rlnc_oma_mc", mc.rlnc_oma);
      emit("oma_mc", mc.conv_oma);
    }
    ++row_tag;
  }
  return {path};
}

// ---------------------------------------------------------------------------
// Localization probability map and error PDFs.

inline std::vector<std::string> run_localization_pdf(const RunOptions& o) {
  const GridModel grid = GridModel::build(o.scn);
  const std::string sweep_path = detail::out_path(o, "localization_sweep.csv");
  const std::string pdf_path = detail::out_path(o, "localization_pdf.csv");
  std::vector<double> err_x, err_y;
  {
    csv::Writer w(sweep_path);
    detail::provenance(w, o, "localization_pdf");
    w.row({"x", "y", "P_L", "x_hat", "y_hat", "err_m"});
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      const Vec2 p = grid.points[i];
      double prob = 0;
      try {
        prob = lidal::localization_probability(o.scn, p);
      } catch (const std::runtime_error&) {
        prob = 0;  // position not coverable by enough footprints
      }
      const PointAccuracy acc =
          point_accuracy(o.scn, p, o.localization_trials, o.seed, i, &err_x, &err_y);
      w.row({csv::cell(p.x), csv::cell(p.y), csv::cell(prob),
             acc.successes ? csv::cell(acc.mean_estimate.x) : "",
             acc.successes ? csv::cell(acc.mean_estimate.y) : "",
             acc.successes ? csv::cell(acc.rmse_m) : ""});
    }
  }
  {
    csv::Writer w(pdf_path);
    detail::provenance(w, o, "localization_pdf");
    w.row({"axis", "bin_lo_m", "bin_hi_m", "count", "density"});
    const double lo = -0.5, hi = 0.5, width = 0.02;
    auto hist = [&](const char* axis, const std::vector<double>& errs) {
      const int bins = static_cast<int>(std::round((hi - lo) / width));
      std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
      for (double e : errs) {
        const double c = std::clamp(e, lo, hi - 1e-12);
        ++counts[static_cast<std::size_t>((c - lo) / width)];
      }
      const double total = errs.empty() ? 1.0 : static_cast<double>(errs.size());
      for (int b = 0; b < bins; ++b)
        w.row({axis, csv::cell(lo + b * width), csv::cell(lo + (b + 1) * width),
               csv::cell(counts[static_cast<std::size_t>(b)]),
               csv::cell(static_cast<double>(counts[static_cast<std::size_t>(b)]) / (total * width))});
    };
    hist("x", err_x);
    hist("y", err_y);
  }
  return {sweep_path, pdf_path};
}

// ---------------------------------------------------------------------------
// Location-error bound map, its CDF, and the empirical companion accuracy.

inline std::vector<std::string> run_crlb_cdf(const RunOptions& o) {
  const GridModel grid = GridModel::build(o.scn);
  const std::string map_path = detail::out_path(o, "crlb_map.csv");
  const std::string cdf_path = detail::out_path(o, "crlb_cdf.csv");
  std::vector<double> empirical(grid.points.size(), 0.0);
  {
    csv::Writer w(map_path);
    detail::provenance(w, o, "crlb_cdf");
    w.row({"x", "y", "B_L_m", "fisher_xx", "fisher_xy", "fisher_yy", "empirical_rmse_m"});
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      const auto& r = grid.bounds[i];
      const PointAccuracy acc =
          point_accuracy(o.scn, grid.points[i], o.crlb_empirical_trials, o.seed, i);
      empirical[i] = acc.successes ? acc.rmse_m : -1.0;
      w.row({csv::cell(grid.points[i].x), csv::cell(grid.points[i].y), csv::cell(r.b_l),
             csv::cell(r.fisher(0, 0)), csv::cell(r.fisher(0, 1)), csv::cell(r.fisher(1, 1)),
             acc.successes ? csv::cell(acc.rmse_m) : ""});
    }
  }
  {
    csv::Writer w(cdf_path);
    detail::provenance(w, o, "crlb_cdf");
    w.row({"series", "value_m", "cdf"});
    auto emit = [&](const char* series, std::vector<double> values) {
      std::sort(values.begin(), values.end());
      const double n = static_cast<double>(values.size());
      for (std::size_t i = 0; i < values.size(); ++i)
        w.row({series, csv::cell(values[i]), csv::cell(static_cast<double>(i + 1) / n)});
    };
    std::vector<double> bl;
    for (const auto& r : grid.bounds) bl.push_back(r.b_l);
    emit("crlb", std::move(bl));
    std::vector<double> emp;
    for (double e : empirical)
      if (e >= 0) emp.push_back(e);
    emit("empirical", std::move(emp));
  }
  return {map_path, cdf_path};
}

// ---------------------------------------------------------------------------
// Grouping map.

inline std::vector<std::string> run_grouping_map(const RunOptions& o) {
  const GridModel grid = GridModel::build(o.scn);
  const auto assignment = grouping::assign_groups(o.scn, grid.user_records(), o.map_group_size);
  const std::string path = detail::out_path(o, "grouping_map.csv");
  csv::Writer w(path);
  detail::provenance(w, o, "grouping_map");
  w.row({"x", "y", "assigned_ap", "class", "pair_id", "order", "B_L_m"});
  for (std::size_t i = 0; i < grid.points.size(); ++i)
    w.row({csv::cell(grid.points[i].x), csv::cell(grid.points[i].y),
           csv::cell(assignment.user_ap[i]), csv::cell(assignment.user_class[i]),
           csv::cell(assignment.user_pair[i]), csv::cell(assignment.user_order[i]),
           csv::cell(grid.bounds[i].b_l)});
  return {path};
}

// ---------------------------------------------------------------------------
// Sum rate under the three CSI beliefs, grouped as on the map. The power
// ratios come from the unassisted (fixed-radius) estimates in every mode.

inline std::vector<std::string> run_sum_rate(const RunOptions& o) {
  const GridModel grid = GridModel::build(o.scn);
  const auto assignment = grouping::assign_groups(o.scn, grid.user_records(), o.map_group_size);
  const auto params = noma::SuccessModelParams::from(o.scn);
  const std::string path = detail::out_path(o, "sum_rate_cdf.csv");
  csv::Writer w(path);
  detail::provenance(w, o, "sum_rate_cdf");
  w.row({"location_id", "csi_mode", "sum_rate_bps"});
  for (std::size_t k = 0; k < assignment.groups.size(); ++k) {
    for (const auto& members : assignment.groups[k]) {
      std::vector<noma::UserState> users;
      for (const auto& m : members) {
        noma::UserState u;
        u.true_position = grid.points[m.user];
        u.access_distance = m.access_distance_m;
        u.true_gain = optics::los_channel_gain(o.scn, o.scn.aps[k],
                                               o.scn.user_point(grid.points[m.user]));
        u.location_error_bound_m = grid.bounds[m.user].b_l;
        u.group_ap = k;
        u.order = m.order;
        users.push_back(u);
      }
      std::vector<double> grpa_gains;
      for (const auto& u : users)
        grpa_gains.push_back(noma::believed_gain(o.scn, u, noma::CsiMode::kImperfect));
      const auto alloc = noma::grpa_allocation(grpa_gains, o.scn);
      const struct { noma::CsiMode mode; const char* name; } modes[] = {
          {noma::CsiMode::kPerfect, "perfect"},
          {noma::CsiMode::kImperfect, "imperfect"},
          {noma::CsiMode::kLidalApprox, "lidal_approx"},
      };
      for (const auto& mode : modes) {
        const double rate = noma::group_sum_rate(o.scn, users, alloc, mode.mode, params);
        for (const auto& m : members)
          w.row({csv::cell(m.user), mode.name, csv::cell(rate)});
      }
    }
  }
  return {path};
}

// ---------------------------------------------------------------------------
// Receiver FOV optimization: exhaustive candidate sweep of the mean
// localization probability, tie-broken by the bound DRMSE.

inline std::vector<std::string> run_fov_opt(const RunOptions& o) {
  const std::vector<Vec2> points = generate_grid(o.scn, GridSpec{o.scn.resolution_m});
  struct Row { double fov, mean_p, drmse; };
  std::vector<Row> rows;
  for (double fov = o.fov_min_deg; fov <= o.fov_max_deg + 1e-9; fov += o.fov_step_deg) {
    Scenario scn = o.scn;
    scn.lidal_fov_deg = fov;
    double sum_p = 0, sum_b2 = 0;
    for (const auto& p : points) {
      try {
        sum_p += lidal::localization_probability(scn, p);
      } catch (const std::runtime_error&) {
        // uncovered at this FOV: contributes zero probability
      }
      const auto pm = crlb::PowerModel::from(scn, scn.nearest_ap(p));
      const auto r = crlb::crlb_at(pm, crlb::NoiseCovariance::from(scn, pm, p), p);
      sum_b2 += r.b_l * r.b_l;
    }
    rows.push_back({fov, sum_p / static_cast<double>(points.size()),
                    std::sqrt(sum_b2 / static_cast<double>(points.size()))});
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].mean_p > rows[best].mean_p + 1e-12 ||
        (std::abs(rows[i].mean_p - rows[best].mean_p) <= 1e-12 && rows[i].drmse < rows[best].drmse))
      best = i;
  }
  const std::string path = detail::out_path(o, "fov_optimization.csv");
  csv::Writer w(path);
  detail::provenance(w, o, "fov_opt");
  w.row({"fov_deg", "mean_loc_prob", "drmse_m", "chosen"});
  for (std::size_t i = 0; i < rows.size(); ++i)
    w.row({csv::cell(rows[i].fov), csv::cell(rows[i].mean_p), csv::cell(rows[i].drmse),
           i == best ? "1" : "0"});
  return {path};
}

// ---------------------------------------------------------------------------
// Bundle runner.

struct BundleResult {
  std::vector<std::string> files;
  std::vector<std::pair<std::string, std::string>> failures;  // experiment, reason
  std::string manifest_path;
  bool ok() const { return failures.empty(); }
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {
      "success_prob", "localization_pdf", "crlb_cdf", "grouping_map", "sum_rate_cdf", "fov_opt"};
  return ids;
}

inline std::vector<std::string> run_experiment(const std::string& id, const RunOptions& o) {
  if (id == "success_prob") return run_success_prob(o);
  if (id == "localization_pdf") return run_localization_pdf(o);
  if (id == "crlb_cdf") return run_crlb_cdf(o);
  if (id == "grouping_map") return run_grouping_map(o);
  if (id == "sum_rate_cdf") return run_sum_rate(o);
  if (id == "fov_opt") return run_fov_opt(o);
  throw std::invalid_argument("harness: unknown experiment " + id);
}

inline BundleResult run_all(const RunOptions& o) {
  BundleResult result;
  for (const auto& id : experiment_ids()) {
    try {
      auto files = run_experiment(id, o);
      result.files.insert(result.files.end(), files.begin(), files.end());
    } catch (const std::exception& e) {
      result.failures.emplace_back(id, e.what());
    }
  }
  result.manifest_path = detail::out_path(o, "manifest.csv");
  csv::Writer w(result.manifest_path);
  detail::provenance(w, o, "manifest");
  w.row({"file", "content_hash", "status"});
  std::vector<std::string> sorted = result.files;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& f : sorted)
    w.row({std::filesystem::path(f).filename().string(), csv::hex64(csv::hash_file(f)), "ok"});
  for (const auto& [id, reason] : result.failures)
    w.row({id, "", "failed: " + reason});
  return result;
}

}  // namespace owcsim::harness
