#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "owcsim/config.hpp"
#include "owcsim/geometry.hpp"

// Immutable room / AP / receiver / system parameters. The built-in defaults
// describe the reference desk setup (4x8x3 m room, eight ceiling APs); the
// bundled cfg/table1.cfg reproduces the same values as a config file.

namespace owcsim {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  // Room geometry (m).
  double room_x = 4.0, room_y = 8.0, room_z = 3.0;
  std::vector<Vec3> aps;  // ceiling transceiver positions

  // Transmitter.
  double phi_half_deg = 75.0;   // half-power semi-angle
  double pulse_power_w = 18.0;  // total transmitted optical power P_t

  // Communication (user) receiver.
  double pd_area_m2 = 20e-6;
  double filter_gain = 1.0;
  double concentrator_gain = 3.77;  // configured constant, used verbatim
  double responsivity = 0.4;        // A/W
  double user_fov_deg = 40.0;
  double comm_bandwidth_hz = 20e6;
  double user_height_m = 0.8;  // receiver plane and detection cross-section height h'

  // Detection / localization receiver.
  double lidal_fov_deg = 54.0;
  double lidal_bandwidth_hz = 300e6;
  double time_bin_s = 0.01e-9;
  double pulse_width_s = 2e-9;
  double pulse_slot_s = 2e-9;     // transmit slot per pulse
  double trace_window_s = 26e-9;  // observation window per ranging slot
  double footprint_diameter_m = 2.6;
  double footprint_overlap_m = 0.6;
  double resolution_m = 0.3;  // minimum distinguishable target separation
  double cross_section_m2 = 0.1;
  int snapshots = 2;  // presence-indicator snapshots per decision

  // Diffuse reflectivity of the target (Gaussian, clamped to [0,1]).
  double rho_mean = 0.55;
  double rho_sigma = 0.05;

  // Communication receiver noise (electrical, A^2).
  double comm_thermal_a2 = 3.5e-11;
  double comm_shot_a2_per_w = 1e-12;

  // Ranging receiver noise, optical-power referred (W^2 per time bin).
  double lidal_thermal_w2 = 1e-17;
  double lidal_shot_w = 8e-7;
  double ambient_w2_unit = 5.0e-18;  // ambient floor at unity tan(FOV)

  // Power-observation noise covariance for the location-error bound.
  double q_scale = 0.0078;
  double q_ambient_w2 = 6.0e-18;
  double q_overlap_w2 = 1.5e-18;

  // Detector decision costs and probability convention.
  double cost_miss = 1.0;     // penalty for missing a present target
  double cost_false = 100.0;  // penalty for declaring an absent target
  bool detection_q_is_erfc = true;  // erfc reading of the half-Q detection form

  // Multiple-access model.
  double zeta_bits_per_hz = 0.5;  // per-packet throughput threshold / B_w
  double noma_mu = 1.0;
  double noma_sigma_a2 = 1e-11;  // electrical noise in the rate model
  double max_intensity_w = 40.0;  // optical intensity ceiling A
  double dc_bias_w = 20.0;        // I_dc
  double csi_error_radius_m = 0.5;  // location error without ranging assistance

  // Coding.
  int generation_size = 3;  // f
  int packet_len = 64;
  int coded_attempts = 4;   // coded packets per generation on the air
  int conventional_retx = 1;  // per-packet transmission budget V for plain schemes

  double lambertian_order() const;  // defined in optics.hpp

  double eta() const { return room_z - user_height_m; }
  double footprint_radius() const { return footprint_diameter_m / 2.0; }
  std::size_t ap_count() const { return aps.size(); }

  // Footprints overlap when projected centers are closer than one diameter.
  std::vector<std::size_t> adjacent_aps(std::size_t k) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < aps.size(); ++j) {
      if (j == k) continue;
      if (planar_distance(aps[j], aps[k]) < footprint_diameter_m) out.push_back(j);
    }
    return out;
  }

  std::size_t nearest_ap(Vec2 p) const {
    std::size_t best = 0;
    double best_d = planar_distance(aps[0].xy(), p);
    for (std::size_t k = 1; k < aps.size(); ++k) {
      double d = planar_distance(aps[k].xy(), p);
      if (d < best_d - 1e-12) { best_d = d; best = k; }
    }
    return best;
  }

  Vec3 user_point(Vec2 p) const { return {p.x, p.y, user_height_m}; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0)) throw ScenarioError(std::string("scenario: ") + name + " must be positive");
    };
    positive(room_x, "room_x"); positive(room_y, "room_y"); positive(room_z, "room_z");
    positive(pd_area_m2, "pd_area"); positive(filter_gain, "filter_gain");
    positive(concentrator_gain, "concentrator_gain"); positive(responsivity, "responsivity");
    positive(pulse_power_w, "pulse_power"); positive(cross_section_m2, "cross_section");
    positive(time_bin_s, "time_bin"); positive(pulse_width_s, "pulse_width");
    positive(trace_window_s, "trace_window"); positive(resolution_m, "resolution");
    positive(comm_bandwidth_hz, "comm_bandwidth"); positive(lidal_bandwidth_hz, "lidal_bandwidth");
    if (!(phi_half_deg > 0 && phi_half_deg < 90))
      throw ScenarioError("scenario: phi_half_deg outside (0, 90)");
    if (!(user_fov_deg > 0 && user_fov_deg < 90) || !(lidal_fov_deg > 0 && lidal_fov_deg < 90))
      throw ScenarioError("scenario: receiver FOV outside (0, 90)");
    if (aps.size() < 3)
      throw ScenarioError("scenario: localization needs at least three footprints");
    for (const auto& ap : aps)
      if (ap.x < 0 || ap.x > room_x || ap.y < 0 || ap.y > room_y)
        throw ScenarioError("scenario: AP outside room");
    if (!(user_height_m > 0 && user_height_m < room_z))
      throw ScenarioError("scenario: user height outside room");
    if (rho_mean < 0 || rho_mean > 1 || rho_sigma < 0)
      throw ScenarioError("scenario: bad reflectivity distribution");
    if (generation_size < 1) throw ScenarioError("scenario: generation size < 1");
    if (coded_attempts < generation_size)
      throw ScenarioError("scenario: coded attempts below generation size");
    if (conventional_retx < 1) throw ScenarioError("scenario: retransmission budget < 1");
    if (trace_window_s < pulse_width_s)
      throw ScenarioError("scenario: trace window shorter than pulse");
  }

  static Scenario table1() {
    Scenario s;
    s.aps = {{1, 1, 3}, {1, 3, 3}, {1, 5, 3}, {1, 7, 3},
             {3, 1, 3}, {3, 3, 3}, {3, 5, 3}, {3, 7, 3}};
    s.validate();
    return s;
  }

  static Scenario from_config(const cfg::Config& c) {
    Scenario s = table1();
    s.room_x = c.get_double_or("room.x", s.room_x);
    s.room_y = c.get_double_or("room.y", s.room_y);
    s.room_z = c.get_double_or("room.z", s.room_z);
    if (c.has("room.ap_positions")) {
      s.aps.clear();
      for (const auto& t : c.get_tuples("room.ap_positions")) {
        if (t.size() != 3) throw ScenarioError("scenario: AP position needs x,y,z");
        s.aps.push_back({t[0], t[1], t[2]});
      }
    }
    s.phi_half_deg = c.get_double_or("transmitter.phi_half_deg", s.phi_half_deg);
    s.pulse_power_w = c.get_double_or("transmitter.power_w", s.pulse_power_w);

    s.pd_area_m2 = c.get_double_or("user_receiver.pd_area_m2", s.pd_area_m2);
    s.filter_gain = c.get_double_or("user_receiver.filter_gain", s.filter_gain);
    s.concentrator_gain = c.get_double_or("user_receiver.concentrator_gain", s.concentrator_gain);
    s.responsivity = c.get_double_or("user_receiver.responsivity_a_per_w", s.responsivity);
    s.user_fov_deg = c.get_double_or("user_receiver.fov_deg", s.user_fov_deg);
    s.comm_bandwidth_hz = c.get_double_or("user_receiver.bandwidth_hz", s.comm_bandwidth_hz);
    s.user_height_m = c.get_double_or("user_receiver.height_m", s.user_height_m);

    s.lidal_fov_deg = c.get_double_or("lidal.fov_deg", s.lidal_fov_deg);
    s.lidal_bandwidth_hz = c.get_double_or("lidal.bandwidth_hz", s.lidal_bandwidth_hz);
    s.time_bin_s = c.get_double_or("lidal.time_bin_ns", s.time_bin_s * 1e9) * 1e-9;
    s.pulse_width_s = c.get_double_or("lidal.pulse_width_ns", s.pulse_width_s * 1e9) * 1e-9;
    s.pulse_slot_s = c.get_double_or("lidal.pulse_slot_ns", s.pulse_slot_s * 1e9) * 1e-9;
    s.trace_window_s = c.get_double_or("lidal.trace_window_ns", s.trace_window_s * 1e9) * 1e-9;
    s.footprint_diameter_m = c.get_double_or("lidal.footprint_diameter_m", s.footprint_diameter_m);
    s.footprint_overlap_m = c.get_double_or("lidal.footprint_overlap_m", s.footprint_overlap_m);
    s.resolution_m = c.get_double_or("lidal.resolution_m", s.resolution_m);
    s.cross_section_m2 = c.get_double_or("lidal.cross_section_m2", s.cross_section_m2);
    s.snapshots = static_cast<int>(c.get_int_or("lidal.snapshots", s.snapshots));

    s.rho_mean = c.get_double_or("reflectivity.mean", s.rho_mean);
    s.rho_sigma = c.get_double_or("reflectivity.sigma", s.rho_sigma);

    s.comm_thermal_a2 = c.get_double_or("noise.comm_thermal_a2", s.comm_thermal_a2);
    s.comm_shot_a2_per_w = c.get_double_or("noise.comm_shot_a2_per_w", s.comm_shot_a2_per_w);
    s.lidal_thermal_w2 = c.get_double_or("noise.lidal_thermal_w2", s.lidal_thermal_w2);
    s.lidal_shot_w = c.get_double_or("noise.lidal_shot_w", s.lidal_shot_w);
    s.ambient_w2_unit = c.get_double_or("noise.ambient_w2_unit", s.ambient_w2_unit);
    s.q_scale = c.get_double_or("noise.q_scale", s.q_scale);
    s.q_ambient_w2 = c.get_double_or("noise.q_ambient_w2", s.q_ambient_w2);
    s.q_overlap_w2 = c.get_double_or("noise.q_overlap_w2", s.q_overlap_w2);

    s.cost_miss = c.get_double_or("detection.cost_miss", s.cost_miss);
    s.cost_false = c.get_double_or("detection.cost_false", s.cost_false);
    const std::string qmode = c.get_string_or("detection.q_function", "erfc");
    if (qmode == "erfc") s.detection_q_is_erfc = true;
    else if (qmode == "gaussian") s.detection_q_is_erfc = false;
    else throw ScenarioError("scenario: detection.q_function must be erfc or gaussian");

    s.zeta_bits_per_hz = c.get_double_or("noma.zeta_bits_per_hz", s.zeta_bits_per_hz);
    s.noma_mu = c.get_double_or("noma.mu", s.noma_mu);
    s.noma_sigma_a2 = c.get_double_or("noma.sigma_a2", s.noma_sigma_a2);
    s.max_intensity_w = c.get_double_or("noma.max_intensity_w", s.max_intensity_w);
    s.dc_bias_w = c.get_double_or("noma.dc_bias_w", s.dc_bias_w);
    s.csi_error_radius_m = c.get_double_or("noma.csi_error_radius_m", s.csi_error_radius_m);

    s.generation_size = static_cast<int>(c.get_int_or("rlnc.generation_size", s.generation_size));
    s.packet_len = static_cast<int>(c.get_int_or("rlnc.packet_len", s.packet_len));
    s.coded_attempts = static_cast<int>(c.get_int_or("rlnc.coded_attempts", s.coded_attempts));
    s.conventional_retx = static_cast<int>(c.get_int_or("rlnc.conventional_retx", s.conventional_retx));

    s.validate();
    return s;
  }

  static Scenario load(const std::string& path) { return from_config(cfg::Config::load(path)); }
};

}  // namespace owcsim
