#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <json.hpp>

namespace rsma {

enum class CsitMode { kPerfect, kEstimated };

std::string to_string(CsitMode mode);
CsitMode csit_mode_from_string(const std::string& text);

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Penalty weight schedule of the phase solver: rho starts at `initial` and is
// multiplied by `decay` after every outer round that ends off rank one, down
// to `floor`.
struct RhoSchedule {
  double initial = 10.0;  // weak start: V explores the relaxed set before the penalty bites
  double decay = 0.5;
  double floor = 1e-4;
};

struct SolverConfig {
  double alpha = 0.1;      // LogSumExp smoothing, bits
  double kappa1 = 1e-4;    // beamformer stop tolerance
  double kappa2 = 1e-3;    // outer-loop relative improvement tolerance
  RhoSchedule rho;
  int beam_max_iters = 200;
  int ao_max_iters = 30;
  int phase_max_outer = 20;
  int phase_max_inner = 60;
  int phase_grid_points = 64;
  int power_max_iters = 500;
  int covariance_samples = 2000;
  bool random_beam_init = false;
  bool power_linearize_d = false;
};

struct SystemConfig {
  int antennas = 8;       // M
  int irs_elements = 8;   // N
  int devices = 4;        // K
  int sub_messages = 2;   // I, 1 is the NOMA special case
  int groups = 4;         // L, number of decoding groups
  double bandwidth_hz = 10e6;
  double p_max_w = dbm_to_watt(1.0);
  double p_max_b_w = dbm_to_watt(30.0);
  double snr_db = 10.0;
  int path_count_min = 8;
  int path_count_max = 16;
  int training_length = 100;
  CsitMode csit_mode = CsitMode::kPerfect;
  std::uint64_t seed = 1;
  SolverConfig solver;

  // SNR is P_max / sigma^2.
  double noise_power() const { return p_max_w * std::pow(10.0, -snr_db / 10.0); }
};

// Throws ValidationError naming the first violated invariant.
void validate(const SystemConfig& cfg);

// JSON objects use the field names above; dBm-valued keys p_max_dbm and
// p_max_b_dbm set the watt fields. Unknown keys throw ValidationError.
void apply_system_json(SystemConfig& cfg, const nlohmann::json& j);
void apply_solver_json(SolverConfig& cfg, const nlohmann::json& j);
nlohmann::json system_to_json(const SystemConfig& cfg);

}  // namespace rsma
