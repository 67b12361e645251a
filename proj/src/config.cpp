#include "rsma/config.hpp"

#include <cmath>

#include "rsma/errors.hpp"

namespace rsma {

std::string to_string(CsitMode mode) {
  return mode == CsitMode::kPerfect ? "perfect" : "estimated";
}

CsitMode csit_mode_from_string(const std::string& text) {
  if (text == "perfect") return CsitMode::kPerfect;
  if (text == "estimated") return CsitMode::kEstimated;
  throw ValidationError("unknown csit_mode '" + text + "' (expected perfect or estimated)");
}

void validate(const SystemConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("invalid system config: ") + what);
  };
  require(cfg.antennas >= 1, "antennas must be >= 1");
  require(cfg.irs_elements >= 1, "irs_elements must be >= 1");
  require(cfg.devices >= 1, "devices must be >= 1");
  require(cfg.sub_messages == 1 || cfg.sub_messages == 2, "sub_messages must be 1 or 2");
  require(cfg.groups >= 1, "groups must be >= 1");
  require(cfg.groups <= cfg.devices * cfg.sub_messages, "groups must not exceed devices * sub_messages");
  require(cfg.bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  require(cfg.p_max_w > 0.0 && std::isfinite(cfg.p_max_w), "p_max must be positive");
  require(cfg.p_max_b_w > 0.0 && std::isfinite(cfg.p_max_b_w), "p_max_b must be positive");
  require(std::isfinite(cfg.snr_db) && cfg.noise_power() > 0.0, "snr_db must give a positive noise power");
  require(cfg.path_count_min >= 1 && cfg.path_count_min <= cfg.path_count_max,
          "path count range must satisfy 1 <= min <= max");
  require(cfg.training_length >= 1, "training_length must be >= 1");
  const SolverConfig& s = cfg.solver;
  require(s.alpha > 0.0, "alpha must be positive");
  require(s.kappa1 > 0.0 && s.kappa2 > 0.0, "kappa1 and kappa2 must be positive");
  require(s.rho.initial > 0.0 && s.rho.decay > 0.0 && s.rho.decay <= 1.0 && s.rho.floor > 0.0,
          "rho schedule needs initial > 0, decay in (0, 1], floor > 0");
  require(s.beam_max_iters >= 1 && s.ao_max_iters >= 1 && s.phase_max_outer >= 1 &&
              s.phase_max_inner >= 1 && s.power_max_iters >= 1,
          "iteration limits must be >= 1");
  require(s.phase_grid_points >= 0, "phase_grid_points must be >= 0");
  require(s.covariance_samples >= 100, "covariance_samples must be >= 100");
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("key '") + key + "': " + e.what());
  }
}

}  // namespace

void apply_system_json(SystemConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("system section must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "antennas") read(j, "antennas", cfg.antennas);
    else if (key == "irs_elements") read(j, "irs_elements", cfg.irs_elements);
    else if (key == "devices") read(j, "devices", cfg.devices);
    else if (key == "sub_messages") read(j, "sub_messages", cfg.sub_messages);
    else if (key == "groups") read(j, "groups", cfg.groups);
    else if (key == "bandwidth_hz") read(j, "bandwidth_hz", cfg.bandwidth_hz);
    else if (key == "p_max_dbm") {
      double dbm = 0.0;
      read(j, "p_max_dbm", dbm);
      cfg.p_max_w = dbm_to_watt(dbm);
    } else if (key == "p_max_b_dbm") {
      double dbm = 0.0;
      read(j, "p_max_b_dbm", dbm);
      cfg.p_max_b_w = dbm_to_watt(dbm);
    } else if (key == "snr_db") read(j, "snr_db", cfg.snr_db);
    else if (key == "path_count_min") read(j, "path_count_min", cfg.path_count_min);
    else if (key == "path_count_max") read(j, "path_count_max", cfg.path_count_max);
    else if (key == "training_length") read(j, "training_length", cfg.training_length);
    else if (key == "csit_mode") {
      std::string mode;
      read(j, "csit_mode", mode);
      cfg.csit_mode = csit_mode_from_string(mode);
    } else if (key == "seed") read(j, "seed", cfg.seed);
    else throw ValidationError("unknown system key '" + key + "'");
  }
}

void apply_solver_json(SolverConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("solver section must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "alpha") read(j, "alpha", cfg.alpha);
    else if (key == "kappa1") read(j, "kappa1", cfg.kappa1);
    else if (key == "kappa2") read(j, "kappa2", cfg.kappa2);
    else if (key == "rho_initial") read(j, "rho_initial", cfg.rho.initial);
    else if (key == "rho_decay") read(j, "rho_decay", cfg.rho.decay);
    else if (key == "rho_floor") read(j, "rho_floor", cfg.rho.floor);
    else if (key == "beam_max_iters") read(j, "beam_max_iters", cfg.beam_max_iters);
    else if (key == "ao_max_iters") read(j, "ao_max_iters", cfg.ao_max_iters);
    else if (key == "phase_max_outer") read(j, "phase_max_outer", cfg.phase_max_outer);
    else if (key == "phase_max_inner") read(j, "phase_max_inner", cfg.phase_max_inner);
    else if (key == "phase_grid_points") read(j, "phase_grid_points", cfg.phase_grid_points);
    else if (key == "power_max_iters") read(j, "power_max_iters", cfg.power_max_iters);
    else if (key == "covariance_samples") read(j, "covariance_samples", cfg.covariance_samples);
    else if (key == "random_beam_init") read(j, "random_beam_init", cfg.random_beam_init);
    else if (key == "power_linearize_d") read(j, "power_linearize_d", cfg.power_linearize_d);
    else throw ValidationError("unknown solver key '" + key + "'");
  }
}

nlohmann::json system_to_json(const SystemConfig& cfg) {
  return {
      {"antennas", cfg.antennas},
      {"irs_elements", cfg.irs_elements},
      {"devices", cfg.devices},
      {"sub_messages", cfg.sub_messages},
      {"groups", cfg.groups},
      {"bandwidth_hz", cfg.bandwidth_hz},
      {"p_max_dbm", 30.0 + 10.0 * std::log10(cfg.p_max_w)},
      {"p_max_b_dbm", 30.0 + 10.0 * std::log10(cfg.p_max_b_w)},
      {"snr_db", cfg.snr_db},
      {"path_count_min", cfg.path_count_min},
      {"path_count_max", cfg.path_count_max},
      {"training_length", cfg.training_length},
      {"csit_mode", to_string(cfg.csit_mode)},
      {"seed", cfg.seed},
  };
}

}  // namespace rsma
