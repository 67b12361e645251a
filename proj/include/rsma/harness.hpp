#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsma/config.hpp"

namespace rsma {

// Bad experiment config or preset request; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme { kProposed, kNoIrs, kNoma };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& text);

struct ExperimentConfig {
  std::vector<SystemConfig> points;  // one per sweep point, already validated
  std::vector<Scheme> schemes;
  std::vector<std::uint64_t> seeds;
};

// Top-level keys: system, solver, sweep, schemes, seeds. `sweep` is either an
// object of arrays (cartesian product) or an array of override objects.
// `seeds` is a list or {"start": s, "count": n}. Errors carry line:column.
ExperimentConfig parse_experiment(const std::string& text, const std::string& source = "config");

struct ExperimentRecord {
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  int antennas = 0;
  int irs_elements = 0;
  int devices = 0;
  int sub_messages = 0;
  int groups = 0;
  CsitMode csit_mode = CsitMode::kPerfect;
  Scheme scheme = Scheme::kProposed;
  int iter_count = 0;
  double r_min_final = 0.0;
  std::vector<double> r_min_trace;
  double wall_time_ms = 0.0;
  std::string status = "ok";
  std::string error;  // diagnostic for failed rows, not written to the CSV
  std::size_t point = 0;
  std::size_t scheme_index = 0;
};

// The per-scheme system actually simulated: noma forces one sub-message per
// device (and at most K groups).
SystemConfig scheme_system(const SystemConfig& point, Scheme scheme);

// One AO trial. Never throws for solver failures; those become a failed row.
ExperimentRecord run_trial(const SystemConfig& point, Scheme scheme, std::uint64_t seed);

// All (point x seed x scheme) trials on `parallelism` threads (0 = hardware
// concurrency), sorted by (point, seed, scheme).
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg, int parallelism);

inline constexpr const char* kCsvColumns[] = {"seed",      "snr_db",     "M",           "N",
                                              "K",         "I",          "L_groups",    "csit_mode",
                                              "scheme",    "iter_count", "r_min_final", "r_min_trace",
                                              "wall_time_ms", "status"};

// wall_time_ms stays blank unless `timing`, so output bytes depend only on
// the config and seeds.
void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool timing);

// Reads the config, runs it and writes the CSV. Returns the process exit code:
// 0 all trials ok, 1 some trial failed, 2 config error.
int run_command(const std::string& config_path, const std::string& out_path, int parallelism, bool timing,
                std::ostream& log);

// Preset experiment configs: fig5 (convergence), fig6 (RSMA/NOMA vs SNR and
// group count), fig7 (min-rate vs K), fig8 (min-rate vs N and M). `scale` is
// full or desk.
nlohmann::json preset(const std::string& name, const std::string& scale);

// gnuplot script plotting mean +- std of r_min_final over seeds, one series
// per scheme (split further by any other varying column).
std::string emit_plot_script(const std::string& csv_text, const std::string& title = "min rate");

}  // namespace rsma
