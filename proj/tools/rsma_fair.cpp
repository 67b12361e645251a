#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rsma/errors.hpp"
#include "rsma/harness.hpp"

namespace {

int write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << '\n';
    return 1;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-min fair IRS-aided uplink RSMA: experiment runner"};
  app.set_version_flag("--version", std::string("rsma_fair ") + RSMA_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  int parallel = 1;
  bool timing = false;
  CLI::App* run = app.add_subcommand("run", "Run every (sweep point, seed, scheme) trial of a config, write CSV");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_path, "Output CSV path")->required();
  run->add_option("--parallel", parallel, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  run->add_flag("--timing", timing, "Fill wall_time_ms (output is then no longer byte-reproducible)");

  std::string preset_name;
  std::string scale = "desk";
  std::string preset_out;
  CLI::App* preset = app.add_subcommand("preset", "Write a preset experiment config");
  preset->add_option("--name", preset_name, "fig5, fig6, fig7 or fig8")->required();
  preset->add_option("--scale", scale, "full or desk");
  preset->add_option("--out", preset_out, "Output config path")->required();

  std::string csv_path;
  std::string script_path;
  CLI::App* plot = app.add_subcommand("plot", "Emit a gnuplot script from a results CSV");
  plot->add_option("--csv", csv_path, "Results CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", script_path, "Output script path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return rsma::run_command(config_path, out_path, parallel, timing, std::cerr);
    if (*preset) return write_text(preset_out, rsma::preset(preset_name, scale).dump(2) + "\n");
    if (*plot) {
      std::ifstream in(csv_path);
      std::stringstream text;
      text << in.rdbuf();
      return write_text(script_path, rsma::emit_plot_script(text.str(), csv_path));
    }
  } catch (const rsma::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
