#include "rsma/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "rsma/ao.hpp"
#include "rsma/channel.hpp"
#include "rsma/errors.hpp"
#include "rsma/rng.hpp"

namespace rsma {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// 1-based line and column of byte offset `pos`.
std::string position(const std::string& text, std::size_t pos) {
  pos = std::min(pos, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < pos; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

// Position of the first occurrence of "key" at or after `from`, as a fallback
// anchor for semantic errors that the JSON parser cannot locate.
std::string key_position(const std::string& text, const std::string& key, std::size_t from = 0) {
  const std::size_t at = text.find('"' + key + '"', from);
  return position(text, at == std::string::npos ? 0 : at);
}

class Located {
 public:
  Located(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what, std::size_t from = 0) const {
    throw ConfigError(source_ + ":" + key_position(text_, key, from) + ": " + what);
  }

  std::size_t offset_of(const std::string& key) const {
    const std::size_t at = text_.find('"' + key + '"');
    return at == std::string::npos ? 0 : at;
  }

 private:
  const std::string& text_;
  std::string source_;
};

nlohmann::json plain(const ordered_json& j) { return nlohmann::json::parse(j.dump()); }

std::vector<ordered_json> sweep_points(const ordered_json& sweep, const Located& loc) {
  std::vector<ordered_json> points;
  if (sweep.is_null()) return {ordered_json::object()};
  if (sweep.is_array()) {
    for (const ordered_json& p : sweep) {
      if (!p.is_object()) loc.fail("sweep", "sweep array entries must be objects");
      points.push_back(p);
    }
    if (points.empty()) loc.fail("sweep", "sweep array must not be empty");
    return points;
  }
  if (!sweep.is_object()) loc.fail("sweep", "sweep must be an object of arrays or an array of objects");
  points.push_back(ordered_json::object());
  for (const auto& [key, values] : sweep.items()) {
    if (!values.is_array() || values.empty()) loc.fail(key, "sweep axis '" + key + "' must be a non-empty array",
                                                       loc.offset_of("sweep"));
    std::vector<ordered_json> next;
    for (const ordered_json& base : points) {
      for (const ordered_json& v : values) {
        ordered_json p = base;
        p[key] = v;
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::vector<std::uint64_t> parse_seeds(const ordered_json& j, const Located& loc) {
  std::vector<std::uint64_t> seeds;
  try {
    if (j.is_null()) {
      seeds.push_back(1);
    } else if (j.is_array()) {
      for (const ordered_json& s : j) seeds.push_back(s.get<std::uint64_t>());
    } else if (j.is_object()) {
      for (const auto& [key, value] : j.items()) {
        if (key != "start" && key != "count") loc.fail(key, "unknown seeds key '" + key + "'", loc.offset_of("seeds"));
      }
      const auto start = j.at("start").get<std::uint64_t>();
      const auto count = j.at("count").get<std::uint64_t>();
      for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(start + i);
    } else {
      loc.fail("seeds", "seeds must be a list or {\"start\", \"count\"}");
    }
  } catch (const nlohmann::json::exception& e) {
    loc.fail("seeds", std::string("bad seeds: ") + e.what());
  }
  if (seeds.empty()) loc.fail("seeds", "at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    loc.fail("seeds", "seeds must be distinct");
  }
  return seeds;
}

template <typename Body>
auto timed(Body&& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// Zeroes the rows and columns of a stacked covariance that belong to IRS
// entries, matching a channel set without reflected paths.
CMat drop_irs_entries(CMat sigma, int antennas, int irs_elements) {
  const int width = irs_elements + 1;
  for (int m = 0; m < antennas; ++m) {
    for (int c = 0; c < irs_elements; ++c) {
      const Eigen::Index idx = m * width + c;
      sigma.row(idx).setZero();
      sigma.col(idx).setZero();
    }
  }
  return sigma;
}

}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kProposed: return "proposed";
    case Scheme::kNoIrs: return "no_irs";
    case Scheme::kNoma: return "noma";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& text) {
  if (text == "proposed") return Scheme::kProposed;
  if (text == "no_irs") return Scheme::kNoIrs;
  if (text == "noma") return Scheme::kNoma;
  throw ValidationError("unknown scheme '" + text + "' (expected proposed, no_irs or noma)");
}

ExperimentConfig parse_experiment(const std::string& text, const std::string& source) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ":" + position(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON: " + e.what());
  }
  const Located loc(text, source);
  if (!root.is_object()) throw ConfigError(source + ":1:1: config must be a JSON object");
  for (const auto& [key, value] : root.items()) {
    if (key != "system" && key != "solver" && key != "sweep" && key != "schemes" && key != "seeds") {
      loc.fail(key, "unknown top-level key '" + key + "'");
    }
  }

  SystemConfig base;
  auto section = [&](const char* name, auto&& apply) {
    if (!root.contains(name)) return;
    const ordered_json& j = root.at(name);
    if (!j.is_object()) loc.fail(name, std::string(name) + " must be an object");
    for (const auto& [key, value] : j.items()) {
      try {
        apply(nlohmann::json{{key, plain(value)}});
      } catch (const ValidationError& e) {
        loc.fail(key, e.what(), loc.offset_of(name));
      }
    }
  };
  section("system", [&](const nlohmann::json& j) { apply_system_json(base, j); });
  section("solver", [&](const nlohmann::json& j) { apply_solver_json(base.solver, j); });

  ExperimentConfig out;
  const ordered_json sweep = root.contains("sweep") ? root.at("sweep") : ordered_json();
  const std::size_t sweep_at = loc.offset_of("sweep");
  for (const ordered_json& p : sweep_points(sweep, loc)) {
    SystemConfig cfg = base;
    for (const auto& [key, value] : p.items()) {
      try {
        apply_system_json(cfg, nlohmann::json{{key, plain(value)}});
      } catch (const ValidationError& e) {
        loc.fail(key, e.what(), sweep_at);
      }
    }
    try {
      validate(cfg);
    } catch (const ValidationError& e) {
      loc.fail(p.empty() ? "system" : p.begin().key(), std::string(e.what()) + " at sweep point " + p.dump(),
               p.empty() ? 0 : sweep_at);
    }
    out.points.push_back(cfg);
  }

  if (root.contains("schemes")) {
    const ordered_json& s = root.at("schemes");
    if (!s.is_array() || s.empty()) loc.fail("schemes", "schemes must be a non-empty list");
    for (const ordered_json& name : s) {
      try {
        out.schemes.push_back(scheme_from_string(name.get<std::string>()));
      } catch (const std::exception& e) {
        loc.fail("schemes", e.what());
      }
    }
    if (std::set<Scheme>(out.schemes.begin(), out.schemes.end()).size() != out.schemes.size()) {
      loc.fail("schemes", "schemes must be distinct");
    }
  } else {
    out.schemes.push_back(Scheme::kProposed);
  }
  out.seeds = parse_seeds(root.contains("seeds") ? root.at("seeds") : ordered_json(), loc);
  return out;
}

SystemConfig scheme_system(const SystemConfig& point, Scheme scheme) {
  SystemConfig cfg = point;
  if (scheme == Scheme::kNoma) {
    cfg.sub_messages = 1;
    cfg.groups = std::min(cfg.groups, cfg.devices);
  }
  return cfg;
}

ExperimentRecord run_trial(const SystemConfig& point, Scheme scheme, std::uint64_t seed) {
  SystemConfig cfg = scheme_system(point, scheme);
  cfg.seed = seed;
  ExperimentRecord rec;
  rec.seed = seed;
  rec.snr_db = cfg.snr_db;
  rec.antennas = cfg.antennas;
  rec.irs_elements = cfg.irs_elements;
  rec.devices = cfg.devices;
  rec.sub_messages = cfg.sub_messages;
  rec.groups = cfg.groups;
  rec.csit_mode = cfg.csit_mode;
  rec.scheme = scheme;

  try {
    rec.wall_time_ms = timed([&] {
      validate(cfg);
      // Channels depend only on the seed and dimensions, so every scheme and
      // SNR point of one seed sees the same realization.
      Rng channel_rng = Rng::for_stream(seed, Stream::kChannel);
      ChannelSet channels = sample_channels(cfg, channel_rng);
      if (scheme == Scheme::kNoIrs) channels = channels.without_irs();

      CsitModel csit = CsitModel::perfect(channels);
      if (cfg.csit_mode == CsitMode::kEstimated) {
        std::vector<CMat> sigma;
        for (int k = 0; k < cfg.devices; ++k) {
          Rng cov_rng = Rng::for_stream(seed, Stream::kCovariance, static_cast<std::uint64_t>(k));
          CMat s = estimate_sigma(cfg, k, cov_rng, cfg.solver.covariance_samples);
          if (scheme == Scheme::kNoIrs) s = drop_irs_entries(std::move(s), cfg.antennas, cfg.irs_elements);
          sigma.push_back(std::move(s));
        }
        Rng error_rng = Rng::for_stream(seed, Stream::kCsitError);
        csit = build_csit(cfg, channels, sigma, error_rng);
      }

      Rng solver_rng = Rng::for_stream(seed, Stream::kSolver);
      const AoResult ao = run_ao(cfg, channels, csit, solver_rng);
      rec.iter_count = ao.iterations;
      rec.r_min_trace = ao.min_rate_trace;
      rec.r_min_final = ao.min_rate_trace.back();
      if (constraint_violation(ao.state, cfg) > 1e-8) {
        rec.status = "infeasible";
        rec.error = "final state violates a constraint";
      }
    });
  } catch (const StageError& e) {
    rec.status = "failed:" + e.stage();
    rec.error = e.what();
  } catch (const std::exception& e) {
    rec.status = "failed:setup";
    rec.error = e.what();
  }
  return rec;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg, int parallelism) {
  struct Task {
    std::size_t point;
    std::uint64_t seed;
    std::size_t scheme;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < cfg.points.size(); ++p) {
    for (std::uint64_t seed : cfg.seeds) {
      for (std::size_t s = 0; s < cfg.schemes.size(); ++s) tasks.push_back({p, seed, s});
    }
  }

  std::vector<ExperimentRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      ExperimentRecord rec = run_trial(cfg.points[t.point], cfg.schemes[t.scheme], t.seed);
      rec.point = t.point;
      rec.scheme_index = t.scheme;
      records[i] = std::move(rec);
    }
  };

  unsigned threads = parallelism > 0 ? static_cast<unsigned>(parallelism) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  std::stable_sort(records.begin(), records.end(), [](const ExperimentRecord& a, const ExperimentRecord& b) {
    return std::tie(a.point, a.seed, a.scheme_index) < std::tie(b.point, b.seed, b.scheme_index);
  });
  return records;
}

void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool timing) {
  bool first = true;
  for (const char* column : kCsvColumns) {
    out << (first ? "" : ",") << column;
    first = false;
  }
  out << '\n';
  for (const ExperimentRecord& r : records) {
    const bool ok = r.status == "ok" || r.status == "infeasible";
    std::string trace;
    for (std::size_t i = 0; i < r.r_min_trace.size(); ++i) trace += (i ? ";" : "") + format_g(r.r_min_trace[i]);
    out << r.seed << ',' << format_g(r.snr_db) << ',' << r.antennas << ',' << r.irs_elements << ',' << r.devices
        << ',' << r.sub_messages << ',' << r.groups << ',' << to_string(r.csit_mode) << ',' << to_string(r.scheme)
        << ',' << r.iter_count << ',' << (ok ? format_g(r.r_min_final) : "") << ',' << trace << ','
        << (timing ? format_g(r.wall_time_ms) : "") << ',' << r.status << '\n';
  }
}

int run_command(const std::string& config_path, const std::string& out_path, int parallelism, bool timing,
                std::ostream& log) {
  ExperimentConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError(config_path + ": cannot open config file");
    std::stringstream text;
    text << in.rdbuf();
    cfg = parse_experiment(text.str(), config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }

  const std::vector<ExperimentRecord> records = run_experiment(cfg, parallelism);
  std::ofstream out(out_path);
  if (!out) {
    log << "error: cannot write " << out_path << '\n';
    return 1;
  }
  write_csv(out, records, timing);

  int failed = 0;
  for (const ExperimentRecord& r : records) {
    if (r.status == "ok") continue;
    ++failed;
    log << "trial seed=" << r.seed << " scheme=" << to_string(r.scheme) << " point=" << r.point << ": " << r.status
        << ": " << r.error << '\n';
  }
  log << records.size() << " trials, " << failed << " failed\n";
  return failed > 0 ? 1 : 0;
}

nlohmann::json preset(const std::string& name, const std::string& scale) {
  if (scale != "full" && scale != "desk") throw ConfigError("unknown preset scale '" + scale + "' (full or desk)");
  const bool full = scale == "full";
  const nlohmann::json seeds = {{"start", 1}, {"count", full ? 100 : 20}};
  nlohmann::json j;
  if (name == "fig5") {
    // Convergence traces for three (M, K, N) settings.
    const std::vector<std::array<int, 3>> mkn =
        full ? std::vector<std::array<int, 3>>{{8, 12, 16}, {16, 12, 16}, {16, 16, 16}}
             : std::vector<std::array<int, 3>>{{4, 6, 8}, {8, 6, 8}, {8, 8, 8}};
    nlohmann::json points = nlohmann::json::array();
    for (const auto& [m, k, n] : mkn) points.push_back({{"antennas", m}, {"devices", k}, {"irs_elements", n}});
    j = {{"system", {{"snr_db", 10.0}, {"groups", 4}, {"sub_messages", 2}, {"csit_mode", "perfect"}}},
         {"sweep", points},
         {"schemes", {"proposed"}}};
  } else if (name == "fig6") {
    // RSMA (I = 2) against NOMA (I = 1) over SNR for several group counts.
    j = {{"system",
          {{"antennas", full ? 16 : 8}, {"irs_elements", full ? 16 : 8}, {"devices", full ? 12 : 6},
           {"sub_messages", 2}, {"csit_mode", "perfect"}}},
         {"sweep", {{"groups", {1, 2, 4}}, {"snr_db", {0, 5, 10, 15, 20}}}},
         {"schemes", {"proposed", "noma"}}};
  } else if (name == "fig7") {
    // Min-rate against the number of devices, perfect and estimated CSIT.
    j = {{"system", {{"antennas", full ? 16 : 8}, {"snr_db", 10.0}, {"sub_messages", 2}}},
         {"sweep",
          {{"irs_elements", full ? nlohmann::json{8, 16} : nlohmann::json{4, 8}},
           {"groups", {2, 4}},
           {"csit_mode", {"perfect", "estimated"}},
           {"devices", full ? nlohmann::json{4, 8, 12, 16} : nlohmann::json{2, 4, 6, 8}}}},
         {"schemes", {"proposed"}}};
  } else if (name == "fig8") {
    // Min-rate against N for several M.
    j = {{"system", {{"devices", full ? 12 : 6}, {"snr_db", 10.0}, {"groups", 4}, {"sub_messages", 2}}},
         {"sweep",
          {{"antennas", full ? nlohmann::json{8, 16, 24} : nlohmann::json{4, 8}},
           {"csit_mode", {"perfect", "estimated"}},
           {"irs_elements", full ? nlohmann::json{4, 8, 12, 16, 20, 24} : nlohmann::json{2, 4, 8}}}},
         {"schemes", {"proposed"}}};
  } else {
    throw ConfigError("unknown preset '" + name + "' (fig5, fig6, fig7 or fig8)");
  }
  j["seeds"] = seeds;
  return j;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string emit_plot_script(const std::string& csv_text, const std::string& title) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("plot: CSV is empty");
  const std::vector<std::string> header = split(line, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  std::string missing;
  for (const char* c : kCsvColumns) {
    if (!col.count(c)) missing += std::string(missing.empty() ? "" : ", ") + c;
  }
  if (!missing.empty()) throw ValidationError("plot: CSV is missing columns: " + missing);

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size()) throw ValidationError("plot: row with wrong number of cells: " + line);
    if (cells[col["r_min_final"]].empty()) continue;  // failed trial
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw ValidationError("plot: CSV has no successful data rows");

  // The x axis is the first numeric sweep column that varies; other varying
  // columns split the series.
  const std::vector<std::string> axes = {"snr_db", "N", "M", "K", "L_groups", "I", "csit_mode"};
  auto varies = [&](const std::string& c) {
    std::set<std::string> seen;
    for (const auto& r : rows) seen.insert(r[col[c]]);
    return seen.size() > 1;
  };
  std::string x_axis = "snr_db";
  for (const char* a : {"snr_db", "N", "M", "K", "L_groups"}) {
    if (varies(a)) {
      x_axis = a;
      break;
    }
  }
  // Columns fixed by the scheme (noma forces I) do not split a series.
  auto varies_within_scheme = [&](const std::string& c) {
    std::map<std::string, std::set<std::string>> seen;
    for (const auto& r : rows) seen[r[col["scheme"]]].insert(r[col[c]]);
    return std::any_of(seen.begin(), seen.end(), [](const auto& kv) { return kv.second.size() > 1; });
  };
  std::vector<std::string> splitters;
  for (const std::string& a : axes) {
    if (a != x_axis && varies_within_scheme(a)) splitters.push_back(a);
  }

  // series label -> x -> samples
  std::map<std::string, std::map<double, std::vector<double>>> series;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    std::string label = r[col["scheme"]];
    std::string extra;
    for (const std::string& s : splitters) extra += (extra.empty() ? "" : ", ") + s + "=" + r[col[s]];
    if (!extra.empty()) label += " (" + extra + ")";
    if (!series.count(label)) order.push_back(label);
    series[label][std::stod(r[col[x_axis]])].push_back(std::stod(r[col["r_min_final"]]));
  }

  std::ostringstream out;
  out << "# mean +- std of r_min_final over seeds\n";
  out << "set terminal pngcairo size 900,600\n";
  out << "set output 'min_rate.png'\n";
  out << "set title '" << title << "'\n";
  out << "set xlabel '" << x_axis << "'\n";
  out << "set ylabel 'minimum rate (bits/s/Hz)'\n";
  out << "set key outside right\n";
  out << "set grid\n";
  for (std::size_t s = 0; s < order.size(); ++s) {
    out << "$series" << s << " << EOD\n";
    for (const auto& [x, samples] : series[order[s]]) {
      double mean = 0.0;
      for (double v : samples) mean += v;
      mean /= static_cast<double>(samples.size());
      double var = 0.0;
      for (double v : samples) var += (v - mean) * (v - mean);
      const double sd = samples.size() > 1 ? std::sqrt(var / static_cast<double>(samples.size() - 1)) : 0.0;
      out << format_g(x) << ' ' << format_g(mean) << ' ' << format_g(sd) << '\n';
    }
    out << "EOD\n";
  }
  out << "plot \\\n";
  for (std::size_t s = 0; s < order.size(); ++s) {
    out << "  $series" << s << " using 1:2:3 with yerrorlines title '" << order[s] << "'"
        << (s + 1 < order.size() ? ", \\\n" : "\n");
  }
  return out.str();
}

}  // namespace rsma
