#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "rsma/harness.hpp"

using namespace rsma;

namespace {

const char* kSmall = R"({
  "system": {"antennas": 3, "irs_elements": 2, "devices": 2, "sub_messages": 2, "groups": 2},
  "solver": {"ao_max_iters": 3},
  "sweep": {"snr_db": [0, 10]},
  "schemes": ["proposed", "noma"],
  "seeds": {"start": 1, "count": 3}
})";

std::string csv_of(const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  write_csv(out, records, false);
  return out.str();
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

std::string header() {
  std::string h;
  for (const char* c : kCsvColumns) h += std::string(h.empty() ? "" : ",") + c;
  return h + "\n";
}

}  // namespace

TEST_CASE("cardinality and ordering of trials") {
  const ExperimentConfig cfg = parse_experiment(kSmall);
  CHECK(cfg.points.size() == 2);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
  const std::vector<ExperimentRecord> rows = run_experiment(cfg, 1);
  REQUIRE(rows.size() == 12);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto key = [](const ExperimentRecord& r) { return std::tuple(r.point, r.seed, r.scheme_index); };
    CHECK(key(rows[i - 1]) < key(rows[i]));
  }
  for (const ExperimentRecord& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.r_min_final == r.r_min_trace.back());
    for (std::size_t t = 1; t < r.r_min_trace.size(); ++t) CHECK(r.r_min_trace[t] >= r.r_min_trace[t - 1] - 1e-9);
    if (r.scheme == Scheme::kNoma) CHECK(r.sub_messages == 1);
    else CHECK(r.sub_messages == 2);
  }
  const std::string csv = csv_of(rows);
  CHECK(csv.rfind(header(), 0) == 0);
  CHECK(count(csv, "\n") == 13);
}

TEST_CASE("identical config and seeds give identical bytes") {
  const ExperimentConfig cfg = parse_experiment(kSmall);
  const std::string serial = csv_of(run_experiment(cfg, 1));
  CHECK(serial == csv_of(run_experiment(cfg, 1)));
  CHECK(serial == csv_of(run_experiment(cfg, 3)));
}

TEST_CASE("noma keeps the group count within the device count") {
  SystemConfig point;
  point.devices = 3;
  point.sub_messages = 2;
  point.groups = 5;
  const SystemConfig noma = scheme_system(point, Scheme::kNoma);
  CHECK(noma.sub_messages == 1);
  CHECK(noma.groups == 3);
  CHECK(scheme_system(point, Scheme::kNoIrs).sub_messages == 2);
}

TEST_CASE("scheme names") {
  for (Scheme s : {Scheme::kProposed, Scheme::kNoIrs, Scheme::kNoma}) CHECK(scheme_from_string(to_string(s)) == s);
  CHECK_THROWS(scheme_from_string("oma"));
  CHECK_THROWS_AS(parse_experiment(R"({"schemes": ["oma"]})"), ConfigError);
}

TEST_CASE("config errors carry a location") {
  const std::string bad = "{\n  \"system\": {\"antennas\": 2, \"bogus\": 1}\n}";
  try {
    parse_experiment(bad, "x.json");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("x.json:2:") == 0);
    CHECK(what.find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_experiment("{\"extra\": 1}"), ConfigError);
  CHECK_THROWS_AS(parse_experiment("{\"seeds\": [1, 1]}"), ConfigError);
  CHECK_THROWS_AS(parse_experiment("{\"system\": {\"devices\": 0}}"), ConfigError);
  CHECK_THROWS_AS(parse_experiment("{\"system\": "), ConfigError);
  CHECK_THROWS_AS(parse_experiment("{\"sweep\": {\"snr_db\": 3}}"), ConfigError);
}

TEST_CASE("sweep given as a list of overrides") {
  const ExperimentConfig cfg = parse_experiment(R"({"sweep": [{"devices": 2}, {"devices": 3, "snr_db": 5}]})");
  REQUIRE(cfg.points.size() == 2);
  CHECK(cfg.points[1].devices == 3);
  CHECK(cfg.points[1].snr_db == 5.0);
  CHECK(cfg.schemes == std::vector<Scheme>{Scheme::kProposed});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
}

TEST_CASE("solver failures become failed rows") {
  SystemConfig point;
  point.antennas = 2;
  point.irs_elements = 2;
  point.devices = 2;
  point.groups = 2;
  point.solver.covariance_samples = 10;  // below the estimator minimum
  point.csit_mode = CsitMode::kEstimated;
  const ExperimentRecord r = run_trial(point, Scheme::kProposed, 1);
  CHECK(r.status.rfind("failed:", 0) == 0);
  const std::string csv = csv_of({r});
  CHECK(csv.find(",,") != std::string::npos);
}

TEST_CASE("presets") {
  for (const char* name : {"fig5", "fig6", "fig7", "fig8"}) {
    for (const char* scale : {"full", "desk"}) {
      const nlohmann::json j = preset(name, scale);
      CHECK_NOTHROW(parse_experiment(j.dump()));
    }
  }
  const ExperimentConfig fig5 = parse_experiment(preset("fig5", "full").dump());
  std::vector<std::tuple<int, int, int>> mkn;
  for (const SystemConfig& p : fig5.points) mkn.emplace_back(p.antennas, p.devices, p.irs_elements);
  CHECK(mkn == std::vector<std::tuple<int, int, int>>{{8, 12, 16}, {16, 12, 16}, {16, 16, 16}});

  const ExperimentConfig fig8 = parse_experiment(preset("fig8", "desk").dump());
  std::set<int> n_values;
  std::set<int> m_values;
  for (const SystemConfig& p : fig8.points) {
    n_values.insert(p.irs_elements);
    m_values.insert(p.antennas);
  }
  CHECK(n_values == std::set<int>{2, 4, 8});
  CHECK(m_values == std::set<int>{4, 8});
  CHECK_THROWS_AS(preset("fig9", "desk"), ConfigError);
  CHECK_THROWS_AS(preset("fig5", "huge"), ConfigError);
}

TEST_CASE("plot script series") {
  const ExperimentConfig cfg = parse_experiment(kSmall);
  const std::vector<ExperimentRecord> rows = run_experiment(cfg, 1);
  const std::string two = emit_plot_script(csv_of(rows));
  CHECK(count(two, "<< EOD") == 2);
  CHECK(two.find("title 'proposed'") != std::string::npos);
  CHECK(two.find("title 'noma'") != std::string::npos);

  std::vector<ExperimentRecord> one;
  for (const ExperimentRecord& r : rows)
    if (r.scheme == Scheme::kProposed) one.push_back(r);
  CHECK(count(emit_plot_script(csv_of(one)), "<< EOD") == 1);

  std::vector<ExperimentRecord> three = rows;
  for (ExperimentRecord r : one) {
    r.scheme = Scheme::kNoIrs;
    r.scheme_index = 2;
    three.push_back(r);
  }
  const std::string script = emit_plot_script(csv_of(three));
  CHECK(count(script, "<< EOD") == 3);
  CHECK(script.find("title 'no_irs'") != std::string::npos);

  CHECK_THROWS(emit_plot_script(header()));
  CHECK_THROWS(emit_plot_script(""));
  CHECK_THROWS(emit_plot_script("seed,scheme\n1,proposed\n"));
}

TEST_CASE("run command exit codes") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "rsma_harness_test";
  std::filesystem::create_directories(dir);
  const std::string good = (dir / "good.json").string();
  const std::string bad = (dir / "bad.json").string();
  const std::string out = (dir / "out.csv").string();
  std::ofstream(good) << R"({"system": {"antennas": 2, "irs_elements": 2, "devices": 2, "groups": 2}, "solver": {"ao_max_iters": 2}})";
  std::ofstream(bad) << R"({"system": {"antennas": -1}})";
  std::ostringstream log;
  CHECK(run_command(good, out, 1, false, log) == 0);
  std::ifstream written(out);
  std::stringstream text;
  text << written.rdbuf();
  CHECK(text.str().rfind(header(), 0) == 0);
  CHECK(run_command(bad, out, 1, false, log) == 2);
  CHECK(run_command((dir / "missing.json").string(), out, 1, false, log) == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("timing column is filled only on request") {
  const ExperimentConfig cfg = parse_experiment(R"({"system": {"antennas": 2, "irs_elements": 2, "devices": 2, "groups": 2}})");
  const std::vector<ExperimentRecord> rows = run_experiment(cfg, 1);
  std::ostringstream timed;
  write_csv(timed, rows, true);
  CHECK(std::regex_search(timed.str(), std::regex(",[0-9.e+-]+,ok\n")));
  CHECK(std::regex_search(csv_of(rows), std::regex(",,ok\n")));
}
