#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rsma/ao.hpp"
#include "rsma/errors.hpp"
#include "rsma/rates.hpp"

using namespace rsma;
using namespace rsma::test;

TEST_CASE("initial state") {
  const SystemConfig cfg = small_config(3, 2, 2, 2, 3);
  const ChannelSet ch = channels_for(cfg, 1);
  Rng rng(1);
  const SolutionState st = initial_state(cfg, CsiView::perfect(ch), rng);
  CHECK(st.partition == GroupPartition(2, 2, 3));
  CHECK((st.phases - CVec::Ones(3)).norm() == 0.0);
  CHECK((st.powers.matrix().array() == cfg.p_max_w / 2.0).all());
  CHECK(direction_distance(st.beam({1, 0}), ch.composite(1) * st.phases) < 1e-12);

  SystemConfig wrong = cfg;
  wrong.antennas = 4;
  CHECK_THROWS_AS(initial_state(wrong, CsiView::perfect(ch), rng), ValidationError);
}

TEST_CASE("AO traces are monotone and end feasible") {
  Rng rng(2);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const SystemConfig cfg = small_config(4, 4, 3, 2, 3);
    const ChannelSet ch = channels_for(cfg, seed);
    const AoResult r = run_ao(cfg, ch, CsitModel::perfect(ch), rng);
    REQUIRE(r.min_rate_trace.size() == static_cast<std::size_t>(r.iterations + 1));
    for (std::size_t t = 1; t < r.min_rate_trace.size(); ++t) {
      CHECK(r.min_rate_trace[t] >= r.min_rate_trace[t - 1] - 1e-9);
    }
    CHECK(r.min_rate_trace.back() == doctest::Approx(min_rate(r.state, CsiView::perfect(ch), cfg.noise_power())).epsilon(1e-12));
    CHECK(constraint_violation(r.state, cfg) <= 1e-8);
  }
}

TEST_CASE("single device reaches the determinant rate") {
  SystemConfig cfg = small_config(4, 3, 1, 2, 2);
  cfg.solver.kappa2 = 1e-8;
  cfg.solver.kappa1 = 1e-10;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ChannelSet ch = channels_for(cfg, seed);
    Rng rng(seed);
    const AoResult r = run_ao(cfg, ch, CsitModel::perfect(ch), rng);
    const double want = oracle::detrate(ch.composites(), r.state.phases, r.state.powers, cfg.noise_power());
    CHECK(r.min_rate_trace.back() == doctest::Approx(want).epsilon(1e-4));
  }
}

TEST_CASE("estimated mode without error reproduces the perfect run") {
  const SystemConfig cfg = small_config(4, 3, 3, 2, 3);
  const ChannelSet ch = channels_for(cfg, 3);
  CsitModel exact = estimated_csit(cfg, ch, 3);
  exact.estimated = ch.composites();
  for (CMat& phi : exact.error_cov) phi.setZero();
  Rng a(3);
  Rng b(3);
  const AoResult perfect = run_ao(cfg, ch, CsitModel::perfect(ch), a);
  const AoResult estimated = run_ao(cfg, ch, exact, b);
  REQUIRE(perfect.min_rate_trace.size() == estimated.min_rate_trace.size());
  for (std::size_t t = 0; t < perfect.min_rate_trace.size(); ++t) {
    CHECK(std::abs(perfect.min_rate_trace[t] - estimated.min_rate_trace[t]) <= 1e-9);
  }
}

TEST_CASE("robust AO is monotone in the lower bound") {
  const SystemConfig cfg = small_config(4, 3, 3, 2, 3);
  const ChannelSet ch = channels_for(cfg, 4);
  const CsitModel csit = estimated_csit(cfg, ch, 4);
  Rng rng(4);
  const AoResult r = run_ao(cfg, ch, csit, rng);
  for (std::size_t t = 1; t < r.min_rate_trace.size(); ++t) CHECK(r.min_rate_trace[t] >= r.min_rate_trace[t - 1] - 1e-9);
  CHECK(r.min_rate_trace.back() == doctest::Approx(min_rate(r.state, CsiView::estimated(csit), cfg.noise_power())).epsilon(1e-12));
}

TEST_CASE("AO from a given state never loses ground") {
  const SystemConfig cfg = small_config(4, 3, 3, 2, 3);
  const ChannelSet ch = channels_for(cfg, 5);
  Rng rng(5);
  const SolutionState start = random_state(cfg, rng);
  const AoResult r = run_ao_from(cfg, CsiView::perfect(ch), start);
  CHECK(r.min_rate_trace.front() == doctest::Approx(min_rate(start, CsiView::perfect(ch), cfg.noise_power())));
  CHECK(r.min_rate_trace.back() >= r.min_rate_trace.front());
}

TEST_CASE("beam scaling meets the receive power bound without changing rates") {
  const SystemConfig cfg = small_config(4, 3, 3, 2, 3);
  const ChannelSet ch = channels_for(cfg, 6);
  Rng rng(6);
  SolutionState st = random_state(cfg, rng);
  const Eigen::VectorXd before = subrates(st, CsiView::perfect(ch), cfg.noise_power());
  st.beams = scaled_beams(st, cfg.p_max_b_w);
  for (int k = 0; k < cfg.devices; ++k) {
    const double total = st.beam({k, 0}).squaredNorm() + st.beam({k, 1}).squaredNorm();
    CHECK(total == doctest::Approx(cfg.p_max_b_w));
  }
  CHECK((subrates(st, CsiView::perfect(ch), cfg.noise_power()) - before).norm() < 1e-10);
}

TEST_CASE("constraint violation flags broken states") {
  const SystemConfig cfg = small_config(3, 2, 2, 2, 2);
  Rng rng(7);
  SolutionState st = random_state(cfg, rng);
  CHECK(constraint_violation(st, cfg) <= 1e-12);
  st.powers({0, 0}) = 2.0 * cfg.p_max_w;
  CHECK(constraint_violation(st, cfg) > 0.5);
  st = random_state(cfg, rng);
  st.phases(0) *= 1.1;
  CHECK(constraint_violation(st, cfg) == doctest::Approx(0.1));
}

TEST_CASE("stage failures name the stage") {
  const StageError e("phase", "boom");
  CHECK(e.stage() == "phase");
  CHECK(std::string(e.what()) == "phase: boom");
}
