#include <doctest.h>

#include <numbers>

#include "fixtures.hpp"
#include "rsma/channel.hpp"
#include "rsma/errors.hpp"

using namespace rsma;
using rsma::test::channels_for;
using rsma::test::random_phases;
using rsma::test::small_config;

TEST_CASE("zero-phase single path gives an all-ones matrix") {
  const PathSet one{Path{1.0, 0.0, 0.0, 0.0}};
  const CMat h = synthesize_matrix(one, 4, 3, 10e6);
  CHECK((h - CMat::Ones(4, 3)).norm() < 1e-14);
  CHECK((steering_vector(5, 0.0) - CVec::Ones(5)).norm() < 1e-14);
}

TEST_CASE("steering vector convention") {
  const CVec a = steering_vector(3, 0.25);
  CHECK(std::abs(a(1) - std::polar(1.0, -std::numbers::pi / 2.0)) < 1e-14);
}

TEST_CASE("direct-link entry variance matches the mean path count") {
  SystemConfig cfg = small_config(2, 1, 1, 1, 1);
  Rng rng(21);
  const int draws = 10000;
  double acc = 0.0;
  for (int t = 0; t < draws; ++t) acc += std::norm(synthesize_vector(sample_paths(cfg, rng), 2, cfg.bandwidth_hz)(1));
  CHECK(acc / draws == doctest::Approx(12.0).epsilon(0.05));
}

TEST_CASE("sampled delays stay within one symbol period") {
  SystemConfig cfg = small_config(2, 2, 1, 1, 1);
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const PathSet paths = sample_paths(cfg, rng);
    CHECK(paths.size() >= 8);
    CHECK(paths.size() <= 16);
    for (const Path& p : paths) {
      CHECK(p.delay_s >= 0.0);
      CHECK(p.delay_s < 1e-7);
      CHECK(std::abs(p.angle_rx) <= 0.5);
    }
  }
}

TEST_CASE("effective vector matches the explicit reflection form") {
  const SystemConfig cfg = small_config(4, 6, 3, 2, 2);
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const ChannelSet ch = channels_for(cfg, static_cast<std::uint64_t>(t + 1));
    const CVec v = random_phases(cfg.irs_elements, rng);
    for (int k = 0; k < cfg.devices; ++k) {
      const CVec theta_form = ch.irs_to_bs() * v.head(cfg.irs_elements).asDiagonal() * ch.device_to_irs(k) + ch.device_to_bs(k);
      CHECK((effective_vector(ch.composite(k), v) - theta_form).norm() < 1e-12 * (1.0 + theta_form.norm()));
    }
  }
}

TEST_CASE("all-ones phases and missing IRS link") {
  const SystemConfig cfg = small_config(3, 4, 2, 1, 1);
  const ChannelSet ch = channels_for(cfg, 3);
  const CVec ones = CVec::Ones(5);
  const CVec want = ch.irs_to_bs() * ch.device_to_irs(0) + ch.device_to_bs(0);
  CHECK((effective_vector(ch.composite(0), ones) - want).norm() < 1e-12 * want.norm());

  const ChannelSet bare = ch.without_irs();
  Rng rng(1);
  const CVec v = random_phases(4, rng);
  CHECK((effective_vector(bare.composite(1), v) - ch.device_to_bs(1)).norm() < 1e-14);
}

TEST_CASE("phase vectors are checked") {
  CVec v = CVec::Ones(3);
  CHECK_NOTHROW(check_phases(v, 2));
  CHECK_THROWS_AS(check_phases(v, 3), ValidationError);
  v(0) = 0.5;
  CHECK_THROWS_AS(check_phases(v, 2), ValidationError);
  v(0) = 1.0;
  v(2) = std::polar(1.0, 0.3);
  CHECK_THROWS_AS(check_phases(v, 2), ValidationError);
}

TEST_CASE("lifted forms reproduce the scalar gain") {
  const SystemConfig cfg = small_config(4, 3, 2, 1, 1);
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const ChannelSet ch = channels_for(cfg, static_cast<std::uint64_t>(100 + t));
    const CVec v = random_phases(3, rng);
    const CVec g = rsma::test::random_unit(4, rng);
    const LiftedForms lf = lift_stack(ch.composite(0), g, v);
    const cdouble direct = g.dot(ch.composite(0) * v);
    CHECK(std::abs(g.dot(lf.phase_blocks * lf.stacked) - direct) < 1e-12 * (1.0 + std::abs(direct)));
    // Trace form against |g^H H v|^2 with V = v v^H.
    const CVec b = lf.beam_blocks * lf.stacked.conjugate();
    const CMat vv = v * v.adjoint();
    const double trace_form = (b * b.adjoint() * vv).trace().real();
    CHECK(trace_form == doctest::Approx(std::norm(direct)).epsilon(1e-10));
  }
}

TEST_CASE("lifted forms with one antenna") {
  const SystemConfig cfg = small_config(1, 3, 1, 1, 1);
  const ChannelSet ch = channels_for(cfg, 5);
  Rng rng(2);
  const CVec v = random_phases(3, rng);
  CVec g(1);
  g(0) = 1.0;
  const LiftedForms lf = lift_stack(ch.composite(0), g, v);
  CHECK((lf.phase_blocks.row(0).transpose() - v).norm() < 1e-14);
  CHECK((lf.stacked - ch.composite(0).row(0).transpose()).norm() < 1e-14);
}

TEST_CASE("row stacking round trip") {
  const SystemConfig cfg = small_config(3, 2, 1, 1, 1);
  const ChannelSet ch = channels_for(cfg, 9);
  const CMat& h = ch.composite(0);
  const CVec s = stack_rows(h);
  CHECK(s(1 * 3 + 2) == h(1, 2));
  CHECK((unstack_rows(s, 3, 3) - h).norm() == 0.0);
}

TEST_CASE("channel covariance estimates") {
  SystemConfig cfg = small_config(2, 2, 1, 1, 1);
  CHECK_THROWS_AS([&] { Rng r(1); estimate_sigma(cfg, 0, r, 50); }(), ValidationError);

  Rng a(31);
  Rng b(32);
  const CMat s1 = estimate_sigma(cfg, 0, a, 10000);
  const CMat s2 = estimate_sigma(cfg, 0, b, 10000);
  CHECK((s1 - s2).norm() / s1.norm() < 0.1);
  CHECK(is_hermitian(s1, 1e-9));
  // Direct-link entries carry 12 per antenna, IRS entries 12*12 per element.
  const double want = 2.0 * (2.0 * 12.0 * 12.0 + 12.0);
  CHECK(s1.trace().real() == doctest::Approx(want).epsilon(0.1));
}

TEST_CASE("error covariance bounds and limits") {
  SystemConfig cfg = small_config(2, 2, 2, 1, 1);
  Rng rng(4);
  const CMat sigma = estimate_sigma(cfg, 0, rng, 400);
  const CMat phi = error_covariance(sigma, cfg.noise_power(), 100, cfg.p_max_w);
  CHECK(hermitian_eig(phi).values.minCoeff() >= -1e-9);
  CHECK(hermitian_eig(sigma - phi).values.minCoeff() >= -1e-9 * sigma.norm());
  const CMat tiny = error_covariance(sigma, cfg.noise_power(), 1'000'000'000, cfg.p_max_w * 1e3);
  CHECK(tiny.norm() < 1e-6 * sigma.norm());
}

TEST_CASE("perfect CSIT model") {
  const SystemConfig cfg = small_config(3, 2, 2, 1, 1);
  const ChannelSet ch = channels_for(cfg, 8);
  const CsitModel m = CsitModel::perfect(ch);
  for (int k = 0; k < 2; ++k) {
    CHECK((m.estimated[k] - ch.composite(k)).norm() == 0.0);
    CHECK(m.error_cov[k].norm() == 0.0);
  }
  CHECK_FALSE(CsiView::select(ch, m).robust());
}

TEST_CASE("estimated CSIT model") {
  const SystemConfig cfg = small_config(3, 2, 2, 1, 1);
  const ChannelSet ch = channels_for(cfg, 8);
  const CsitModel m = rsma::test::estimated_csit(cfg, ch, 8);
  CHECK(m.mode == CsitMode::kEstimated);
  CHECK(CsiView::select(ch, m).robust());
  for (int k = 0; k < 2; ++k) {
    CHECK(m.error_cov[k].rows() == 9);
    CHECK(hermitian_eig(m.error_cov[k]).values.minCoeff() >= -1e-9);
    CHECK((m.estimated[k] - ch.composite(k)).norm() > 0.0);
  }
}

TEST_CASE("channels JSON round trip") {
  const SystemConfig cfg = small_config(2, 3, 2, 1, 1);
  const ChannelSet ch = channels_for(cfg, 4);
  const ChannelSet back = channels_from_json(channels_to_json(ch));
  for (int k = 0; k < 2; ++k) CHECK((back.composite(k) - ch.composite(k)).norm() == 0.0);
}

TEST_CASE("channel streams are reproducible") {
  const SystemConfig cfg = small_config(2, 3, 2, 1, 1);
  CHECK((channels_for(cfg, 4).composite(1) - channels_for(cfg, 4).composite(1)).norm() == 0.0);
  CHECK((channels_for(cfg, 4).composite(1) - channels_for(cfg, 5).composite(1)).norm() > 0.0);
}
