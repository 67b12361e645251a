#pragma once

// Random instances shared by the unit and acceptance tests.

#include <numbers>

#include "rsma/channel.hpp"
#include "rsma/config.hpp"
#include "rsma/rng.hpp"
#include "rsma/state.hpp"

namespace rsma::test {

inline SystemConfig small_config(int m, int n, int k, int parts, int groups, double snr_db = 10.0) {
  SystemConfig cfg;
  cfg.antennas = m;
  cfg.irs_elements = n;
  cfg.devices = k;
  cfg.sub_messages = parts;
  cfg.groups = groups;
  cfg.snr_db = snr_db;
  cfg.solver.covariance_samples = 400;
  return cfg;
}

inline ChannelSet channels_for(const SystemConfig& cfg, std::uint64_t seed) {
  Rng rng = Rng::for_stream(seed, Stream::kChannel);
  return sample_channels(cfg, rng);
}

inline CVec random_phases(int n, Rng& rng) {
  CVec v(n + 1);
  for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  v(n) = 1.0;
  return v;
}

inline CVec random_unit(int dim, Rng& rng) {
  CVec g(dim);
  for (int i = 0; i < dim; ++i) g(i) = rng.complex_normal();
  return g / g.norm();
}

// Feasible powers, strictly inside the per-device budget.
inline PowerVector random_powers(int devices, int parts, double p_max, Rng& rng) {
  PowerVector p(devices, parts);
  for (int k = 0; k < devices; ++k) {
    const double budget = p_max * rng.uniform(0.3, 1.0);
    double left = budget;
    for (int i = 0; i < parts; ++i) {
      const double share = i + 1 == parts ? left : left * rng.uniform(0.1, 0.9);
      p({k, i}) = share;
      left -= share;
    }
  }
  return p;
}

inline GroupPartition random_partition(int devices, int parts, int groups, Rng& rng) {
  GroupPartition q(devices, parts, groups);
  for (int f = 0; f < q.size(); ++f) q.move(q.at(f), rng.uniform_int(0, groups - 1));
  return q;
}

inline SolutionState random_state(const SystemConfig& cfg, Rng& rng) {
  SolutionState st{{}, random_phases(cfg.irs_elements, rng),
                   random_powers(cfg.devices, cfg.sub_messages, cfg.p_max_w, rng),
                   random_partition(cfg.devices, cfg.sub_messages, cfg.groups, rng)};
  for (int f = 0; f < cfg.devices * cfg.sub_messages; ++f) st.beams.push_back(random_unit(cfg.antennas, rng));
  return st;
}

inline CsitModel estimated_csit(const SystemConfig& cfg, const ChannelSet& channels, std::uint64_t seed) {
  std::vector<CMat> sigma;
  for (int k = 0; k < cfg.devices; ++k) {
    Rng rng = Rng::for_stream(seed, Stream::kCovariance, static_cast<std::uint64_t>(k));
    sigma.push_back(estimate_sigma(cfg, k, rng, cfg.solver.covariance_samples));
  }
  Rng rng = Rng::for_stream(seed, Stream::kCsitError);
  return build_csit(cfg, channels, sigma, rng);
}

}  // namespace rsma::test
