#pragma once

#include "rsma/channel.hpp"
#include "rsma/state.hpp"

namespace rsma {

// Beamformer-dependent coefficients shared by all rate evaluations:
//   gain(s, n)   = |g_s^H H_n v|^2
//   spread(s, n) = g_s^H V~ Phi_n V~^H g_s  (robust mode only, else empty)
//   noise(s)     = ||g_s||^2 sigma^2
// Row s is the flat sub-message index, column n the interfering device.
struct RateTerms {
  Eigen::MatrixXd gain;
  Eigen::MatrixXd spread;
  Eigen::VectorXd noise;
  bool robust() const { return spread.size() > 0; }
};

RateTerms rate_terms(const SolutionState& state, const CsiView& view, double sigma2);

// Signal over interference-plus-noise of sub-message s when its group is
// decoded: only groups at or after its own interfere. In robust mode the
// estimation-error spread of every undecoded stream, including its own,
// counts as noise (the Jensen lower bound).
double sinr(const RateTerms& terms, const PowerVector& powers, const GroupPartition& partition, SubMessage s);
double subrate(const RateTerms& terms, const PowerVector& powers, const GroupPartition& partition, SubMessage s);

Eigen::VectorXd subrates(const RateTerms& terms, const PowerVector& powers, const GroupPartition& partition);
Eigen::VectorXd device_rates(const RateTerms& terms, const PowerVector& powers, const GroupPartition& partition);

Eigen::VectorXd subrates(const SolutionState& state, const CsiView& view, double sigma2);
Eigen::VectorXd device_rates(const SolutionState& state, const CsiView& view, double sigma2);
double min_rate(const SolutionState& state, const CsiView& view, double sigma2);

double subrate_perfect(const SolutionState& state, const ChannelSet& channels, SubMessage s, double sigma2);
double subrate_lower(const SolutionState& state, const CsitModel& csit, SubMessage s, double sigma2);

// Symbol-level successive group decoding with genie-aided cancellation.
// Returns the empirical SINR of every sub-message in flat order.
Eigen::VectorXd simulate_sgd_sinr(const SolutionState& state, const ChannelSet& channels, double sigma2,
                                  int n_symbols, Rng& rng);

}  // namespace rsma
