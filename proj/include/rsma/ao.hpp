#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/config.hpp"
#include "rsma/state.hpp"

namespace rsma {

// A stage of the alternating loop failed; `stage()` names it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct AoResult {
  SolutionState state;
  std::vector<double> min_rate_trace;  // r_min before the first iteration, then after each
  int iterations = 0;
  bool converged = false;  // relative improvement fell to kappa2
};

// Everything in the first group, equal power split, all-ones phases and
// matched-filter (or random) beamformers.
SolutionState initial_state(const SystemConfig& cfg, const CsiView& view, Rng& rng);

// Beamformers, phases, powers, then decoding order, each stage only accepted
// if it does not lower the minimum device rate. csit.mode picks perfect rates
// or the estimated-CSIT lower bound.
AoResult run_ao(const SystemConfig& cfg, const ChannelSet& channels, const CsitModel& csit, Rng& rng);
// The same loop from a given feasible state.
AoResult run_ao_from(const SystemConfig& cfg, const CsiView& view, SolutionState start);

// Beamformers rescaled so every device meets the receive beamforming power
// bound; rates are unaffected.
std::vector<CVec> scaled_beams(const SolutionState& state, double p_max_b);

// Max violation over all constraints of the optimization problem, with
// beamformers scaled by scaled_beams.
double constraint_violation(const SolutionState& state, const SystemConfig& cfg);

}  // namespace rsma
