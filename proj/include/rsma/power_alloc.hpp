#pragma once

#include <vector>

#include "rsma/rates.hpp"

namespace rsma {

// Gradient of d_{k,i}(p) = log2(interference-plus-noise of (k,i)) over the flat
// power vector. Entries of streams decoded before (k,i) are zero; with perfect
// CSIT so is the own entry, while robust mode keeps the own-error term.
Eigen::VectorXd grad_p_d(const SolutionState& state, const CsiView& view, double sigma2, SubMessage s,
                         const PowerVector& p_t);

// Per-device Euclidean projection onto {p >= 0, sum_i p_{k,i} <= p_max}.
PowerVector project_power(const Eigen::VectorXd& raw, int devices, int parts, double p_max);

struct PowerOptions {
  double alpha = 0.1;
  int max_iters = 500;
  bool linearize_d = false;  // successive linearization of the interference term
};

struct PowerResult {
  PowerVector powers;
  double objective_before = 0.0;  // true min-rate at the input powers
  double objective_after = 0.0;
  int iterations = 0;
  bool stalled = false;  // no improvement found; input returned
  std::vector<double> trace;  // smoothed objective of every accepted iterate
};

PowerResult solve_power(const SolutionState& state, const CsiView& view, double sigma2, double p_max,
                        const PowerOptions& opt);

}  // namespace rsma
