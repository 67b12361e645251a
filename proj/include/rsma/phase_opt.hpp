#pragma once

#include <iosfwd>
#include <vector>

#include "rsma/config.hpp"
#include "rsma/rates.hpp"

namespace rsma {

// Lifted phase matrix V (unit diagonal, PSD) and the phase vector recovered
// from it.
struct PhaseLift {
  CMat V;
  CVec v;
  double rank_one_residual = 0.0;  // tr(V) - ||V||_2
};

// Numerator and denominator log-terms of one sub-message rate as functions of
// V: rate = u - d when V = v v^H.
struct RateSplit {
  double u;
  double d;
};

RateSplit eval_u_d(const SolutionState& state, const CsiView& view, double sigma2, SubMessage s, const CMat& V);

// Gradient of d at V_t in transpose convention: the linearization is
// d(V_t) + tr(grad^T (V - V_t)), an upper bound because d is concave.
CMat grad_V_d(const SolutionState& state, const CsiView& view, double sigma2, SubMessage s, const CMat& V_t);

double rank_one_residual(const CMat& V);

// Euclidean projection onto {V PSD, diag(V) = 1} by Dykstra's alternating
// projections, finished by a diagonal rescaling so the result is exactly
// feasible. Throws NumericalError if the sweeps do not converge.
CMat project_elliptope(const CMat& x, int max_sweeps = tol::kDykstraSweeps, double tolerance = tol::kDykstra);

// Entry phases of the dominant eigenvector, rotated so the last entry is 1.
CVec recover_phases(const CMat& V);

struct PhaseOptions {
  RhoSchedule rho;
  int max_outer = 20;
  int max_inner = 60;
  double alpha = 0.1;
  int grid_points = 64;
  double residual_target = tol::kRankOne;
  double stall_tolerance = 1e-3;  // Frobenius change of V per outer round
};

struct PhaseIterate {
  int outer = 0;
  double rho = 0.0;
  double surrogate = 0.0;  // smoothed rate part minus penalty, at the round's end
  double residual = 0.0;   // tr(V) - ||V||_2
  int inner_iterations = 0;
};

struct PhaseResult {
  PhaseLift lift;
  bool accepted = false;
  double objective_before = 0.0;  // true min-rate with the input phases
  double objective_after = 0.0;   // true min-rate with the returned phases
  std::vector<PhaseIterate> trace;
};

// Penalized successive convex approximation over the lifted phase matrix,
// followed by rank-one recovery, one pass of per-element grid refinement and
// a monotone safeguard against the true min-rate.
PhaseResult solve_phase(const SolutionState& state, const CsiView& view, double sigma2, const PhaseOptions& opt);

void write_phase_trace_csv(std::ostream& out, const std::vector<PhaseIterate>& trace);

}  // namespace rsma
