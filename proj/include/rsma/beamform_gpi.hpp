#pragma once

#include <vector>

#include "rsma/rates.hpp"

namespace rsma {

// Interference-plus-noise covariance seen by one sub-message with (`up`) and
// without (`down`) its own signal. Both are positive definite for sigma2 > 0.
struct GammaPair {
  CMat up;
  CMat down;
};

GammaPair build_gammas(const SolutionState& state, const CsiView& view, double sigma2, SubMessage s);
// All sub-messages, flat order. Cheaper than repeated build_gammas calls.
std::vector<GammaPair> build_all_gammas(const SolutionState& state, const CsiView& view, double sigma2);

// log2(g^H up g / g^H down g)
double gamma_rate(const GammaPair& gammas, const CVec& beam);

double smoothed_objective(std::span<const double> device_rates, double alpha);
double smoothed_objective(const SolutionState& state, const CsiView& view, double sigma2, double alpha);

struct NepvMatrix {
  CMat a;         // [(g^H down g)/(g^H up g)] down^{-1} up * lambda
  double lambda;  // smoothed objective at the current beamformers
};
NepvMatrix build_A(const SolutionState& state, const CsiView& view, double sigma2, double alpha, SubMessage s);

// Uncollapsed first-order terms for one sub-message: psi g = lambda' omega g at
// stationarity, with softmin weight w_k folded into both.
struct NepvTerms {
  CMat psi;
  CMat omega;
  double lambda;
};
NepvTerms nepv_terms(const SolutionState& state, const CsiView& view, double sigma2, double alpha, SubMessage s);

// Wirtinger derivative d f / d conj(g_s) of the smoothed objective. The real
// gradient over (Re g, Im g) is twice its real and imaginary parts.
CVec beam_gradient(const SolutionState& state, const CsiView& view, double sigma2, double alpha, SubMessage s);

struct BeamformOptions {
  double alpha = 0.1;
  double kappa1 = 1e-4;
  int max_iters = 200;
};

struct BeamformResult {
  std::vector<CVec> beams;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> lambda_trace;  // objective before the first and after every iteration
};

// Each iteration replaces every beamformer by the dominant eigenvector of its
// NEPv matrix.
BeamformResult scf_solve(const SolutionState& state, const CsiView& view, double sigma2, const BeamformOptions& opt);
// Each iteration takes one normalized power step g <- A g / ||A g||.
BeamformResult gpi_solve(const SolutionState& state, const CsiView& view, double sigma2, const BeamformOptions& opt);

std::vector<CVec> matched_filter_beams(const SolutionState& state, const CsiView& view);
std::vector<CVec> random_unit_beams(int antennas, int count, Rng& rng);

}  // namespace rsma
