#include "rsma/beamform_gpi.hpp"

#include <cmath>
#include <numbers>

#include "rsma/errors.hpp"

namespace rsma {

namespace {

// Per-device outer products h h^H and, in robust mode, V~ Phi V~^H.
struct DeviceCovariances {
  std::vector<CMat> signal;
  std::vector<CMat> spread;
};

DeviceCovariances device_covariances(const SolutionState& state, const CsiView& view) {
  DeviceCovariances out;
  const Eigen::Index m = view.antennas();
  const Eigen::Index c = state.phases.size();
  if (c != view.irs_elements() + 1) throw ValidationError("phase vector must have N+1 entries");
  CMat lifted;
  if (view.robust()) {
    lifted = CMat::Zero(m, m * c);
    for (Eigen::Index r = 0; r < m; ++r) lifted.block(r, r * c, 1, c) = state.phases.transpose();
  }
  for (int n = 0; n < view.devices(); ++n) {
    const CVec h = view.composite(n) * state.phases;
    out.signal.push_back(h * h.adjoint());
    if (view.robust()) {
      CMat s = lifted * view.error_cov(n) * lifted.adjoint();
      out.spread.push_back(0.5 * (s + s.adjoint()));
    }
  }
  return out;
}

GammaPair gammas_from(const DeviceCovariances& cov, const SolutionState& state, double sigma2, SubMessage s) {
  const GroupPartition& part = state.partition;
  const Eigen::Index m = cov.signal.front().rows();
  const bool robust = !cov.spread.empty();
  const int own = part.index(s);
  const int own_group = part.group_of(s);
  const double p = state.powers(s);
  GammaPair out;
  out.down = sigma2 * CMat::Identity(m, m);
  if (robust) out.down += p * cov.spread[static_cast<std::size_t>(s.device)];
  for (int f = 0; f < part.size(); ++f) {
    const SubMessage n = part.at(f);
    if (f == own || part.group_of(n) < own_group) continue;
    const auto d = static_cast<std::size_t>(n.device);
    if (robust) {
      out.down += state.powers(n) * (cov.signal[d] + cov.spread[d]);
    } else {
      out.down += state.powers(n) * cov.signal[d];
    }
  }
  out.up = out.down + p * cov.signal[static_cast<std::size_t>(s.device)];
  return out;
}

double quad(const CMat& a, const CVec& x) { return x.dot(a * x).real(); }

Eigen::VectorXd device_rates_from(const std::vector<GammaPair>& gammas, const std::vector<CVec>& beams,
                                  const GroupPartition& part) {
  Eigen::VectorXd rates = Eigen::VectorXd::Zero(part.devices());
  for (int f = 0; f < part.size(); ++f) {
    rates(part.at(f).device) += gamma_rate(gammas[static_cast<std::size_t>(f)], beams[static_cast<std::size_t>(f)]);
  }
  return rates;
}

double objective_from(const std::vector<GammaPair>& gammas, const std::vector<CVec>& beams,
                      const GroupPartition& part, double alpha) {
  const Eigen::VectorXd rates = device_rates_from(gammas, beams, part);
  return smoothed_objective(std::span<const double>(rates.data(), static_cast<std::size_t>(rates.size())), alpha);
}

void check_options(const BeamformOptions& opt) {
  if (!(opt.alpha > 0.0) || !(opt.kappa1 > 0.0) || opt.max_iters < 1) {
    throw ValidationError("beamformer options need alpha > 0, kappa1 > 0, max_iters >= 1");
  }
}

void check_beams(const SolutionState& state, const CsiView& view) {
  if (static_cast<int>(state.beams.size()) != state.partition.size()) {
    throw ValidationError("one beamformer per sub-message required");
  }
  for (const CVec& g : state.beams) {
    if (g.size() != view.antennas()) throw ValidationError("beamformer length must equal M");
    if (!(g.norm() > 0.0)) throw ValidationError("beamformers must be nonzero");
  }
}

double relative_change(const std::vector<CVec>& next, const std::vector<CVec>& prev) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t f = 0; f < next.size(); ++f) {
    num += (next[f] - prev[f]).norm();
    den += prev[f].norm();
  }
  return num / den;
}

}  // namespace

std::vector<GammaPair> build_all_gammas(const SolutionState& state, const CsiView& view, double sigma2) {
  if (!(sigma2 > 0.0)) throw ValidationError("noise power must be positive");
  const DeviceCovariances cov = device_covariances(state, view);
  std::vector<GammaPair> out;
  for (int f = 0; f < state.partition.size(); ++f) out.push_back(gammas_from(cov, state, sigma2, state.partition.at(f)));
  return out;
}

GammaPair build_gammas(const SolutionState& state, const CsiView& view, double sigma2, SubMessage s) {
  if (!(sigma2 > 0.0)) throw ValidationError("noise power must be positive");
  return gammas_from(device_covariances(state, view), state, sigma2, s);
}

double gamma_rate(const GammaPair& gammas, const CVec& beam) {
  return std::log2(quad(gammas.up, beam) / quad(gammas.down, beam));
}

double smoothed_objective(std::span<const double> device_rates, double alpha) {
  return soft_min(device_rates, alpha);
}

double smoothed_objective(const SolutionState& state, const CsiView& view, double sigma2, double alpha) {
  const Eigen::VectorXd rates = device_rates(state, view, sigma2);
  return smoothed_objective(std::span<const double>(rates.data(), static_cast<std::size_t>(rates.size())), alpha);
}

NepvMatrix build_A(const SolutionState& state, const CsiView& view, double sigma2, double alpha, SubMessage s) {
  check_beams(state, view);
  const std::vector<GammaPair> gammas = build_all_gammas(state, view, sigma2);
  const GammaPair& gp = gammas[static_cast<std::size_t>(state.partition.index(s))];
  const CVec& g = state.beam(s);
  const double lambda = objective_from(gammas, state.beams, state.partition, alpha);
  Eigen::LLT<CMat> llt(gp.down);
  if (llt.info() != Eigen::Success) throw NumericalError("build_A: interference covariance is not positive definite");
  const double ratio = quad(gp.down, g) / quad(gp.up, g);
  return {ratio * lambda * llt.solve(gp.up), lambda};
}

NepvTerms nepv_terms(const SolutionState& state, const CsiView& view, double sigma2, double alpha, SubMessage s) {
  check_beams(state, view);
  const std::vector<GammaPair> gammas = build_all_gammas(state, view, sigma2);
  const Eigen::VectorXd rates = device_rates_from(gammas, state.beams, state.partition);
  const std::span<const double> span(rates.data(), static_cast<std::size_t>(rates.size()));
  const Eigen::VectorXd w = soft_min_weights(span, alpha);
  const GammaPair& gp = gammas[static_cast<std::size_t>(state.partition.index(s))];
  const CVec& g = state.beam(s);
  const double scale = w(s.device) / std::numbers::ln2;
  return {scale / quad(gp.up, g) * gp.up, scale / quad(gp.down, g) * gp.down, smoothed_objective(span, alpha)};
}

CVec beam_gradient(const SolutionState& state, const CsiView& view, double sigma2, double alpha, SubMessage s) {
  const NepvTerms t = nepv_terms(state, view, sigma2, alpha, s);
  const CVec& g = state.beam(s);
  return t.psi * g - t.omega * g;
}

std::vector<CVec> matched_filter_beams(const SolutionState& state, const CsiView& view) {
  std::vector<CVec> out;
  for (int f = 0; f < state.partition.size(); ++f) {
    CVec h = view.composite(state.partition.at(f).device) * state.phases;
    const double norm = h.norm();
    if (norm > 0.0) {
      out.push_back(h / norm);
    } else {
      out.push_back(CVec::Unit(h.size(), 0));
    }
  }
  return out;
}

std::vector<CVec> random_unit_beams(int antennas, int count, Rng& rng) {
  std::vector<CVec> out;
  for (int f = 0; f < count; ++f) {
    CVec g(antennas);
    for (int m = 0; m < antennas; ++m) g(m) = rng.complex_normal();
    out.push_back(g / g.norm());
  }
  return out;
}

BeamformResult gpi_solve(const SolutionState& state, const CsiView& view, double sigma2, const BeamformOptions& opt) {
  check_options(opt);
  check_beams(state, view);
  const std::vector<GammaPair> gammas = build_all_gammas(state, view, sigma2);
  std::vector<Eigen::LLT<CMat>> solvers;
  for (const GammaPair& gp : gammas) {
    solvers.emplace_back(gp.down);
    if (solvers.back().info() != Eigen::Success) {
      throw NumericalError("gpi_solve: interference covariance is not positive definite");
    }
  }
  BeamformResult out;
  for (const CVec& g : state.beams) out.beams.push_back(g / g.norm());
  out.lambda = objective_from(gammas, out.beams, state.partition, opt.alpha);
  out.lambda_trace.push_back(out.lambda);

  std::vector<CVec> next(out.beams.size());
  for (int t = 1; t <= opt.max_iters; ++t) {
    for (std::size_t f = 0; f < out.beams.size(); ++f) {
      const CVec& g = out.beams[f];
      const GammaPair& gp = gammas[f];
      const double ratio = quad(gp.down, g) / quad(gp.up, g);
      CVec y = solvers[f].solve(gp.up * g);
      if (out.lambda > 0.0) y *= ratio * out.lambda;
      const double norm = y.norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("gpi_solve: power step collapsed");
      next[f] = y / norm;
    }
    const double change = relative_change(next, out.beams);
    out.beams.swap(next);
    out.lambda = objective_from(gammas, out.beams, state.partition, opt.alpha);
    out.lambda_trace.push_back(out.lambda);
    out.iterations = t;
    if (change <= opt.kappa1) {
      out.converged = true;
      break;
    }
  }
  return out;
}

BeamformResult scf_solve(const SolutionState& state, const CsiView& view, double sigma2, const BeamformOptions& opt) {
  check_options(opt);
  check_beams(state, view);
  const std::vector<GammaPair> gammas = build_all_gammas(state, view, sigma2);
  BeamformResult out;
  for (const CVec& g : state.beams) out.beams.push_back(g / g.norm());
  out.lambda = objective_from(gammas, out.beams, state.partition, opt.alpha);
  out.lambda_trace.push_back(out.lambda);

  // The collapsed NEPv matrix is a positive multiple of down^{-1} up, so its
  // dominant eigenvector is the top generalized eigenvector of (up, down).
  std::vector<CVec> targets;
  for (const GammaPair& gp : gammas) {
    Eigen::LLT<CMat> llt(gp.down);
    if (llt.info() != Eigen::Success) throw NumericalError("scf_solve: interference covariance is not positive definite");
    const CMat l = llt.matrixL();
    const CMat linv_up = l.triangularView<Eigen::Lower>().solve(gp.up);
    CMat whitened = l.triangularView<Eigen::Lower>().solve(linv_up.adjoint()).adjoint();
    whitened = (0.5 * (whitened + whitened.adjoint())).eval();
    const CVec y = dominant_eigenpair(whitened).second;
    CVec g = l.adjoint().triangularView<Eigen::Upper>().solve(y);
    targets.push_back(g / g.norm());
  }

  std::vector<CVec> next(out.beams.size());
  for (int t = 1; t <= opt.max_iters; ++t) {
    double change = 0.0;
    for (std::size_t f = 0; f < out.beams.size(); ++f) {
      // Eigenvectors are defined up to phase; align with the previous iterate.
      const cdouble inner = targets[f].dot(out.beams[f]);
      const cdouble phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : cdouble(1.0);
      next[f] = phase * targets[f];
      change += (next[f] - out.beams[f]).norm();
    }
    out.beams.swap(next);
    out.lambda = objective_from(gammas, out.beams, state.partition, opt.alpha);
    out.lambda_trace.push_back(out.lambda);
    out.iterations = t;
    if (change <= opt.kappa1) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace rsma
