#include "rsma/rates.hpp"

#include <cmath>

#include "rsma/errors.hpp"

namespace rsma {

namespace {

void check_state(const SolutionState& state, const CsiView& view) {
  const int total = state.partition.size();
  if (state.partition.devices() != view.devices()) {
    throw ValidationError("state and channels disagree on the number of devices");
  }
  if (static_cast<int>(state.beams.size()) != total) throw ValidationError("one beamformer per sub-message required");
  for (const CVec& g : state.beams) {
    if (g.size() != view.antennas()) throw ValidationError("beamformer length must equal M");
  }
  if (state.phases.size() != view.irs_elements() + 1) throw ValidationError("phase vector must have N+1 entries");
  if (state.powers.devices() != state.devices() || state.powers.parts() != state.parts()) {
    throw ValidationError("power matrix shape disagrees with the partition");
  }
}

}  // namespace

RateTerms rate_terms(const SolutionState& state, const CsiView& view, double sigma2) {
  check_state(state, view);
  const int total = state.partition.size();
  const int devices = view.devices();
  RateTerms t;
  t.gain.resize(total, devices);
  t.noise.resize(total);

  std::vector<CVec> effective;
  effective.reserve(static_cast<std::size_t>(devices));
  for (int n = 0; n < devices; ++n) effective.push_back(view.composite(n) * state.phases);

  for (int s = 0; s < total; ++s) {
    const CVec& g = state.beams[static_cast<std::size_t>(s)];
    t.noise(s) = g.squaredNorm() * sigma2;
    for (int n = 0; n < devices; ++n) t.gain(s, n) = std::norm(g.dot(effective[static_cast<std::size_t>(n)]));
  }
  if (view.robust()) {
    const Eigen::Index expect = view.composite(0).size();
    t.spread.resize(total, devices);
    const CVec conj_phases = state.phases.conjugate();
    for (int s = 0; s < total; ++s) {
      const CVec& g = state.beams[static_cast<std::size_t>(s)];
      // V~^H g, entry m(N+1)+c = conj(v_c) g_m
      CVec w(expect);
      for (Eigen::Index m = 0; m < g.size(); ++m) w.segment(m * conj_phases.size(), conj_phases.size()) = g(m) * conj_phases;
      for (int n = 0; n < devices; ++n) {
        const CMat& phi = view.error_cov(n);
        if (phi.rows() != expect || phi.cols() != expect) {
          throw ValidationError("error covariance dimension must be M(N+1)");
        }
        t.spread(s, n) = w.dot(phi * w).real();
      }
    }
  }
  return t;
}

double sinr(const RateTerms& terms, const PowerVector& powers, const GroupPartition& partition, SubMessage s) {
  const int own = partition.index(s);
  const int own_group = partition.group_of(s);
  const double p = powers(s);
  double den = 0.0;
  if (terms.robust()) den += p * terms.spread(own, s.device);
  for (int f = 0; f < partition.size(); ++f) {
    const SubMessage n = partition.at(f);
    if (f == own || partition.group_of(n) < own_group) continue;
    double coef = terms.gain(own, n.device);
    if (terms.robust()) coef += terms.spread(own, n.device);
    den += powers(n) * coef;
  }
  den += terms.noise(own);
  return p * terms.gain(own, s.device) / den;
}

double subrate(const RateTerms& terms, const PowerVector& powers, const GroupPartition& partition, SubMessage s) {
  return std::log2(1.0 + sinr(terms, powers, partition, s));
}

Eigen::VectorXd subrates(const RateTerms& terms, const PowerVector& powers, const GroupPartition& partition) {
  Eigen::VectorXd r(partition.size());
  for (int f = 0; f < partition.size(); ++f) r(f) = subrate(terms, powers, partition, partition.at(f));
  return r;
}

Eigen::VectorXd device_rates(const RateTerms& terms, const PowerVector& powers, const GroupPartition& partition) {
  const Eigen::VectorXd r = subrates(terms, powers, partition);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(partition.devices());
  for (int f = 0; f < partition.size(); ++f) out(partition.at(f).device) += r(f);
  return out;
}

Eigen::VectorXd subrates(const SolutionState& state, const CsiView& view, double sigma2) {
  return subrates(rate_terms(state, view, sigma2), state.powers, state.partition);
}

Eigen::VectorXd device_rates(const SolutionState& state, const CsiView& view, double sigma2) {
  return device_rates(rate_terms(state, view, sigma2), state.powers, state.partition);
}

double min_rate(const SolutionState& state, const CsiView& view, double sigma2) {
  return device_rates(state, view, sigma2).minCoeff();
}

double subrate_perfect(const SolutionState& state, const ChannelSet& channels, SubMessage s, double sigma2) {
  return subrate(rate_terms(state, CsiView::perfect(channels), sigma2), state.powers, state.partition, s);
}

double subrate_lower(const SolutionState& state, const CsitModel& csit, SubMessage s, double sigma2) {
  if (csit.mode == CsitMode::kPerfect) {
    const CsiView view = CsiView::estimated(csit);  // H^ = H and Phi = 0
    RateTerms terms = rate_terms(state, view, sigma2);
    terms.spread.resize(0, 0);
    return subrate(terms, state.powers, state.partition, s);
  }
  return subrate(rate_terms(state, CsiView::estimated(csit), sigma2), state.powers, state.partition, s);
}

Eigen::VectorXd simulate_sgd_sinr(const SolutionState& state, const ChannelSet& channels, double sigma2,
                                  int n_symbols, Rng& rng) {
  const CsiView view = CsiView::perfect(channels);
  check_state(state, view);
  if (n_symbols < 1) throw ValidationError("simulate_sgd_sinr: need at least one symbol");
  const GroupPartition& part = state.partition;
  const int total = part.size();
  const Eigen::Index m = channels.antennas();
  const double noise_amp = std::sqrt(sigma2);

  Eigen::MatrixXcd symbols(total, n_symbols);
  for (int f = 0; f < total; ++f) {
    for (int t = 0; t < n_symbols; ++t) symbols(f, t) = rng.complex_normal();
  }
  // Column f of `streams` is sqrt(p) H_k v for sub-message f.
  CMat streams(m, total);
  for (int f = 0; f < total; ++f) {
    const SubMessage s = part.at(f);
    streams.col(f) = std::sqrt(state.powers(s)) * (channels.composite(s.device) * state.phases);
  }
  CMat received = streams * symbols;
  for (Eigen::Index r = 0; r < m; ++r) {
    for (int t = 0; t < n_symbols; ++t) received(r, t) += noise_amp * rng.complex_normal();
  }

  Eigen::VectorXd out(total);
  for (int l = 0; l < part.groups(); ++l) {
    const std::vector<SubMessage> group = part.members(l);
    for (const SubMessage& s : group) {
      const int f = part.index(s);
      const Eigen::RowVectorXcd est = state.beams[static_cast<std::size_t>(f)].adjoint() * received;
      const Eigen::RowVectorXcd x = symbols.row(f);
      const cdouble coef = std::conj(est.dot(x)) / x.squaredNorm();  // least-squares fit est ~ coef x
      const double residual = (est - coef * x).squaredNorm();
      out(f) = std::norm(coef) * x.squaredNorm() / residual;
    }
    for (const SubMessage& s : group) {
      const int f = part.index(s);
      received.noalias() -= streams.col(f) * symbols.row(f);
    }
  }
  return out;
}

}  // namespace rsma
