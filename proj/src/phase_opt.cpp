#include "rsma/phase_opt.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "rsma/beamform_gpi.hpp"
#include "rsma/errors.hpp"

namespace rsma {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kArmijo = 1e-4;
// Inner ascent stops once a step gains less than this, relative; each outer
// round only needs to improve its surrogate.
constexpr double kInnerGain = 1e-5;

// Re tr(B V) for Hermitian B and V.
double trace_product(const CMat& b, const CMat& v) { return (b.conjugate().cwiseProduct(v)).sum().real(); }

// Per sub-message: u = log2(tr(up V) + noise), d = log2(tr(down V) + noise).
// up sums p_n C_{s,n} over undecoded streams, down drops the own signal part;
// C_{s,n} = a a^H + R with a = H_n^H g_s and R = G~ conj(Phi_n) G~^H.
struct LiftedModel {
  std::vector<CMat> up;
  std::vector<CMat> down;
  std::vector<double> noise;
  std::vector<int> device;
  int devices = 0;
};

LiftedModel lifted_model(const SolutionState& state, const CsiView& view, double sigma2) {
  const GroupPartition& part = state.partition;
  const int total = part.size();
  const int devices = view.devices();
  const Eigen::Index c = view.irs_elements() + 1;
  const Eigen::Index m = view.antennas();
  if (state.phases.size() != c) throw ValidationError("phase vector must have N+1 entries");
  if (static_cast<int>(state.beams.size()) != total) throw ValidationError("one beamformer per sub-message required");

  LiftedModel model;
  model.devices = devices;
  for (int s = 0; s < total; ++s) {
    const SubMessage own = part.at(s);
    const CVec& g = state.beams[static_cast<std::size_t>(s)];
    if (g.size() != m) throw ValidationError("beamformer length must equal M");

    std::vector<CMat> signal(static_cast<std::size_t>(devices));
    std::vector<CMat> spread;
    for (int n = 0; n < devices; ++n) {
      const CVec a = view.composite(n).adjoint() * g;
      signal[static_cast<std::size_t>(n)] = a * a.adjoint();
    }
    if (view.robust()) {
      CMat beam_blocks = CMat::Zero(c, m * c);
      for (Eigen::Index r = 0; r < m; ++r) beam_blocks.block(0, r * c, c, c) = g(r) * CMat::Identity(c, c);
      for (int n = 0; n < devices; ++n) {
        CMat r = beam_blocks * view.error_cov(n).conjugate() * beam_blocks.adjoint();
        spread.push_back(0.5 * (r + r.adjoint()));
      }
    }

    const double p_own = state.powers(own);
    CMat down = CMat::Zero(c, c);
    if (view.robust()) down += p_own * spread[static_cast<std::size_t>(own.device)];
    for (int f = 0; f < total; ++f) {
      const SubMessage n = part.at(f);
      if (f == s || !part.undecoded_at(n, own)) continue;
      const auto d = static_cast<std::size_t>(n.device);
      if (view.robust()) {
        down += state.powers(n) * (signal[d] + spread[d]);
      } else {
        down += state.powers(n) * signal[d];
      }
    }
    model.up.push_back(down + p_own * signal[static_cast<std::size_t>(own.device)]);
    model.down.push_back(std::move(down));
    model.noise.push_back(g.squaredNorm() * sigma2);
    model.device.push_back(own.device);
  }
  return model;
}

double quad(const CMat& a, const CVec& x) { return x.dot(a * x).real(); }

// Exact device rates for a rank-one V = v v^H.
Eigen::VectorXd lifted_device_rates(const LiftedModel& model, const CVec& v) {
  Eigen::VectorXd rates = Eigen::VectorXd::Zero(model.devices);
  for (std::size_t s = 0; s < model.up.size(); ++s) {
    rates(model.device[s]) +=
        std::log2(quad(model.up[s], v) + model.noise[s]) - std::log2(quad(model.down[s], v) + model.noise[s]);
  }
  return rates;
}

// Penalized surrogate of one outer round, anchored at V_t.
class Surrogate {
 public:
  Surrogate(const LiftedModel& model, const CMat& anchor, double rho, double alpha)
      : model_(model), anchor_(anchor), alpha_(alpha), weight_(1.0 / (2.0 * rho)) {
    const auto [top, vec] = dominant_eigenpair(anchor);
    anchor_norm_ = top;
    direction_ = vec;
    for (std::size_t s = 0; s < model.down.size(); ++s) {
      const double den = trace_product(model.down[s], anchor) + model.noise[s];
      d_anchor_.push_back(std::log2(den));
      d_scale_.push_back(1.0 / (den * kLn2));
    }
  }

  Eigen::VectorXd rates(const CMat& V) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(model_.devices);
    for (std::size_t s = 0; s < model_.up.size(); ++s) {
      const double u = std::log2(trace_product(model_.up[s], V) + model_.noise[s]);
      const double d_lin = d_anchor_[s] + d_scale_[s] * trace_product(model_.down[s], V - anchor_);
      r(model_.device[s]) += u - d_lin;
    }
    return r;
  }

  double penalty(const CMat& V) const {
    const double spectral_lin = anchor_norm_ + quad(V - anchor_, direction_);
    return weight_ * (V.trace().real() - spectral_lin);
  }

  double value(const CMat& V) const {
    const Eigen::VectorXd r = rates(V);
    return soft_min(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), alpha_) - penalty(V);
  }

  // Frobenius-gradient (Hermitian) of value().
  CMat gradient(const CMat& V) const {
    const Eigen::VectorXd r = rates(V);
    const Eigen::VectorXd w =
        soft_min_weights(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), alpha_);
    const Eigen::Index c = V.rows();
    CMat g = weight_ * (direction_ * direction_.adjoint() - CMat::Identity(c, c));
    for (std::size_t s = 0; s < model_.up.size(); ++s) {
      const double ws = w(model_.device[s]);
      const double den_u = trace_product(model_.up[s], V) + model_.noise[s];
      g += (ws / (den_u * kLn2)) * model_.up[s] - (ws * d_scale_[s]) * model_.down[s];
    }
    return g;
  }

 private:
  const LiftedModel& model_;
  CMat anchor_;
  double alpha_;
  double weight_;
  double anchor_norm_ = 0.0;
  CVec direction_;
  std::vector<double> d_anchor_;
  std::vector<double> d_scale_;
};

struct InnerResult {
  CMat V;
  int iterations = 0;
};

InnerResult projected_ascent(const Surrogate& f, CMat V, int max_inner) {
  double value = f.value(V);
  // The trial step starts at twice the last accepted one, capped at 1.
  double last_step = 0.5;
  int it = 0;
  for (; it < max_inner; ++it) {
    const CMat grad = f.gradient(V);
    double step = std::min(1.0, 2.0 * last_step);
    bool moved = false;
    CMat next;
    double next_value = value;
    while (step > 1e-12) {
      try {
        next = project_elliptope(V + step * grad);
      } catch (const NumericalError&) {
        // Very long trial steps can stall Dykstra; a shorter one will not.
        step *= 0.5;
        continue;
      }
      next_value = f.value(next);
      const double ascent = trace_product(grad, next - V);
      if (next_value >= value + kArmijo * ascent) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    last_step = step;
    const double change = (next - V).norm();
    const double gain = next_value - value;
    V = std::move(next);
    value = next_value;
    if (change <= 1e-8 || gain <= kInnerGain * std::max(1.0, std::abs(value))) {
      ++it;
      break;
    }
  }
  return {std::move(V), it};
}

double exact_min(const Eigen::VectorXd& rates) { return rates.minCoeff(); }

CVec grid_refine(const LiftedModel& model, CVec v, int grid_points) {
  if (grid_points <= 0) return v;
  double best = exact_min(lifted_device_rates(model, v));
  const Eigen::Index n_irs = v.size() - 1;
  for (Eigen::Index n = 0; n < n_irs; ++n) {
    const cdouble keep = v(n);
    cdouble best_entry = keep;
    for (int q = 0; q < grid_points; ++q) {
      v(n) = std::polar(1.0, 2.0 * std::numbers::pi * q / grid_points);
      const double value = exact_min(lifted_device_rates(model, v));
      if (value > best) {
        best = value;
        best_entry = v(n);
      }
    }
    v(n) = best_entry;
  }
  return v;
}

}  // namespace

RateSplit eval_u_d(const SolutionState& state, const CsiView& view, double sigma2, SubMessage s, const CMat& V) {
  const Eigen::Index c = view.irs_elements() + 1;
  if (V.rows() != c || V.cols() != c) throw ValidationError("eval_u_d: V must be (N+1) x (N+1)");
  const LiftedModel model = lifted_model(state, view, sigma2);
  const auto f = static_cast<std::size_t>(state.partition.index(s));
  return {std::log2(trace_product(model.up[f], V) + model.noise[f]),
          std::log2(trace_product(model.down[f], V) + model.noise[f])};
}

CMat grad_V_d(const SolutionState& state, const CsiView& view, double sigma2, SubMessage s, const CMat& V_t) {
  const Eigen::Index c = view.irs_elements() + 1;
  if (V_t.rows() != c || V_t.cols() != c) throw ValidationError("grad_V_d: V must be (N+1) x (N+1)");
  const LiftedModel model = lifted_model(state, view, sigma2);
  const auto f = static_cast<std::size_t>(state.partition.index(s));
  const double den = trace_product(model.down[f], V_t) + model.noise[f];
  return model.down[f].transpose() / (den * kLn2);
}

double rank_one_residual(const CMat& V) { return V.trace().real() - hermitian_eig(V).values(0); }

CMat project_elliptope(const CMat& x, int max_sweeps, double tolerance) {
  if (x.rows() != x.cols()) throw ValidationError("project_elliptope: matrix must be square");
  const Eigen::Index n = x.rows();
  CMat current = 0.5 * (x + x.adjoint());
  CMat psd_fix = CMat::Zero(n, n);
  CMat diag_fix = CMat::Zero(n, n);
  CMat psd_part;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    psd_part = psd_project(current + psd_fix);
    psd_fix = current + psd_fix - psd_part;
    CMat next = psd_part + diag_fix;
    next.diagonal().setOnes();
    diag_fix = psd_part + diag_fix - next;
    const double gap = (psd_part - next).norm();
    current = std::move(next);
    if (gap <= tolerance * std::sqrt(static_cast<double>(n))) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalError("project_elliptope: Dykstra projection did not converge");
  // psd_part is PSD with diagonal within the gap of one; rescale to exact ones.
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = psd_part(i, i).real();
    if (!(d > 0.0)) throw NumericalError("project_elliptope: degenerate diagonal");
    scale(i) = 1.0 / std::sqrt(d);
  }
  CMat out = scale.asDiagonal() * psd_part * scale.asDiagonal();
  out = (0.5 * (out + out.adjoint())).eval();
  out.diagonal().setOnes();
  return out;
}

CVec recover_phases(const CMat& V) {
  const CVec u = dominant_eigenpair(V).second;
  const Eigen::Index n = u.size();
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mag = std::abs(u(i));
    v(i) = mag > 0.0 ? u(i) / mag : cdouble(1.0);
  }
  const cdouble rotate = std::conj(v(n - 1));
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    v(i) *= rotate;
    v(i) /= std::abs(v(i));
  }
  v(n - 1) = 1.0;
  return v;
}

PhaseResult solve_phase(const SolutionState& state, const CsiView& view, double sigma2, const PhaseOptions& opt) {
  if (opt.max_outer < 1 || opt.max_inner < 1) throw ValidationError("solve_phase: iteration limits must be >= 1");
  if (!(opt.alpha > 0.0)) throw ValidationError("solve_phase: alpha must be positive");
  check_phases(state.phases, view.irs_elements());

  const LiftedModel model = lifted_model(state, view, sigma2);
  PhaseResult out;
  out.objective_before = min_rate(state, view, sigma2);

  CMat V = state.phases * state.phases.adjoint();
  double rho = opt.rho.initial;
  for (int t = 0; t < opt.max_outer; ++t) {
    // The penalty only tightens while V is still off rank one.
    if (t > 0 && out.trace.back().residual >= opt.residual_target) rho = std::max(rho * opt.rho.decay, opt.rho.floor);
    const Surrogate surrogate(model, V, rho, opt.alpha);
    InnerResult inner = projected_ascent(surrogate, V, opt.max_inner);
    const double change = (inner.V - V).norm();
    V = std::move(inner.V);
    PhaseIterate it;
    it.outer = t;
    it.rho = rho;
    it.surrogate = surrogate.value(V);
    it.residual = rank_one_residual(V);
    it.inner_iterations = inner.iterations;
    out.trace.push_back(it);
    // A rank-one V that still moves is a round of minorize-maximize on the
    // phases themselves; keep going until it settles.
    if (it.residual < opt.residual_target && change <= opt.stall_tolerance) break;
  }

  CVec v = grid_refine(model, recover_phases(V), opt.grid_points);
  SolutionState candidate = state;
  candidate.phases = v;
  const double after = min_rate(candidate, view, sigma2);
  out.lift.V = V;
  out.lift.rank_one_residual = rank_one_residual(V);
  if (after >= out.objective_before) {
    out.accepted = true;
    out.lift.v = std::move(v);
    out.objective_after = after;
  } else {
    out.accepted = false;
    out.lift.v = state.phases;
    out.objective_after = out.objective_before;
  }
  return out;
}

void write_phase_trace_csv(std::ostream& out, const std::vector<PhaseIterate>& trace) {
  out << "outer,rho,surrogate,residual,inner_iterations\n";
  for (const PhaseIterate& it : trace) {
    out << it.outer << ',' << it.rho << ',' << it.surrogate << ',' << it.residual << ',' << it.inner_iterations
        << '\n';
  }
}

}  // namespace rsma
