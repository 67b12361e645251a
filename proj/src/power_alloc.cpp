#include "rsma/power_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "rsma/errors.hpp"

namespace rsma {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kArmijo = 1e-4;
constexpr int kInnerPerRound = 5;

// Coefficient of stream f inside the interference of s, or 0 when f was
// decoded before s. The own entry carries only the robust error spread.
double interference_coef(const RateTerms& terms, const GroupPartition& part, int s, int f) {
  const SubMessage own = part.at(s);
  const SubMessage other = part.at(f);
  if (f == s) return terms.robust() ? terms.spread(s, own.device) : 0.0;
  if (!part.undecoded_at(other, own)) return 0.0;
  double coef = terms.gain(s, other.device);
  if (terms.robust()) coef += terms.spread(s, other.device);
  return coef;
}

// Rates as functions of the flat power vector with fixed beams and phases.
class PowerModel {
 public:
  PowerModel(RateTerms terms, const GroupPartition& part) : terms_(std::move(terms)), part_(part) {
    const int n = part.size();
    down_ = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s) {
      for (int f = 0; f < n; ++f) down_(s, f) = interference_coef(terms_, part, s, f);
    }
    up_ = down_;
    for (int s = 0; s < n; ++s) up_(s, s) += terms_.gain(s, part.at(s).device);
  }

  int size() const { return part_.size(); }
  int devices() const { return part_.devices(); }
  int device_of(int s) const { return part_.at(s).device; }
  double num(int s, const Eigen::VectorXd& p) const { return up_.row(s).dot(p) + terms_.noise(s); }
  double den(int s, const Eigen::VectorXd& p) const { return down_.row(s).dot(p) + terms_.noise(s); }
  const Eigen::MatrixXd& up() const { return up_; }
  const Eigen::MatrixXd& down() const { return down_; }

 private:
  RateTerms terms_;
  const GroupPartition& part_;
  Eigen::MatrixXd down_;
  Eigen::MatrixXd up_;
};

// Smoothed min of device rates; the d part is exact or linearized at an anchor.
class PowerObjective {
 public:
  PowerObjective(const PowerModel& model, double alpha, double p_max) : model_(model), alpha_(alpha), p_max_(p_max) {}

  void anchor_at(const Eigen::VectorXd& x) {
    const Eigen::VectorXd p = p_max_ * x;
    anchor_ = p;
    d_anchor_.resize(model_.size());
    d_scale_.resize(model_.size());
    for (int s = 0; s < model_.size(); ++s) {
      const double den = model_.den(s, p);
      d_anchor_(s) = std::log2(den);
      d_scale_(s) = 1.0 / (den * kLn2);
    }
    linearized_ = true;
  }

  Eigen::VectorXd rates(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd p = p_max_ * x;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(model_.devices());
    for (int s = 0; s < model_.size(); ++s) {
      const double u = std::log2(model_.num(s, p));
      const double d = linearized_ ? d_anchor_(s) + d_scale_(s) * model_.down().row(s).dot(p - anchor_)
                                   : std::log2(model_.den(s, p));
      r(model_.device_of(s)) += u - d;
    }
    return r;
  }

  double value(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd r = rates(x);
    return soft_min(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), alpha_);
  }

  // Gradient with respect to the normalized powers x = p / p_max.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd p = p_max_ * x;
    const Eigen::VectorXd r = rates(x);
    const Eigen::VectorXd w = soft_min_weights(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), alpha_);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(model_.size());
    for (int s = 0; s < model_.size(); ++s) {
      const double ws = w(model_.device_of(s));
      const double d_scale = linearized_ ? d_scale_(s) : 1.0 / (model_.den(s, p) * kLn2);
      g += ws * (model_.up().row(s).transpose() / (model_.num(s, p) * kLn2) - d_scale * model_.down().row(s).transpose());
    }
    return p_max_ * g;
  }

 private:
  const PowerModel& model_;
  double alpha_;
  double p_max_;
  bool linearized_ = false;
  Eigen::VectorXd anchor_;
  Eigen::VectorXd d_anchor_;
  Eigen::VectorXd d_scale_;
};

struct Ascent {
  Eigen::VectorXd x;
  int iterations = 0;
  bool moved = false;
};

Ascent projected_ascent(const PowerObjective& f, Eigen::VectorXd x, int budget, int devices, int parts,
                        std::vector<double>& trace) {
  Ascent out;
  double value = f.value(x);
  for (; out.iterations < budget; ++out.iterations) {
    const Eigen::VectorXd grad = f.gradient(x);
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd next;
    double next_value = value;
    while (step > 1e-12) {
      next = project_power(x + step * grad, devices, parts, 1.0).flat();
      next_value = f.value(next);
      if (next_value >= value + kArmijo * grad.dot(next - x) && (next - x).norm() > 0.0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double change = (next - x).norm();
    const double gain = next_value - value;
    x = std::move(next);
    value = next_value;
    out.moved = true;
    trace.push_back(value);
    if (change <= 1e-10 || gain <= 1e-13 * std::max(1.0, std::abs(value))) {
      ++out.iterations;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

}  // namespace

Eigen::VectorXd grad_p_d(const SolutionState& state, const CsiView& view, double sigma2, SubMessage s,
                         const PowerVector& p_t) {
  const RateTerms terms = rate_terms(state, view, sigma2);
  const GroupPartition& part = state.partition;
  const int own = part.index(s);
  Eigen::VectorXd coef(part.size());
  for (int f = 0; f < part.size(); ++f) coef(f) = interference_coef(terms, part, own, f);
  const double den = coef.dot(p_t.flat()) + terms.noise(own);
  return coef / (den * kLn2);
}

PowerVector project_power(const Eigen::VectorXd& raw, int devices, int parts, double p_max) {
  if (raw.size() != devices * parts) throw ValidationError("project_power: length must equal devices * parts");
  if (!(p_max > 0.0)) throw ValidationError("project_power: p_max must be positive");
  Eigen::VectorXd out(raw.size());
  for (int k = 0; k < devices; ++k) {
    const Eigen::VectorXd y = raw.segment(k * parts, parts);
    const Eigen::VectorXd clipped = y.cwiseMax(0.0);
    if (clipped.sum() <= p_max) {
      out.segment(k * parts, parts) = clipped;
      continue;
    }
    // Budget active: project onto the scaled simplex.
    std::vector<double> sorted(y.data(), y.data() + parts);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double prefix = 0.0;
    double shift = 0.0;
    for (int j = 0; j < parts; ++j) {
      prefix += sorted[static_cast<std::size_t>(j)];
      const double candidate = (prefix - p_max) / (j + 1);
      if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) shift = candidate;
    }
    out.segment(k * parts, parts) = (y.array() - shift).cwiseMax(0.0).matrix();
  }
  return PowerVector::from_flat(out, devices, parts);
}

PowerResult solve_power(const SolutionState& state, const CsiView& view, double sigma2, double p_max,
                        const PowerOptions& opt) {
  if (!(opt.alpha > 0.0) || opt.max_iters < 1) throw ValidationError("solve_power: need alpha > 0 and max_iters >= 1");
  if (!state.powers.feasible(p_max)) throw ValidationError("solve_power: input powers are infeasible");
  const GroupPartition& part = state.partition;
  const PowerModel model(rate_terms(state, view, sigma2), part);
  PowerObjective objective(model, opt.alpha, p_max);

  PowerResult out;
  out.objective_before = min_rate(state, view, sigma2);
  const int devices = part.devices();
  const int parts = part.parts();
  Eigen::VectorXd x = project_power(state.powers.flat() / p_max, devices, parts, 1.0).flat();
  bool moved = false;

  if (!opt.linearize_d) {
    out.trace.push_back(objective.value(x));
    Ascent a = projected_ascent(objective, x, opt.max_iters, devices, parts, out.trace);
    x = std::move(a.x);
    out.iterations = a.iterations;
    moved = a.moved;
  } else {
    // Each round maximizes a concave minorant that touches the true smoothed
    // objective at the anchor, so the true objective never decreases.
    int used = 0;
    double previous = -std::numeric_limits<double>::infinity();
    while (used < opt.max_iters) {
      objective.anchor_at(x);
      const double start = objective.value(x);
      out.trace.push_back(start);
      const int budget = std::min(kInnerPerRound, opt.max_iters - used);
      Ascent a = projected_ascent(objective, x, budget, devices, parts, out.trace);
      used += std::max(a.iterations, 1);
      x = std::move(a.x);
      moved = moved || a.moved;
      if (!a.moved || start - previous <= 1e-12 * std::max(1.0, std::abs(start))) break;
      previous = start;
    }
    out.iterations = used;
  }

  SolutionState candidate = state;
  candidate.powers = PowerVector::from_flat(p_max * x, devices, parts);
  const double after = moved ? min_rate(candidate, view, sigma2) : out.objective_before;
  if (moved && after >= out.objective_before) {
    out.powers = candidate.powers;
    out.objective_after = after;
  } else {
    out.powers = state.powers;
    out.objective_after = out.objective_before;
    out.stalled = true;
  }
  return out;
}

}  // namespace rsma
