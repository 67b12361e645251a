#include "rsma/ao.hpp"

#include <algorithm>
#include <cmath>

#include "rsma/beamform_gpi.hpp"
#include "rsma/errors.hpp"
#include "rsma/grouping.hpp"
#include "rsma/phase_opt.hpp"
#include "rsma/power_alloc.hpp"
#include "rsma/rates.hpp"

namespace rsma {

namespace {

template <typename F>
auto run_stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

SolutionState initial_state(const SystemConfig& cfg, const CsiView& view, Rng& rng) {
  validate(cfg);
  if (view.devices() != cfg.devices || view.antennas() != cfg.antennas || view.irs_elements() != cfg.irs_elements) {
    throw ValidationError("channel dimensions disagree with the system config");
  }
  SolutionState state{{},
                      CVec::Ones(cfg.irs_elements + 1),
                      PowerVector(cfg.devices, cfg.sub_messages, cfg.p_max_w / cfg.sub_messages),
                      GroupPartition(cfg.devices, cfg.sub_messages, cfg.groups)};
  state.beams = cfg.solver.random_beam_init
                    ? random_unit_beams(cfg.antennas, cfg.devices * cfg.sub_messages, rng)
                    : matched_filter_beams(state, view);
  return state;
}

AoResult run_ao(const SystemConfig& cfg, const ChannelSet& channels, const CsitModel& csit, Rng& rng) {
  validate(cfg);
  const CsiView view = CsiView::select(channels, csit);
  return run_ao_from(cfg, view, initial_state(cfg, view, rng));
}

AoResult run_ao_from(const SystemConfig& cfg, const CsiView& view, SolutionState start) {
  validate(cfg);
  const double sigma2 = cfg.noise_power();
  const SolverConfig& sc = cfg.solver;

  AoResult out{std::move(start), {}, 0, false};
  SolutionState& state = out.state;
  double current = min_rate(state, view, sigma2);
  out.min_rate_trace.push_back(current);

  const BeamformOptions beam_opt{sc.alpha, sc.kappa1, sc.beam_max_iters};
  const PhaseOptions phase_opt{sc.rho, sc.phase_max_outer, sc.phase_max_inner, sc.alpha, sc.phase_grid_points,
                               tol::kRankOne};
  const PowerOptions power_opt{sc.alpha, sc.power_max_iters, sc.power_linearize_d};

  for (int t = 1; t <= sc.ao_max_iters; ++t) {
    const double previous = current;

    run_stage("beamforming", [&] {
      SolutionState candidate = state;
      candidate.beams = gpi_solve(state, view, sigma2, beam_opt).beams;
      const double value = min_rate(candidate, view, sigma2);
      if (value >= current) {
        state = std::move(candidate);
        current = value;
      }
      return 0;
    });

    run_stage("phase", [&] {
      const PhaseResult r = solve_phase(state, view, sigma2, phase_opt);
      if (r.accepted) {
        state.phases = r.lift.v;
        current = r.objective_after;
      }
      return 0;
    });

    run_stage("power", [&] {
      const PowerResult r = solve_power(state, view, sigma2, cfg.p_max_w, power_opt);
      if (!r.stalled) {
        state.powers = r.powers;
        current = r.objective_after;
      }
      return 0;
    });

    run_stage("grouping", [&] {
      const GroupingResult r = greedy_group(state, view, sigma2, cfg.groups, GroupingOptions{true});
      SolutionState candidate = state;
      candidate.partition = r.partition;
      const double value = min_rate(candidate, view, sigma2);
      if (value > current) {
        state = std::move(candidate);
        current = value;
      }
      return 0;
    });

    out.min_rate_trace.push_back(current);
    out.iterations = t;
    const double gain = current - previous;
    const bool small = previous > 0.0 ? gain / previous <= sc.kappa2 : gain <= 0.0;
    if (small) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::vector<CVec> scaled_beams(const SolutionState& state, double p_max_b) {
  std::vector<CVec> out;
  for (int k = 0; k < state.devices(); ++k) {
    double total = 0.0;
    for (int i = 0; i < state.parts(); ++i) total += state.beam({k, i}).squaredNorm();
    const double scale = total > 0.0 ? std::sqrt(p_max_b / total) : 1.0;
    for (int i = 0; i < state.parts(); ++i) out.push_back(scale * state.beam({k, i}));
  }
  return out;
}

double constraint_violation(const SolutionState& state, const SystemConfig& cfg) {
  double worst = 0.0;
  const std::vector<CVec> beams = scaled_beams(state, cfg.p_max_b_w);
  for (int k = 0; k < state.devices(); ++k) {
    double total = 0.0;
    for (int i = 0; i < state.parts(); ++i) total += beams[static_cast<std::size_t>(k * state.parts() + i)].squaredNorm();
    worst = std::max(worst, (total - cfg.p_max_b_w) / cfg.p_max_b_w);
  }
  const Eigen::Index n = state.phases.size() - 1;
  for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(std::abs(state.phases(i)) - 1.0));
  worst = std::max(worst, std::abs(state.phases(n) - cdouble(1.0)));
  const Eigen::MatrixXd& p = state.powers.matrix();
  worst = std::max(worst, -p.minCoeff() / cfg.p_max_w);
  worst = std::max(worst, (p.rowwise().sum().maxCoeff() - cfg.p_max_w) / cfg.p_max_w);
  return std::max(worst, 0.0);
}

}  // namespace rsma
