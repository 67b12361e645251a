#include "rsma/grouping.hpp"

#include "rsma/errors.hpp"

namespace rsma {

GroupingResult greedy_group(const SolutionState& state, const CsiView& view, double sigma2, int groups,
                            const GroupingOptions& opt) {
  const int devices = state.devices();
  const int parts = state.parts();
  if (groups < 1 || groups > devices * parts) {
    throw ValidationError("greedy_group: number of groups must lie in [1, devices * parts]");
  }
  // Beams, phases and powers are fixed here, so the rate coefficients are too.
  const RateTerms terms = rate_terms(state, view, sigma2);

  GroupingResult out{GroupPartition(devices, parts, groups), {}, {}, 0, devices * parts * (groups - 1),
                     GroupingStop::kLastGroup};
  GroupPartition current(devices, parts, groups);
  out.history.push_back(current);
  out.min_rate_trace.push_back(device_rates(terms, state.powers, current).minCoeff());

  while (true) {
    const Eigen::VectorXd sub = subrates(terms, state.powers, current);
    Eigen::VectorXd dev = Eigen::VectorXd::Zero(devices);
    for (int f = 0; f < current.size(); ++f) dev(current.at(f).device) += sub(f);
    int weakest = 0;
    for (int k = 1; k < devices; ++k) {
      if (dev(k) < dev(weakest)) weakest = k;
    }
    SubMessage chosen{weakest, 0};
    for (int i = 1; i < parts; ++i) {
      if (sub(current.index({weakest, i})) < sub(current.index(chosen))) chosen = {weakest, i};
    }
    const int l = current.group_of(chosen);
    if (l == groups - 1) {
      out.stop = GroupingStop::kLastGroup;
      break;
    }
    int target = l + 1;
    if (parts == 2) {
      const SubMessage sibling{weakest, 1 - chosen.part};
      if (current.group_of(sibling) == l + 1) {
        if (l < groups - 2) {
          target = l + 2;
        } else {
          out.stop = GroupingStop::kSiblingConflict;
          break;
        }
      }
    }
    if (out.moves >= out.max_moves) {
      out.stop = GroupingStop::kIterationLimit;
      break;
    }
    current.move(chosen, target);
    ++out.moves;
    out.history.push_back(current);
    out.min_rate_trace.push_back(device_rates(terms, state.powers, current).minCoeff());
  }

  if (opt.best_so_far) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < out.min_rate_trace.size(); ++t) {
      if (out.min_rate_trace[t] > out.min_rate_trace[best]) best = t;
    }
    out.partition = out.history[best];
  } else {
    out.partition = out.history[out.moves > 0 ? static_cast<std::size_t>(out.moves - 1) : 0];
  }
  return out;
}

}  // namespace rsma
