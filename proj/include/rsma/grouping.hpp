#pragma once

#include <vector>

#include "rsma/rates.hpp"

namespace rsma {

enum class GroupingStop {
  kLastGroup,         // the weakest sub-message already sits in the last group
  kSiblingConflict,   // its sibling blocks the next group and no group after that exists
  kIterationLimit,
};

struct GroupingResult {
  GroupPartition partition;
  std::vector<GroupPartition> history;  // Q^0 .. Q^t, one per performed move plus the start
  std::vector<double> min_rate_trace;   // min device rate of each history entry
  int moves = 0;
  int max_moves = 0;                    // K * I * (L - 1)
  GroupingStop stop = GroupingStop::kLastGroup;
};

struct GroupingOptions {
  // false: return Q^{t-1}, the partition before the last move, as the greedy
  // search is usually stated; true: return the best partition visited.
  bool best_so_far = false;
};

// Greedy decoding-order search: start with everything in the first group and
// repeatedly push the weaker sub-message of the weakest device one group later.
GroupingResult greedy_group(const SolutionState& state, const CsiView& view, double sigma2, int groups,
                            const GroupingOptions& opt = {});

}  // namespace rsma
