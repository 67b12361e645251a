#pragma once

#include <compare>
#include <vector>

#include <json.hpp>

#include "rsma/numerics.hpp"

namespace rsma {

// Sub-message `part` of device `device`, both 0-based.
struct SubMessage {
  int device = 0;
  int part = 0;
  auto operator<=>(const SubMessage&) const = default;
};

// Ordered decoding groups Q_1..Q_L over all (device, part) pairs. Stored as
// one group index per sub-message, so every sub-message is in exactly one group.
class GroupPartition {
 public:
  GroupPartition(int devices, int parts, int groups);  // everything in group 0
  static GroupPartition from_groups(int devices, int parts,
                                    const std::vector<std::vector<SubMessage>>& groups);
  // Each sub-message alone in its own group, decoded in the given order.
  static GroupPartition full_sic(int devices, int parts, const std::vector<SubMessage>& order);

  int devices() const { return devices_; }
  int parts() const { return parts_; }
  int groups() const { return groups_; }
  int size() const { return devices_ * parts_; }
  int index(SubMessage s) const { return s.device * parts_ + s.part; }
  SubMessage at(int flat) const { return {flat / parts_, flat % parts_}; }

  int group_of(SubMessage s) const;
  void move(SubMessage s, int group);
  std::vector<SubMessage> members(int group) const;
  // Sub-message n is still interference when s is decoded.
  bool undecoded_at(SubMessage n, SubMessage s) const { return group_of(n) >= group_of(s); }

  bool operator==(const GroupPartition&) const = default;

  nlohmann::json to_json() const;  // list of groups, each a list of [k, i]
  static GroupPartition from_json(const nlohmann::json& j, int devices, int parts);

 private:
  void check(SubMessage s) const;
  int devices_;
  int parts_;
  int groups_;
  std::vector<int> assignment_;
};

// Transmit powers p_{k,i} in watts.
class PowerVector {
 public:
  PowerVector() = default;
  PowerVector(int devices, int parts, double value = 0.0) : p_(Eigen::MatrixXd::Constant(devices, parts, value)) {}
  explicit PowerVector(Eigen::MatrixXd p) : p_(std::move(p)) {}

  int devices() const { return static_cast<int>(p_.rows()); }
  int parts() const { return static_cast<int>(p_.cols()); }
  double operator()(SubMessage s) const { return p_(s.device, s.part); }
  double& operator()(SubMessage s) { return p_(s.device, s.part); }
  const Eigen::MatrixXd& matrix() const { return p_; }

  // Flat order matches GroupPartition::index.
  Eigen::VectorXd flat() const;
  static PowerVector from_flat(const Eigen::VectorXd& x, int devices, int parts);

  bool feasible(double p_max, double tolerance = tol::kFeasible) const;

 private:
  Eigen::MatrixXd p_;
};

struct SolutionState {
  std::vector<CVec> beams;  // unit-norm receive beamformers, flat sub-message order
  CVec phases;              // N IRS phases followed by a fixed 1
  PowerVector powers;
  GroupPartition partition;

  const CVec& beam(SubMessage s) const { return beams[static_cast<std::size_t>(partition.index(s))]; }
  CVec& beam(SubMessage s) { return beams[static_cast<std::size_t>(partition.index(s))]; }
  int devices() const { return partition.devices(); }
  int parts() const { return partition.parts(); }
};

}  // namespace rsma
