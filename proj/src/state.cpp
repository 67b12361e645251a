#include "rsma/state.hpp"

#include <string>

#include "rsma/errors.hpp"

namespace rsma {

GroupPartition::GroupPartition(int devices, int parts, int groups)
    : devices_(devices), parts_(parts), groups_(groups) {
  if (devices < 1 || parts < 1) throw ValidationError("partition needs at least one sub-message");
  if (groups < 1 || groups > devices * parts) {
    throw ValidationError("number of groups must lie in [1, devices * parts]");
  }
  assignment_.assign(static_cast<std::size_t>(devices * parts), 0);
}

GroupPartition GroupPartition::from_groups(int devices, int parts,
                                           const std::vector<std::vector<SubMessage>>& groups) {
  GroupPartition out(devices, parts, static_cast<int>(groups.size()));
  std::vector<int> seen(static_cast<std::size_t>(devices * parts), 0);
  for (std::size_t l = 0; l < groups.size(); ++l) {
    for (const SubMessage& s : groups[l]) {
      out.check(s);
      ++seen[static_cast<std::size_t>(out.index(s))];
      out.assignment_[static_cast<std::size_t>(out.index(s))] = static_cast<int>(l);
    }
  }
  for (int c : seen) {
    if (c != 1) throw ValidationError("partition must contain every sub-message exactly once");
  }
  return out;
}

GroupPartition GroupPartition::full_sic(int devices, int parts, const std::vector<SubMessage>& order) {
  std::vector<std::vector<SubMessage>> groups;
  for (const SubMessage& s : order) groups.push_back({s});
  return from_groups(devices, parts, groups);
}

void GroupPartition::check(SubMessage s) const {
  if (s.device < 0 || s.device >= devices_ || s.part < 0 || s.part >= parts_) {
    throw ValidationError("sub-message (" + std::to_string(s.device) + "," + std::to_string(s.part) +
                          ") is not part of the partition");
  }
}

int GroupPartition::group_of(SubMessage s) const {
  check(s);
  return assignment_[static_cast<std::size_t>(index(s))];
}

void GroupPartition::move(SubMessage s, int group) {
  check(s);
  if (group < 0 || group >= groups_) throw ValidationError("group index out of range");
  assignment_[static_cast<std::size_t>(index(s))] = group;
}

std::vector<SubMessage> GroupPartition::members(int group) const {
  std::vector<SubMessage> out;
  for (int f = 0; f < size(); ++f) {
    if (assignment_[static_cast<std::size_t>(f)] == group) out.push_back(at(f));
  }
  return out;
}

nlohmann::json GroupPartition::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (int l = 0; l < groups_; ++l) {
    nlohmann::json g = nlohmann::json::array();
    for (const SubMessage& s : members(l)) g.push_back({s.device, s.part});
    out.push_back(std::move(g));
  }
  return out;
}

GroupPartition GroupPartition::from_json(const nlohmann::json& j, int devices, int parts) {
  if (!j.is_array()) throw ValidationError("partition JSON must be a list of groups");
  std::vector<std::vector<SubMessage>> groups;
  try {
    for (const auto& g : j) {
      std::vector<SubMessage> members;
      for (const auto& pair : g) members.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
      groups.push_back(std::move(members));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("partition JSON: ") + e.what());
  }
  return from_groups(devices, parts, groups);
}

Eigen::VectorXd PowerVector::flat() const {
  Eigen::VectorXd x(p_.size());
  for (int k = 0; k < devices(); ++k) {
    for (int i = 0; i < parts(); ++i) x(k * parts() + i) = p_(k, i);
  }
  return x;
}

PowerVector PowerVector::from_flat(const Eigen::VectorXd& x, int devices, int parts) {
  if (x.size() != devices * parts) throw ValidationError("power vector length mismatch");
  Eigen::MatrixXd p(devices, parts);
  for (int k = 0; k < devices; ++k) {
    for (int i = 0; i < parts; ++i) p(k, i) = x(k * parts + i);
  }
  return PowerVector(std::move(p));
}

bool PowerVector::feasible(double p_max, double tolerance) const {
  if ((p_.array() < -tolerance).any()) return false;
  return (p_.rowwise().sum().array() <= p_max * (1.0 + tolerance)).all();
}

}  // namespace rsma
