#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace hyclf {

/// One sampled violation of a certified condition.
struct Violation {
  Eigen::VectorXd x;
  std::string phase;  // "flow", "jump", "bounds", ...
  double margin = 0.0;  // negative = amount by which the condition failed
};

/// Findings for a single condition over a sampled region. Margins follow the
/// convention "required - achieved": nonnegative means the condition holds.
struct ConditionReport {
  std::string condition;
  std::int64_t points_checked = 0;
  std::vector<Violation> violations;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<std::string> flags;

  bool passed() const { return violations.empty(); }

  void record(const Eigen::VectorXd& x, const std::string& phase, double margin,
              double tol, std::size_t max_stored = 256) {
    ++points_checked;
    worst_margin = std::min(worst_margin, margin);
    if (margin < -tol) {
      if (violations.size() < max_stored) violations.push_back({x, phase, margin});
      else if (!violations.empty() && margin < violations.back().margin)
        violations.back() = {x, phase, margin};
    }
  }
};

/// Aggregate verdict over all checked conditions.
struct VerificationReport {
  std::vector<ConditionReport> conditions;
  std::vector<std::string> flags;

  bool all_passed() const {
    for (const auto& c : conditions)
      if (!c.passed()) return false;
    return true;
  }

  ConditionReport* find(const std::string& name) {
    for (auto& c : conditions)
      if (c.condition == name) return &c;
    return nullptr;
  }
  const ConditionReport* find(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.condition == name) return &c;
    return nullptr;
  }
};

inline nlohmann::json to_json(const ConditionReport& c) {
  nlohmann::json viols = nlohmann::json::array();
  for (const auto& v : c.violations) {
    nlohmann::json x = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.x.size(); ++i) x.push_back(v.x[i]);
    viols.push_back({{"x", x}, {"phase", v.phase}, {"margin", v.margin}});
  }
  return {{"condition", c.condition},
          {"points_checked", c.points_checked},
          {"violations", viols},
          {"worst_margin", c.worst_margin},
          {"flags", c.flags}};
}

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : r.conditions) conds.push_back(to_json(c));
  return {{"conditions", conds},
          {"flags", r.flags},
          {"verdict", r.all_passed() ? "pass" : "fail"}};
}

}  // namespace hyclf
