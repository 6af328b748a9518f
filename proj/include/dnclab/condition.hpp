#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dnclab {

enum class Status { pass, fail, unverified, out_of_scope, by_construction };

constexpr std::string_view to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::unverified: return "unverified";
    case Status::out_of_scope: return "out_of_scope";
    case Status::by_construction: return "by_construction";
  }
  return "fail";
}

/// One verified (or deliberately unverified) condition with its evidence.
struct ConditionResult {
  std::string condition;
  Status status = Status::pass;
  std::string evidence;
  /// Whether the object under test claims this property. Unclaimed
  /// properties are measured but never fail a report.
  bool claimed = true;
};

struct ConditionReport {
  std::vector<ConditionResult> conditions;

  bool passed() const {
    for (const auto& c : conditions)
      if (c.claimed && c.status == Status::fail) return false;
    return true;
  }

  const ConditionResult* find(std::string_view name) const {
    for (const auto& c : conditions)
      if (c.condition == name) return &c;
    return nullptr;
  }

  Status status_of(std::string_view name) const {
    const ConditionResult* c = find(name);
    return c ? c->status : Status::unverified;
  }
};

}  // namespace dnclab
