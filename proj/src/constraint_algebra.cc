// Copyright 2026 The Affinity Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "affinity/constraint_algebra.h"

#include <algorithm>
#include <limits>
#include <set>

#include "affinity/status.h"

namespace affinity {

namespace {

constexpr std::int64_t kMinInt = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kMaxInt = std::numeric_limits<std::int64_t>::max();

bool IsRangeOp(ConstraintOp op) {
  return op == ConstraintOp::kLessThan || op == ConstraintOp::kGreaterEqual ||
         op == ConstraintOp::kGreaterThan || op == ConstraintOp::kLessEqual;
}

// Numeric reading used by range operators: absent and Empty are 0, Text has
// no reading.
std::optional<std::int64_t> NumericReading(const AttributeValue* value) {
  if (value == nullptr || value->is_empty()) return 0;
  if (value->is_integer()) return value->integer();
  return std::nullopt;
}

bool RawHolds(const AttributeValue* value, const RawConstraint& c, bool numeric_context) {
  switch (c.op) {
    case ConstraintOp::kEqual:
      return value != nullptr && *value == c.value;
    case ConstraintOp::kNotEqual:
      if (numeric_context && c.value.is_integer()) {
        auto x = NumericReading(value);
        return !x || *x != c.value.integer();
      }
      return value == nullptr || *value != c.value;
    default:
      break;
  }
  auto x = NumericReading(value);
  if (!x || !c.value.is_integer()) return false;
  const std::int64_t v = c.value.integer();
  switch (c.op) {
    case ConstraintOp::kLessThan: return *x < v;
    case ConstraintOp::kGreaterEqual: return *x >= v;
    case ConstraintOp::kGreaterThan: return *x > v;
    case ConstraintOp::kLessEqual: return *x <= v;
    default: return false;
  }
}

std::vector<AttributeValue> SortedUnique(std::vector<AttributeValue> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

[[noreturn]] void Unsatisfiable(const std::string& attribute, const std::string& why) {
  Fail(ErrorCode::kUnsatisfiable, "attribute " + attribute + ": " + why);
}

CompactedConstraint CompactAttribute(const std::string& attribute,
                                     const std::vector<const RawConstraint*>& group) {
  std::vector<AttributeValue> equals;
  std::vector<AttributeValue> not_equals;
  std::optional<std::int64_t> lo;
  std::optional<std::int64_t> hi;
  for (const RawConstraint* c : group) {
    switch (c->op) {
      case ConstraintOp::kEqual: equals.push_back(c->value); break;
      case ConstraintOp::kNotEqual: not_equals.push_back(c->value); break;
      case ConstraintOp::kGreaterEqual:
        lo = lo ? std::max(*lo, c->value.integer()) : c->value.integer();
        break;
      case ConstraintOp::kLessThan:
        hi = hi ? std::min(*hi, c->value.integer()) : c->value.integer();
        break;
      default:
        Fail(ErrorCode::kInvalidArgument, "compact() requires normalized constraints");
    }
  }
  const bool numeric_context = lo || hi;

  equals = SortedUnique(std::move(equals));
  if (!equals.empty()) {
    if (equals.size() > 1) Unsatisfiable(attribute, "conflicting equalities");
    // The only candidate node state is "present with exactly this value".
    const AttributeValue& v = equals.front();
    for (const RawConstraint* c : group) {
      if (!RawHolds(&v, *c, numeric_context)) {
        Unsatisfiable(attribute, "equality excluded by " + std::string(ConstraintOpToken(c->op)));
      }
    }
    return CompactedConstraint::Equal(attribute, v);
  }

  if (!numeric_context) {
    return CompactedConstraint::NotEqualArray(attribute, std::move(not_equals));
  }

  std::set<std::int64_t> excluded;
  bool empty_excluded = false;
  for (const AttributeValue& v : not_equals) {
    if (v.is_integer()) excluded.insert(v.integer());
    if (v.is_empty()) empty_excluded = true;
    // Text operands are implied: a Text value never satisfies a range.
  }

  std::int64_t low = lo.value_or(kMinInt);
  bool has_low = lo.has_value();
  if (hi && low >= *hi) Unsatisfiable(attribute, "empty range");
  while (excluded.count(low)) {
    if (low == kMaxInt) Unsatisfiable(attribute, "range fully excluded");
    ++low;
    has_low = true;
    if (hi && low >= *hi) Unsatisfiable(attribute, "range fully excluded");
  }
  while (hi && excluded.count(*hi - 1)) {
    --*hi;
    if (low >= *hi) Unsatisfiable(attribute, "range fully excluded");
  }

  std::vector<AttributeValue> interior;
  for (std::int64_t v : excluded) {
    if (v > low && (!hi || v < *hi - 1)) interior.push_back(AttributeValue::Integer(v));
  }
  const bool zero_in_range = low <= 0 && (!hi || 0 < *hi) && !excluded.count(0);
  if (empty_excluded && zero_in_range) interior.push_back(AttributeValue::Empty());

  if (has_low && hi) {
    return CompactedConstraint::Between(attribute, low, *hi, std::move(interior));
  }
  if (has_low) return CompactedConstraint::GreaterEqual(attribute, low, std::move(interior));
  return CompactedConstraint::LessThan(attribute, *hi, std::move(interior));
}

}  // namespace

CompactedConstraint CompactedConstraint::Equal(std::string attribute, AttributeValue value) {
  CompactedConstraint c(std::move(attribute), Form::kEqual);
  c.value_ = std::move(value);
  return c;
}

CompactedConstraint CompactedConstraint::NotEqualArray(std::string attribute,
                                                       std::vector<AttributeValue> values) {
  if (values.empty()) Fail(ErrorCode::kInvalidArgument, "empty not-equal array");
  CompactedConstraint c(std::move(attribute), Form::kNotEqualArray);
  c.values_ = SortedUnique(std::move(values));
  return c;
}

CompactedConstraint CompactedConstraint::GreaterEqual(std::string attribute, std::int64_t lo,
                                                      std::vector<AttributeValue> exclusions) {
  CompactedConstraint c(std::move(attribute), Form::kGreaterEqual);
  c.lo_ = lo;
  c.values_ = SortedUnique(std::move(exclusions));
  return c;
}

CompactedConstraint CompactedConstraint::LessThan(std::string attribute, std::int64_t hi,
                                                  std::vector<AttributeValue> exclusions) {
  CompactedConstraint c(std::move(attribute), Form::kLessThan);
  c.hi_ = hi;
  c.values_ = SortedUnique(std::move(exclusions));
  return c;
}

CompactedConstraint CompactedConstraint::Between(std::string attribute, std::int64_t lo,
                                                 std::int64_t hi,
                                                 std::vector<AttributeValue> exclusions) {
  if (lo >= hi) Fail(ErrorCode::kInvalidArgument, "between requires lo < hi");
  CompactedConstraint c(std::move(attribute), Form::kBetween);
  c.lo_ = lo;
  c.hi_ = hi;
  c.values_ = SortedUnique(std::move(exclusions));
  return c;
}

std::vector<RawConstraint> Normalize(std::span<const RawConstraint> constraints) {
  std::vector<RawConstraint> out;
  out.reserve(constraints.size());
  for (const RawConstraint& c : constraints) {
    if (IsRangeOp(c.op) && !c.value.is_integer()) {
      Fail(ErrorCode::kTypeMismatch, "attribute " + c.attribute + ": " +
                                         std::string(ConstraintOpToken(c.op)) +
                                         " needs an integer operand");
    }
    RawConstraint n = c;
    if (c.op == ConstraintOp::kGreaterThan) {
      const std::int64_t v = c.value.integer();
      // Nothing is greater than the largest integer: an empty range.
      if (v == kMaxInt) {
        n.op = ConstraintOp::kLessThan;
        n.value = AttributeValue::Integer(kMinInt);
      } else {
        n.op = ConstraintOp::kGreaterEqual;
        n.value = AttributeValue::Integer(v + 1);
      }
    } else if (c.op == ConstraintOp::kLessEqual) {
      const std::int64_t v = c.value.integer();
      if (v == kMaxInt) {
        n.op = ConstraintOp::kGreaterEqual;
        n.value = AttributeValue::Integer(kMinInt);
      } else {
        n.op = ConstraintOp::kLessThan;
        n.value = AttributeValue::Integer(v + 1);
      }
    }
    out.push_back(std::move(n));
  }
  return out;
}

CompactedConstraintSet Compact(std::span<const RawConstraint> constraints) {
  std::map<std::string, std::vector<const RawConstraint*>> groups;
  for (const RawConstraint& c : constraints) groups[c.attribute].push_back(&c);
  CompactedConstraintSet out;
  for (const auto& [attribute, group] : groups) {
    out.entries.emplace(attribute, CompactAttribute(attribute, group));
  }
  return out;
}

CompactedConstraintSet NormalizeAndCompact(std::span<const RawConstraint> constraints) {
  const std::vector<RawConstraint> normalized = Normalize(constraints);
  return Compact(normalized);
}

bool Satisfies(const AttributeValue* value, const CompactedConstraint& c) {
  using Form = CompactedConstraint::Form;
  switch (c.form()) {
    case Form::kEqual:
      return value != nullptr && *value == c.value();
    case Form::kNotEqualArray:
      return value == nullptr ||
             !std::binary_search(c.values().begin(), c.values().end(), *value);
    default:
      break;
  }
  auto x = NumericReading(value);
  if (!x) return false;
  if (c.form() != Form::kLessThan && *x < c.lo()) return false;
  if (c.form() != Form::kGreaterEqual && *x >= c.hi()) return false;
  if (c.values().empty()) return true;
  if (std::binary_search(c.values().begin(), c.values().end(), AttributeValue::Integer(*x))) {
    return false;
  }
  return !(value != nullptr && value->is_empty() && c.values().back().is_empty());
}

bool Satisfies(const Node& node, const CompactedConstraint& c) {
  return Satisfies(node.Find(c.attribute()), c);
}

bool Matches(const Node& node, const CompactedConstraintSet& constraints) {
  for (const auto& [attribute, c] : constraints.entries) {
    if (!Satisfies(node.Find(attribute), c)) return false;
  }
  return true;
}

bool RawConstraintHolds(const AttributeValue* value, const RawConstraint& c,
                        bool numeric_context) {
  return RawHolds(value, c, numeric_context);
}

bool MatchesRaw(const Node& node, std::span<const RawConstraint> constraints) {
  std::set<std::string_view> numeric;
  for (const RawConstraint& c : constraints) {
    if (IsRangeOp(c.op)) numeric.insert(c.attribute);
  }
  for (const RawConstraint& c : constraints) {
    if (!RawHolds(node.Find(c.attribute), c, numeric.count(c.attribute) > 0)) return false;
  }
  return true;
}

std::string CanonicalLabel(const CompactedConstraint& c) {
  using Form = CompactedConstraint::Form;
  auto join = [](const std::vector<AttributeValue>& values) {
    std::string out;
    for (const AttributeValue& v : values) {
      if (!out.empty()) out += ',';
      out += FormatTaggedValue(v);
    }
    return out;
  };
  std::string label = c.attribute();
  switch (c.form()) {
    case Form::kEqual:
      return label + "|EQ|" + FormatTaggedValue(c.value());
    case Form::kNotEqualArray:
      return label + "|NEQ|" + join(c.values());
    case Form::kGreaterEqual:
      label += "|GE|i:" + std::to_string(c.lo());
      break;
    case Form::kLessThan:
      label += "|LT|i:" + std::to_string(c.hi());
      break;
    case Form::kBetween:
      label += "|BW|" + std::to_string(c.lo()) + ":" + std::to_string(c.hi());
      break;
  }
  if (!c.values().empty()) label += "!" + join(c.values());
  return label;
}

std::vector<std::string> CanonicalLabels(const CompactedConstraintSet& constraints) {
  std::vector<std::string> labels;
  labels.reserve(constraints.entries.size());
  for (const auto& [attribute, c] : constraints.entries) labels.push_back(CanonicalLabel(c));
  return labels;
}

std::vector<RawConstraint> ToRawConstraints(const CompactedConstraint& c) {
  using Form = CompactedConstraint::Form;
  std::vector<RawConstraint> out;
  auto add = [&](ConstraintOp op, AttributeValue v) {
    out.push_back(RawConstraint{c.attribute(), op, std::move(v)});
  };
  switch (c.form()) {
    case Form::kEqual:
      add(ConstraintOp::kEqual, c.value());
      return out;
    case Form::kNotEqualArray:
      break;
    case Form::kGreaterEqual:
      add(ConstraintOp::kGreaterEqual, AttributeValue::Integer(c.lo()));
      break;
    case Form::kLessThan:
      add(ConstraintOp::kLessThan, AttributeValue::Integer(c.hi()));
      break;
    case Form::kBetween:
      add(ConstraintOp::kGreaterEqual, AttributeValue::Integer(c.lo()));
      add(ConstraintOp::kLessThan, AttributeValue::Integer(c.hi()));
      break;
  }
  for (const AttributeValue& v : c.values()) add(ConstraintOp::kNotEqual, v);
  return out;
}

}  // namespace affinity
