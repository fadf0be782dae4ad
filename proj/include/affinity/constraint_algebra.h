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

// Constraint normalization, per-attribute compaction and node matching.
//
// Evaluation rules shared by raw and compacted constraints:
//   * EQ v    the attribute is present and its value is exactly v.
//   * NE v    the attribute is absent, or present with a value other than v.
//   * GE/LT   the attribute's numeric reading lies in range. Absent and Empty
//             read as 0; a Text value never satisfies a range.
//   * When an attribute carries at least one range operator in a task, its
//     integer NE operands are compared against the numeric reading as well,
//     so `{B} >= 0, {B} != 0` rejects nodes without B. NE operands that are
//     Text or Empty keep the plain NE rule.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affinity/trace_model.h"

namespace affinity {

class CompactedConstraint {
 public:
  enum class Form { kEqual, kNotEqualArray, kGreaterEqual, kLessThan, kBetween };

  static CompactedConstraint Equal(std::string attribute, AttributeValue value);
  /// `values` must be non-empty; duplicates are removed and the set sorted.
  static CompactedConstraint NotEqualArray(std::string attribute,
                                           std::vector<AttributeValue> values);
  static CompactedConstraint GreaterEqual(std::string attribute, std::int64_t lo,
                                          std::vector<AttributeValue> exclusions = {});
  static CompactedConstraint LessThan(std::string attribute, std::int64_t hi,
                                      std::vector<AttributeValue> exclusions = {});
  /// Requires lo < hi.
  static CompactedConstraint Between(std::string attribute, std::int64_t lo, std::int64_t hi,
                                     std::vector<AttributeValue> exclusions = {});

  const std::string& attribute() const { return attribute_; }
  Form form() const { return form_; }
  bool is_range() const {
    return form_ == Form::kGreaterEqual || form_ == Form::kLessThan || form_ == Form::kBetween;
  }
  /// Equal operand.
  const AttributeValue& value() const { return value_; }
  /// NotEqualArray members, or interior exclusions of a range form. Sorted.
  const std::vector<AttributeValue>& values() const { return values_; }
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }

  bool operator==(const CompactedConstraint&) const = default;

 private:
  CompactedConstraint(std::string attribute, Form form)
      : attribute_(std::move(attribute)), form_(form) {}

  std::string attribute_;
  Form form_;
  AttributeValue value_;
  std::vector<AttributeValue> values_;
  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
};

struct CompactedConstraintSet {
  std::map<std::string, CompactedConstraint, std::less<>> entries;

  bool empty() const { return entries.empty(); }
  bool operator==(const CompactedConstraintSet&) const = default;
};

/// Rewrites GT v as GE v+1 and LE v as LT v+1. Range operators on Text or
/// Empty operands raise Error(kTypeMismatch).
std::vector<RawConstraint> Normalize(std::span<const RawConstraint> constraints);

/// Collapses normalized constraints to one entry per attribute with the same
/// satisfying set. Raises Error(kUnsatisfiable) when no node value could
/// satisfy an attribute's constraints.
CompactedConstraintSet Compact(std::span<const RawConstraint> constraints);

/// Normalize followed by Compact.
CompactedConstraintSet NormalizeAndCompact(std::span<const RawConstraint> constraints);

/// `value` is the node's value for c.attribute(), or nullptr when absent.
bool Satisfies(const AttributeValue* value, const CompactedConstraint& c);
bool Satisfies(const Node& node, const CompactedConstraint& c);
bool Matches(const Node& node, const CompactedConstraintSet& constraints);

/// Evaluates one raw constraint against a node value (nullptr when absent).
/// `numeric_context` is true when the task carries a range operator on the
/// same attribute.
bool RawConstraintHolds(const AttributeValue* value, const RawConstraint& c,
                        bool numeric_context);

/// Direct evaluation of a task's raw constraints, without compaction.
/// Strict GT/LE operators are evaluated as written.
bool MatchesRaw(const Node& node, std::span<const RawConstraint> constraints);

/// Dataset category text for a compacted constraint, e.g. `E|GE|i:0`,
/// `AK|NEQ|s:qe,s:qg`, `C|BW|3:5`, `D|EQ|e:`; range forms with interior
/// exclusions append `!<tv>(,<tv>)*`.
std::string CanonicalLabel(const CompactedConstraint& c);

/// Labels of every entry, in attribute order.
std::vector<std::string> CanonicalLabels(const CompactedConstraintSet& constraints);

/// Raw constraints whose compaction reproduces `c`.
std::vector<RawConstraint> ToRawConstraints(const CompactedConstraint& c);

}  // namespace affinity
