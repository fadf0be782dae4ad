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

#include "affinity/synthetic_trace.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "affinity/constraint_algebra.h"
#include "affinity/random.h"
#include "affinity/status.h"

namespace affinity {

namespace {

constexpr std::uint64_t kGroupCLow = 501;
constexpr std::uint64_t kGroupCHigh = 1000;

enum class JobClass { kGroupA, kGroupC, kUnconstrained, kPool };

struct AttributeSchema {
  std::string name;
  bool integer = true;
  double presence = 1.0;
  std::int64_t range = 2;        // integer values lie in [0, range)
  std::uint32_t categories = 1;  // text values
};

// A constraint list plus the per-constraint numeric-context flags needed to
// evaluate it directly.
struct Template {
  std::vector<RawConstraint> raws;
  std::vector<bool> numeric;
  JobClass job_class = JobClass::kPool;

  bool Matches(const Node& node) const {
    for (std::size_t i = 0; i < raws.size(); ++i) {
      if (!RawConstraintHolds(node.Find(raws[i].attribute), raws[i], numeric[i])) return false;
    }
    return true;
  }
};

Template MakeTemplate(std::vector<RawConstraint> raws, JobClass job_class) {
  Template t;
  std::set<std::string> ranged;
  for (const RawConstraint& c : raws) {
    if (c.op != ConstraintOp::kEqual && c.op != ConstraintOp::kNotEqual) ranged.insert(c.attribute);
  }
  for (const RawConstraint& c : raws) t.numeric.push_back(ranged.count(c.attribute) > 0);
  t.raws = std::move(raws);
  t.job_class = job_class;
  return t;
}

std::string TextCategory(std::uint64_t k) {
  std::string out;
  out += static_cast<char>('a' + (k / 26) % 26);
  out += static_cast<char>('a' + k % 26);
  if (k >= 26 * 26) out += std::to_string(k / (26 * 26));
  return out;
}

std::string NodeName(std::uint64_t n) {
  std::string digits = std::to_string(n);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "n" + digits;
}

RawConstraint Raw(const std::string& attribute, ConstraintOp op, AttributeValue value) {
  return RawConstraint{attribute, op, std::move(value)};
}

class Generator {
 public:
  explicit Generator(const SyntheticTraceConfig& config)
      : config_(config), rng_(config.seed) {}

  SyntheticTrace Run();

 private:
  void BuildSchema();
  Node DrawNode(const std::string& id);
  AttributeValue DrawValue(const AttributeSchema& schema);
  std::int64_t DrawSkewed(std::int64_t bound);

  std::uint64_t Count(const Template& t) const;
  std::vector<RawConstraint> DrawConstraints(std::uint32_t count);
  void AppendConstraint(const AttributeSchema& schema, std::vector<RawConstraint>& out);
  bool Register(std::vector<RawConstraint> raws, JobClass job_class,
                std::vector<std::size_t>& bucket);

  void BuildGroupATemplates();
  void BuildGroupCTemplates();
  void BuildPoolTemplates();
  std::optional<RawConstraint> TightenIntoBand(const std::vector<const Node*>& matching,
                                                const std::set<std::string>& used);

  const SyntheticTraceConfig& config_;
  Rng rng_;
  std::vector<AttributeSchema> schema_;
  std::vector<Node> initial_nodes_;
  std::set<std::string> protected_nodes_;

  std::vector<Template> templates_;
  std::set<std::vector<std::string>> seen_labels_;
  std::vector<std::size_t> group_a_;
  std::vector<std::size_t> group_c_;
  std::vector<std::size_t> pool_;
  std::size_t unconstrained_ = 0;
};

void Generator::BuildSchema() {
  const auto n = config_.n_attributes;
  const auto n_integer = static_cast<std::uint32_t>(
      std::llround(config_.integer_attribute_ratio * static_cast<double>(n)));
  std::vector<char> kinds(n, 0);
  for (std::uint32_t i = 0; i < n_integer && i < n; ++i) kinds[i] = 1;
  rng_.Shuffle(std::span<char>(kinds));
  for (std::uint32_t i = 0; i < n; ++i) {
    AttributeSchema s;
    s.name = AttributeName(i);
    s.integer = kinds[i] != 0;
    s.presence = rng_.Uniform(0.4, 1.0);
    s.range = rng_.Between(2, 48);
    s.categories = config_.categories_per_text_attribute;
    schema_.push_back(std::move(s));
  }
}

std::int64_t Generator::DrawSkewed(std::int64_t bound) {
  const double u = rng_.Uniform();
  return std::min<std::int64_t>(bound - 1, static_cast<std::int64_t>(u * u * static_cast<double>(bound)));
}

AttributeValue Generator::DrawValue(const AttributeSchema& schema) {
  if (rng_.Bernoulli(0.03)) return AttributeValue::Empty();
  if (schema.integer) return AttributeValue::Integer(DrawSkewed(schema.range));
  return AttributeValue::Text(TextCategory(static_cast<std::uint64_t>(DrawSkewed(schema.categories))));
}

Node Generator::DrawNode(const std::string& id) {
  Node node;
  node.id = id;
  for (const AttributeSchema& s : schema_) {
    if (rng_.Bernoulli(s.presence)) node.attributes.emplace(s.name, DrawValue(s));
  }
  return node;
}

std::uint64_t Generator::Count(const Template& t) const {
  std::uint64_t count = 0;
  for (const Node& node : initial_nodes_) count += t.Matches(node) ? 1 : 0;
  return count;
}

void Generator::AppendConstraint(const AttributeSchema& s, std::vector<RawConstraint>& out) {
  const double u = rng_.Uniform();
  if (s.integer) {
    const std::int64_t r = s.range;
    if (u < 0.28) {
      out.push_back(Raw(s.name, ConstraintOp::kGreaterEqual, AttributeValue::Integer(rng_.Between(0, r - 1))));
    } else if (u < 0.40) {
      out.push_back(Raw(s.name, ConstraintOp::kLessThan, AttributeValue::Integer(rng_.Between(1, r))));
    } else if (u < 0.55) {
      const std::int64_t a = rng_.Between(0, r - 2);
      const std::int64_t b = rng_.Between(a + 1, r);
      out.push_back(Raw(s.name, ConstraintOp::kGreaterEqual, AttributeValue::Integer(a)));
      out.push_back(Raw(s.name, ConstraintOp::kLessThan, AttributeValue::Integer(b)));
    } else if (u < 0.62) {
      out.push_back(Raw(s.name, ConstraintOp::kGreaterThan, AttributeValue::Integer(rng_.Between(0, r - 1))));
    } else if (u < 0.67) {
      out.push_back(Raw(s.name, ConstraintOp::kLessEqual, AttributeValue::Integer(rng_.Between(0, r - 1))));
    } else if (u < 0.77) {
      out.push_back(Raw(s.name, ConstraintOp::kEqual, AttributeValue::Integer(DrawSkewed(r))));
    } else if (u < 0.87) {
      const auto n = rng_.Between(1, 2);
      for (std::int64_t i = 0; i < n; ++i) {
        out.push_back(Raw(s.name, ConstraintOp::kNotEqual, AttributeValue::Integer(DrawSkewed(r))));
      }
    } else {
      // Bound plus an exclusion at its edge or inside it.
      const std::int64_t a = rng_.Between(0, r - 1);
      out.push_back(Raw(s.name, ConstraintOp::kGreaterEqual, AttributeValue::Integer(a)));
      out.push_back(Raw(s.name, ConstraintOp::kNotEqual, AttributeValue::Integer(rng_.Between(a, r - 1))));
    }
    return;
  }
  const auto category = [&] {
    return AttributeValue::Text(TextCategory(static_cast<std::uint64_t>(DrawSkewed(s.categories))));
  };
  if (u < 0.40) {
    out.push_back(Raw(s.name, ConstraintOp::kEqual, category()));
  } else if (u < 0.85) {
    const auto n = rng_.Between(1, 3);
    for (std::int64_t i = 0; i < n; ++i) out.push_back(Raw(s.name, ConstraintOp::kNotEqual, category()));
  } else {
    out.push_back(Raw(s.name, ConstraintOp::kEqual, AttributeValue::Empty()));
  }
}

std::vector<RawConstraint> Generator::DrawConstraints(std::uint32_t count) {
  std::vector<RawConstraint> out;
  if (schema_.empty()) return out;
  std::vector<std::size_t> order(schema_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng_.Shuffle(std::span<std::size_t>(order));
  for (std::uint32_t i = 0; i < count && i < order.size(); ++i) {
    AppendConstraint(schema_[order[i]], out);
  }
  return out;
}

bool Generator::Register(std::vector<RawConstraint> raws, JobClass job_class,
                         std::vector<std::size_t>& bucket) {
  std::vector<std::string> labels;
  try {
    labels = CanonicalLabels(NormalizeAndCompact(raws));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUnsatisfiable) return false;
    throw;
  }
  if (!seen_labels_.insert(labels).second) return false;
  bucket.push_back(templates_.size());
  templates_.push_back(MakeTemplate(std::move(raws), job_class));
  return true;
}

void Generator::BuildGroupATemplates() {
  // Signature: equalities on the node's rarest values until it is the only
  // match.
  std::vector<std::size_t> order(initial_nodes_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng_.Shuffle(std::span<std::size_t>(order));

  std::map<std::string, std::map<AttributeValue, std::uint64_t>> frequency;
  for (const Node& node : initial_nodes_) {
    for (const auto& [name, value] : node.attributes) ++frequency[name][value];
  }

  const std::size_t max_probes = std::min<std::size_t>(order.size(), 50u * config_.group_a_targets);
  for (std::size_t probe = 0; probe < max_probes && group_a_.size() < config_.group_a_targets; ++probe) {
    const Node& target = initial_nodes_[order[probe]];
    std::vector<std::pair<std::uint64_t, std::string>> by_rarity;
    for (const auto& [name, value] : target.attributes) {
      by_rarity.emplace_back(frequency[name][value], name);
    }
    std::sort(by_rarity.begin(), by_rarity.end());
    std::vector<const Node*> candidates;
    for (const Node& node : initial_nodes_) candidates.push_back(&node);
    std::vector<RawConstraint> raws;
    for (const auto& [freq, name] : by_rarity) {
      const AttributeValue& v = target.attributes.at(name);
      raws.push_back(Raw(name, ConstraintOp::kEqual, v));
      std::erase_if(candidates, [&](const Node* n) {
        const AttributeValue* other = n->Find(name);
        return other == nullptr || *other != v;
      });
      if (candidates.size() == 1) break;
    }
    if (candidates.size() != 1) continue;
    if (Register(std::move(raws), JobClass::kGroupA, group_a_)) {
      protected_nodes_.insert(target.id);
    }
  }
}

std::optional<RawConstraint> Generator::TightenIntoBand(const std::vector<const Node*>& matching,
                                                        const std::set<std::string>& used) {
  std::vector<std::size_t> order(schema_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng_.Shuffle(std::span<std::size_t>(order));
  for (std::size_t idx : order) {
    const AttributeSchema& s = schema_[idx];
    if (used.count(s.name)) continue;
    std::vector<RawConstraint> options;
    if (s.integer) {
      // Numeric readings of the matching nodes; absent/Empty read 0.
      std::map<std::int64_t, std::uint64_t> histogram;
      for (const Node* n : matching) {
        const AttributeValue* v = n->Find(s.name);
        if (v == nullptr || v->is_empty()) ++histogram[0];
        else if (v->is_integer()) ++histogram[v->integer()];
      }
      std::uint64_t at_or_above = 0;
      for (auto it = histogram.rbegin(); it != histogram.rend(); ++it) {
        at_or_above += it->second;
        if (at_or_above >= kGroupCLow && at_or_above <= kGroupCHigh) {
          options.push_back(Raw(s.name, ConstraintOp::kGreaterEqual, AttributeValue::Integer(it->first)));
        }
      }
      std::uint64_t below = 0;
      for (const auto& [value, n] : histogram) {
        if (below >= kGroupCLow && below <= kGroupCHigh) {
          options.push_back(Raw(s.name, ConstraintOp::kLessThan, AttributeValue::Integer(value)));
        }
        below += n;
      }
    } else {
      std::map<AttributeValue, std::uint64_t> histogram;
      for (const Node* n : matching) {
        if (const AttributeValue* v = n->Find(s.name)) ++histogram[*v];
      }
      for (const auto& [value, n] : histogram) {
        if (n >= kGroupCLow && n <= kGroupCHigh) options.push_back(Raw(s.name, ConstraintOp::kEqual, value));
      }
    }
    if (!options.empty()) return options[rng_.Below(options.size())];
  }
  return std::nullopt;
}

void Generator::BuildGroupCTemplates() {
  const std::size_t max_attempts = 200u * config_.group_c_templates;
  for (std::size_t attempt = 0; attempt < max_attempts && group_c_.size() < config_.group_c_templates;
       ++attempt) {
    const auto extra = static_cast<std::uint32_t>(
        rng_.Between(0, std::max<std::int64_t>(0, config_.max_constraints_per_task - 1)));
    std::vector<RawConstraint> raws = DrawConstraints(extra);
    const Template base = MakeTemplate(raws, JobClass::kGroupC);
    std::vector<const Node*> matching;
    for (const Node& node : initial_nodes_) {
      if (base.Matches(node)) matching.push_back(&node);
    }
    if (matching.size() < kGroupCLow) continue;
    std::set<std::string> used;
    for (const RawConstraint& c : raws) used.insert(c.attribute);
    auto tightening = TightenIntoBand(matching, used);
    if (!tightening) continue;
    raws.push_back(*tightening);
    const std::uint64_t count = Count(MakeTemplate(raws, JobClass::kGroupC));
    if (count < kGroupCLow || count > kGroupCHigh) continue;
    Register(std::move(raws), JobClass::kGroupC, group_c_);
  }
}

void Generator::BuildPoolTemplates() {
  const std::size_t max_attempts = 50u * config_.constraint_templates;
  for (std::size_t attempt = 0; attempt < max_attempts && pool_.size() < config_.constraint_templates;
       ++attempt) {
    const auto k = static_cast<std::uint32_t>(
        rng_.Between(config_.min_constraints_per_task, config_.max_constraints_per_task));
    std::vector<RawConstraint> raws = DrawConstraints(k);
    const std::uint64_t count = Count(MakeTemplate(raws, JobClass::kPool));
    if (count == 0) continue;
    if (count == 1 && initial_nodes_.size() > 1) continue;
    if (count >= kGroupCLow && count <= kGroupCHigh) continue;
    Register(std::move(raws), JobClass::kPool, pool_);
  }
}

SyntheticTrace Generator::Run() {
  config_.Validate();
  const bool wants_a = config_.group_a_fraction > 0.0;
  const bool wants_c = config_.group_c_fraction > 0.0;
  if ((wants_a || wants_c) && (config_.n_attributes == 0 || config_.max_constraints_per_task == 0)) {
    Fail(ErrorCode::kInfeasibleConfig, "group A/C tasks need attributes and constraints");
  }
  if (wants_c && config_.n_nodes < kGroupCLow) {
    Fail(ErrorCode::kInfeasibleConfig, "group C needs more than 500 nodes");
  }

  BuildSchema();
  for (std::uint32_t i = 0; i < config_.n_nodes; ++i) {
    initial_nodes_.push_back(DrawNode(NodeName(i)));
  }
  std::uint64_t next_node = config_.n_nodes;

  std::vector<std::size_t> unconstrained_bucket;
  Register({}, JobClass::kUnconstrained, unconstrained_bucket);
  unconstrained_ = unconstrained_bucket.front();
  if (wants_a) {
    BuildGroupATemplates();
    if (group_a_.empty()) Fail(ErrorCode::kInfeasibleConfig, "no node has a unique attribute combination");
  }
  if (wants_c) {
    BuildGroupCTemplates();
    if (group_c_.empty()) Fail(ErrorCode::kInfeasibleConfig, "no constraint set lands in group C");
  }
  if (config_.max_constraints_per_task > 0 && config_.n_attributes > 0) BuildPoolTemplates();
  if (pool_.empty()) pool_.push_back(unconstrained_);

  // Job classes by exact quota, then shuffled.
  const auto quota = [&](double fraction) {
    return static_cast<std::uint32_t>(std::llround(fraction * config_.n_jobs));
  };
  std::vector<JobClass> classes;
  auto push = [&](JobClass c, std::uint32_t n) {
    for (std::uint32_t i = 0; i < n && classes.size() < config_.n_jobs; ++i) classes.push_back(c);
  };
  push(JobClass::kGroupA, quota(config_.group_a_fraction));
  push(JobClass::kGroupC, quota(config_.group_c_fraction));
  push(JobClass::kUnconstrained, quota(config_.unconstrained_fraction));
  push(JobClass::kPool, config_.n_jobs);
  rng_.Shuffle(std::span<JobClass>(classes));

  auto pick = [&](JobClass c) -> std::size_t {
    switch (c) {
      case JobClass::kGroupA: return group_a_[rng_.Below(group_a_.size())];
      case JobClass::kGroupC: return group_c_[rng_.Below(group_c_.size())];
      case JobClass::kUnconstrained: return unconstrained_;
      case JobClass::kPool: return pool_[rng_.Below(pool_.size())];
    }
    return unconstrained_;
  };

  SyntheticTrace trace;
  for (const Node& node : initial_nodes_) trace.node_events.push_back({0, NodeAdd{node}});

  struct TimedTask {
    TraceEvent event;
    std::size_t template_id;
  };
  std::vector<TimedTask> task_events;
  const std::uint64_t spacing = config_.job_spacing_us;
  std::uint64_t horizon = 0;
  for (std::uint32_t j = 0; j < config_.n_jobs; ++j) {
    const std::uint64_t job_id = 1'000'000 + j;
    const std::uint64_t submit_at = (j + 1) * spacing;
    const auto n_tasks = static_cast<std::uint32_t>(
        rng_.Between(config_.min_tasks_per_job, config_.max_tasks_per_job));
    const auto n_configs = static_cast<std::uint32_t>(std::min<std::int64_t>(
        n_tasks, rng_.Between(1, config_.max_configs_per_job)));
    std::vector<std::pair<double, double>> resources;
    for (std::uint32_t c = 0; c < n_configs; ++c) {
      resources.emplace_back(static_cast<double>(rng_.Between(1, 256)) / 1024.0,
                             static_cast<double>(rng_.Between(1, 256)) / 1024.0);
    }
    const std::size_t first = pick(classes[j]);
    const bool updated = rng_.Bernoulli(config_.task_update_fraction);
    const bool finished = rng_.Bernoulli(config_.task_finish_fraction);
    const std::size_t second = updated ? pick(classes[j]) : first;
    const std::uint64_t update_at = submit_at + static_cast<std::uint64_t>(rng_.Between(1, 30)) * spacing;
    const std::uint64_t finish_at = submit_at + static_cast<std::uint64_t>(rng_.Between(31, 120)) * spacing;
    for (std::uint32_t i = 0; i < n_tasks; ++i) {
      TaskSpec spec;
      spec.job_id = job_id;
      spec.task_index = i;
      spec.cpu = resources[i % n_configs].first;
      spec.mem = resources[i % n_configs].second;
      spec.constraints = templates_[first].raws;
      task_events.push_back({{submit_at, TaskSubmit{spec}}, first});
      if (updated) {
        spec.constraints = templates_[second].raws;
        task_events.push_back({{update_at, TaskUpdate{spec}}, second});
      }
      if (finished) task_events.push_back({{finish_at, TaskFinish{spec.key()}}, second});
    }
    horizon = std::max(horizon, finished ? finish_at : (updated ? update_at : submit_at));
  }
  std::stable_sort(task_events.begin(), task_events.end(),
                   [](const TimedTask& a, const TimedTask& b) {
                     return a.event.timestamp < b.event.timestamp;
                   });

  // Node churn, interval by interval, never touching group-A targets.
  std::vector<std::string> live_ids;
  std::unordered_map<std::string, std::size_t> live_pos;
  for (const Node& node : initial_nodes_) {
    if (!protected_nodes_.count(node.id)) {
      live_pos[node.id] = live_ids.size();
      live_ids.push_back(node.id);
    }
  }
  auto drop_live = [&](const std::string& id) {
    const std::size_t pos = live_pos.at(id);
    live_pos[live_ids.back()] = pos;
    std::swap(live_ids[pos], live_ids.back());
    live_ids.pop_back();
    live_pos.erase(id);
  };
  const std::uint64_t interval = config_.interval_us;
  for (std::uint64_t start = 0; start <= horizon; start += interval) {
    std::vector<std::uint64_t> times;
    for (std::uint32_t i = 0; i < config_.churn_per_interval; ++i) {
      times.push_back(start + rng_.Below(interval));
    }
    std::sort(times.begin(), times.end());
    for (std::uint64_t at : times) {
      const double u = rng_.Uniform();
      if (u < 0.1 || live_ids.empty()) {
        const std::string id = NodeName(next_node++);
        live_pos[id] = live_ids.size();
        live_ids.push_back(id);
        trace.node_events.push_back({at, NodeAdd{DrawNode(id)}});
      } else if (u < 0.2 && live_ids.size() > 1) {
        const std::string id = live_ids[rng_.Below(live_ids.size())];
        drop_live(id);
        trace.node_events.push_back({at, NodeRemove{id}});
      } else {
        const std::string id = live_ids[rng_.Below(live_ids.size())];
        trace.node_events.push_back({at, NodeUpdate{DrawNode(id)}});
      }
    }
  }

  // Replay both streams (node events first at equal timestamps), tracking
  // each template's count by per-node deltas.
  std::map<std::string, Node> nodes;
  std::vector<std::uint64_t> counts(templates_.size(), 0);
  std::map<TaskKey, std::size_t> live_tasks;
  auto apply_node = [&](const Node* before, const Node* after) {
    for (std::size_t t = 0; t < templates_.size(); ++t) {
      if (before && templates_[t].Matches(*before)) --counts[t];
      if (after && templates_[t].Matches(*after)) ++counts[t];
    }
  };
  std::size_t ni = 0;
  std::size_t ti = 0;
  while (ni < trace.node_events.size() || ti < task_events.size()) {
    const bool node_next =
        ni < trace.node_events.size() &&
        (ti == task_events.size() || trace.node_events[ni].timestamp <= task_events[ti].event.timestamp);
    if (node_next) {
      const TraceEvent& e = trace.node_events[ni++];
      if (const auto* add = std::get_if<NodeAdd>(&e.payload)) {
        apply_node(nullptr, &add->node);
        nodes[add->node.id] = add->node;
      } else if (const auto* update = std::get_if<NodeUpdate>(&e.payload)) {
        Node& current = nodes.at(update->node.id);
        apply_node(&current, &update->node);
        current = update->node;
      } else if (const auto* remove = std::get_if<NodeRemove>(&e.payload)) {
        apply_node(&nodes.at(remove->node_id), nullptr);
        nodes.erase(remove->node_id);
      }
      continue;
    }
    const TimedTask& t = task_events[ti++];
    if (const auto* finish = std::get_if<TaskFinish>(&t.event.payload)) {
      trace.oracle[finish->key] = counts[live_tasks.at(finish->key)];
      live_tasks.erase(finish->key);
    } else if (const auto* submit = std::get_if<TaskSubmit>(&t.event.payload)) {
      live_tasks[submit->task.key()] = t.template_id;
    } else if (const auto* update = std::get_if<TaskUpdate>(&t.event.payload)) {
      live_tasks[update->task.key()] = t.template_id;
    }
  }
  for (const auto& [key, template_id] : live_tasks) trace.oracle[key] = counts[template_id];

  // Exhaustive check of the tracked counts against the final node set.
  for (std::size_t t = 0; t < templates_.size(); ++t) {
    std::uint64_t exhaustive = 0;
    for (const auto& [id, node] : nodes) exhaustive += MatchesRaw(node, templates_[t].raws) ? 1 : 0;
    if (exhaustive != counts[t]) {
      throw std::logic_error("synthetic oracle diverged from exhaustive matching");
    }
  }

  trace.task_events.reserve(task_events.size());
  for (TimedTask& t : task_events) trace.task_events.push_back(std::move(t.event));
  return trace;
}

}  // namespace

void SyntheticTraceConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) Fail(ErrorCode::kInvalidArgument, what);
  };
  auto fraction = [](double f) { return f >= 0.0 && f <= 1.0; };
  require(n_nodes >= 1, "n_nodes must be positive");
  require(n_jobs >= 1, "n_jobs must be positive");
  require(min_tasks_per_job >= 1 && max_tasks_per_job >= min_tasks_per_job, "tasks per job range");
  require(max_configs_per_job >= 1, "max_configs_per_job must be positive");
  require(max_constraints_per_task >= min_constraints_per_task, "constraints per task range");
  require(categories_per_text_attribute >= 1, "categories_per_text_attribute must be positive");
  require(constraint_templates >= 1 && group_a_targets >= 1 && group_c_templates >= 1,
          "template counts must be positive");
  require(interval_us > 0 && job_spacing_us > 0, "interval and spacing must be positive");
  require(fraction(integer_attribute_ratio) && fraction(group_a_fraction) &&
              fraction(group_c_fraction) && fraction(unconstrained_fraction) &&
              fraction(task_update_fraction) && fraction(task_finish_fraction),
          "fractions must lie in [0,1]");
  require(group_a_fraction + group_c_fraction + unconstrained_fraction <= 1.0 + 1e-12,
          "group mix fractions must sum to at most 1");
}

SyntheticTrace GenerateSyntheticTrace(const SyntheticTraceConfig& config) {
  return Generator(config).Run();
}

SyntheticTraceConfig SyntheticPreset(std::string_view name, std::uint64_t seed) {
  SyntheticTraceConfig config;
  config.seed = seed;
  if (name == "small") return config;
  if (name == "desk") {
    config.n_nodes = 12500;
    config.n_jobs = 3600;
    config.group_a_fraction = 0.05;
    config.group_c_fraction = 0.05;
    config.unconstrained_fraction = 0.2;
    return config;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown preset '" + std::string(name) + "'");
}

std::string AttributeName(std::uint32_t index) {
  std::string name;
  std::uint64_t n = static_cast<std::uint64_t>(index) + 1;
  while (n > 0) {
    --n;
    name.insert(name.begin(), static_cast<char>('A' + n % 26));
    n /= 26;
  }
  return name;
}

}  // namespace affinity
