#pragma once

// Formal reasoning plans.  A plan is a topologically ordered list of steps
// (1-based indexes); each step is one of seven operations over entity sets:
//
//   atomic        seed entity -> neighbor set across one relation
//   join          step result -> union of neighbor sets across one relation
//   filter        keep members satisfying a predicate
//   union / difference / intersection   binary set algebra
//   groupby       identity on members, attaches multiplicity metadata
//
// Seeds are concrete entities, typed holes (filled during realization), or
// ambiguous surface references (expanded into branches at execution time).

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kgqa/schema.hpp"

namespace kgqa {

enum class OpKind { Atomic, Join, Filter, Union, Difference, Intersection,
                    GroupBy };

inline std::string op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::Atomic: return "atomic";
    case OpKind::Join: return "join";
    case OpKind::Filter: return "filter";
    case OpKind::Union: return "union";
    case OpKind::Difference: return "difference";
    case OpKind::Intersection: return "intersection";
    case OpKind::GroupBy: return "groupby";
  }
  return "atomic";
}

struct Seed {
  enum class Kind { Entity, Hole, Ambiguous };
  Kind kind = Kind::Entity;
  std::string entity;   // Entity: concrete id
  std::string slot;     // Hole: placeholder name, e.g. "SUBJECT_FILM"
  std::string surface;  // Ambiguous: registry surface form
  std::string type;     // entity type for every kind
  bool operator==(const Seed&) const = default;

  static Seed of_entity(std::string id, std::string type) {
    Seed s;
    s.kind = Kind::Entity;
    s.entity = std::move(id);
    s.type = std::move(type);
    return s;
  }
  static Seed hole(std::string slot, std::string type) {
    Seed s;
    s.kind = Kind::Hole;
    s.slot = std::move(slot);
    s.type = std::move(type);
    return s;
  }
  static Seed ambiguous(std::string surface, std::string type) {
    Seed s;
    s.kind = Kind::Ambiguous;
    s.surface = std::move(surface);
    s.type = std::move(type);
    return s;
  }
};

// --- predicates -----------------------------------------------------------

struct HasRelationPred {
  std::string relation;
  Direction dir = Direction::Forward;
  std::optional<std::string> target;  // required neighbor, if any
  bool operator==(const HasRelationPred&) const = default;
};

// Only legal immediately downstream of a groupby step.
struct CountAtLeastPred {
  int k = 1;
  bool operator==(const CountAtLeastPred&) const = default;
};

struct AttrComparePred {
  std::string attribute;
  Cmp cmp = Cmp::Eq;
  LiteralValue value;
  // Sampled skeletons leave the literal open; realization grounds it from
  // observed facts.  Ungrounded predicates never serialize.
  bool value_hole = false;
  std::string slot;  // placeholder name when value_hole
  bool operator==(const AttrComparePred&) const = default;
};

using Predicate =
    std::variant<HasRelationPred, CountAtLeastPred, AttrComparePred>;

inline std::string predicate_kind_name(const Predicate& p) {
  if (std::holds_alternative<HasRelationPred>(p)) return "has_relation";
  if (std::holds_alternative<CountAtLeastPred>(p)) return "count_at_least";
  return "attr_cmp";
}

// --- operations ------------------------------------------------------------

struct AtomicOp {
  Seed seed;
  std::string relation;
  Direction dir = Direction::Forward;
  bool operator==(const AtomicOp&) const = default;
};

struct JoinOp {
  int input = 0;
  std::string relation;
  Direction dir = Direction::Forward;
  bool operator==(const JoinOp&) const = default;
};

struct FilterOp {
  int input = 0;
  Predicate pred;
  bool operator==(const FilterOp&) const = default;
};

struct SetOp {
  OpKind kind = OpKind::Union;  // Union, Difference, or Intersection
  int left = 0;
  int right = 0;
  bool operator==(const SetOp&) const = default;
};

struct GroupByOp {
  int input = 0;
  bool operator==(const GroupByOp&) const = default;
};

using StepOp = std::variant<AtomicOp, JoinOp, FilterOp, SetOp, GroupByOp>;

inline OpKind op_kind(const StepOp& op) {
  if (std::holds_alternative<AtomicOp>(op)) return OpKind::Atomic;
  if (std::holds_alternative<JoinOp>(op)) return OpKind::Join;
  if (std::holds_alternative<FilterOp>(op)) return OpKind::Filter;
  if (std::holds_alternative<GroupByOp>(op)) return OpKind::GroupBy;
  return std::get<SetOp>(op).kind;
}

inline std::vector<int> operand_indexes(const StepOp& op) {
  if (const auto* j = std::get_if<JoinOp>(&op)) return {j->input};
  if (const auto* f = std::get_if<FilterOp>(&op)) return {f->input};
  if (const auto* s = std::get_if<SetOp>(&op)) return {s->left, s->right};
  if (const auto* g = std::get_if<GroupByOp>(&op)) return {g->input};
  return {};
}

struct PlanStep {
  int index = 0;  // 1-based position
  StepOp op;
  std::string out_type;  // inferred by typecheck; not part of identity

  bool operator==(const PlanStep& o) const {
    return index == o.index && op == o.op;
  }
};

struct Plan {
  std::vector<PlanStep> steps;
  int final_step = 0;
  std::string goal_type;

  bool operator==(const Plan& o) const {
    return steps == o.steps && final_step == o.final_step &&
           goal_type == o.goal_type;
  }

  const PlanStep& step(int index) const { return steps.at(index - 1); }
};

// Structural well-formedness, independent of any schema: contiguous 1-based
// indexes, backward-only references, final step last, everything reachable.
inline std::vector<std::string> validate_structure(const Plan& plan) {
  std::vector<std::string> problems;
  const int n = static_cast<int>(plan.steps.size());
  if (n < 2) problems.push_back("plan must have at least 2 steps");
  for (int i = 0; i < n; ++i) {
    const PlanStep& s = plan.steps[i];
    if (s.index != i + 1) {
      problems.push_back("step " + std::to_string(i + 1) +
                         ": index field mismatch");
      continue;
    }
    for (int ref : operand_indexes(s.op)) {
      if (ref < 1 || ref >= s.index)
        problems.push_back("step " + std::to_string(s.index) +
                           ": non-topological reference to step " +
                           std::to_string(ref));
    }
  }
  if (plan.final_step != n)
    problems.push_back("final step must be the last step");
  if (problems.empty()) {
    std::vector<bool> reachable(n + 1, false);
    std::vector<int> stack{n};
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      if (i < 1 || i > n || reachable[i]) continue;
      reachable[i] = true;
      for (int ref : operand_indexes(plan.steps[i - 1].op)) stack.push_back(ref);
    }
    for (int i = 1; i <= n; ++i)
      if (!reachable[i])
        problems.push_back("step " + std::to_string(i) +
                           " is unreachable from the final step");
  }
  return problems;
}

// Convenience construction with automatic indexing; used by tests and the
// sampler alike.
class PlanBuilder {
 public:
  int atomic(Seed seed, std::string relation, Direction dir) {
    return push(AtomicOp{std::move(seed), std::move(relation), dir});
  }
  int join(int input, std::string relation, Direction dir) {
    return push(JoinOp{input, std::move(relation), dir});
  }
  int filter(int input, Predicate pred) {
    return push(FilterOp{input, std::move(pred)});
  }
  int set_op(OpKind kind, int left, int right) {
    return push(SetOp{kind, left, right});
  }
  int group_by(int input) { return push(GroupByOp{input}); }

  Plan finish(std::string goal_type = "") {
    Plan p;
    p.steps = steps_;
    p.final_step = static_cast<int>(steps_.size());
    p.goal_type = std::move(goal_type);
    return p;
  }

 private:
  int push(StepOp op) {
    PlanStep s;
    s.index = static_cast<int>(steps_.size()) + 1;
    s.op = std::move(op);
    steps_.push_back(std::move(s));
    return s.index;
  }
  std::vector<PlanStep> steps_;
};

// Index of the single ambiguous seed, or 0 when none.
inline int ambiguous_step(const Plan& plan) {
  for (const PlanStep& s : plan.steps)
    if (const auto* a = std::get_if<AtomicOp>(&s.op))
      if (a->seed.kind == Seed::Kind::Ambiguous) return s.index;
  return 0;
}

}  // namespace kgqa
