#pragma once

// Structural quality rules applied to typechecked plans.  Each rule has a
// stable id so datasets and logs can report which one fired:
//
//   R1  chained same-kind set operations sharing an operand (redundant)
//   R2  set operation whose two operands are the same step (degenerate)
//   R3  difference whose right operand is a superset of the left by
//       construction (provably empty result)
//   R4  groupby whose multiplicity is never consumed by a filter
//   R5  more than one ambiguous seed
//   R6  step count outside [min_steps, max_steps]

#include <set>
#include <string>
#include <vector>

#include "kgqa/plan.hpp"

namespace kgqa {

struct RuleViolation {
  std::string rule;
  int step = 0;
  std::string message;
};

struct HeuristicLimits {
  int min_steps = 2;
  int max_steps = 8;
};

namespace detail {

// Steps whose result is, by construction, a subset of (or equal to) the
// result of `index`: the step itself, filter/groupby chains below it, the
// operands feeding an intersection, and the left operand of a difference.
inline std::set<int> superset_closure(const Plan& plan, int index) {
  std::set<int> out;
  std::vector<int> stack{index};
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    if (!out.insert(i).second) continue;
    const StepOp& op = plan.step(i).op;
    if (const auto* f = std::get_if<FilterOp>(&op)) {
      stack.push_back(f->input);
    } else if (const auto* g = std::get_if<GroupByOp>(&op)) {
      stack.push_back(g->input);
    } else if (const auto* s = std::get_if<SetOp>(&op)) {
      if (s->kind == OpKind::Intersection) {
        stack.push_back(s->left);
        stack.push_back(s->right);
      } else if (s->kind == OpKind::Difference) {
        stack.push_back(s->left);
      }
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<RuleViolation> validate_heuristics(
    const Plan& plan, const HeuristicLimits& limits = {}) {
  std::vector<RuleViolation> out;

  for (const PlanStep& s : plan.steps) {
    const auto* so = std::get_if<SetOp>(&s.op);
    if (!so) continue;

    // R2 before R1: the degenerate case is its own rule.
    if (so->left == so->right) {
      out.push_back({"R2", s.index,
                     "set operation with identical operands (step " +
                         std::to_string(so->left) + ")"});
      continue;
    }

    for (int ref : {so->left, so->right}) {
      const auto* inner = std::get_if<SetOp>(&plan.step(ref).op);
      if (!inner || inner->kind != so->kind) continue;
      const int other = ref == so->left ? so->right : so->left;
      if (other == inner->left || other == inner->right) {
        out.push_back({"R1", s.index,
                       "chained " + op_kind_name(so->kind) + " with step " +
                           std::to_string(ref) + " repeats operand " +
                           std::to_string(other)});
        break;
      }
    }

    if (so->kind == OpKind::Difference) {
      auto supersets = detail::superset_closure(plan, so->left);
      if (supersets.count(so->right))
        out.push_back({"R3", s.index,
                       "difference right operand (step " +
                           std::to_string(so->right) +
                           ") is a superset of the left by construction"});
    }
  }

  for (const PlanStep& s : plan.steps) {
    if (op_kind(s.op) != OpKind::GroupBy) continue;
    bool consumed = false;
    for (const PlanStep& t : plan.steps)
      if (const auto* f = std::get_if<FilterOp>(&t.op))
        consumed = consumed || f->input == s.index;
    if (!consumed)
      out.push_back({"R4", s.index, "groupby is not consumed by any filter"});
  }

  int ambiguous = 0;
  int last_ambiguous = 0;
  for (const PlanStep& s : plan.steps)
    if (const auto* a = std::get_if<AtomicOp>(&s.op))
      if (a->seed.kind == Seed::Kind::Ambiguous) {
        ++ambiguous;
        last_ambiguous = s.index;
      }
  if (ambiguous > 1)
    out.push_back({"R5", last_ambiguous,
                   "plan has " + std::to_string(ambiguous) +
                       " ambiguous seeds; at most one is allowed"});

  const int n = static_cast<int>(plan.steps.size());
  if (n < limits.min_steps || n > limits.max_steps)
    out.push_back({"R6", 0,
                   "plan has " + std::to_string(n) +
                       " steps, outside [" + std::to_string(limits.min_steps) +
                       ", " + std::to_string(limits.max_steps) + "]"});

  return out;
}

}  // namespace kgqa
