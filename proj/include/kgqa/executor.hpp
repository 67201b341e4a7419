#pragma once

// Plan executor.  Steps evaluate in index order; each produces a sorted
// member set plus a multiplicity map (how many distinct step inputs reach
// each member) consumed by groupished count filters:
//
//   atomic        every member has multiplicity 1
//   join          multiplicity = number of distinct input entities reaching
//                 the member
//   filter        restricts members and their multiplicities
//   union         multiplicities add; intersection takes the minimum;
//                 difference keeps the left side's
//   groupby       identity on members, multiplicities carried through
//
// execute_branched re-runs the same plan once per registry entity matching
// the ambiguous surface and labels each non-empty branch with that entity's
// label; plans without an ambiguous seed produce one "default" branch.

#include <map>
#include <string>
#include <vector>

#include "kgqa/graph.hpp"
#include "kgqa/plan.hpp"
#include "kgqa/record.hpp"

namespace kgqa {

// slot name (or surface form) -> concrete entity id
using Binding = std::map<std::string, std::string>;

struct StepResult {
  IdSet members;
  std::map<std::string, int> multiplicity;
};

struct Execution {
  std::vector<StepResult> steps;
  int final_step = 0;

  const IdSet& answer() const { return steps.at(final_step - 1).members; }
};

namespace detail {

inline const std::string& resolve_seed(const Seed& seed,
                                       const Binding& binding) {
  switch (seed.kind) {
    case Seed::Kind::Entity:
      return seed.entity;
    case Seed::Kind::Hole: {
      auto it = binding.find(seed.slot);
      if (it == binding.end())
        throw UnboundHole("unbound hole: " + seed.slot);
      return it->second;
    }
    case Seed::Kind::Ambiguous: {
      auto it = binding.find(seed.surface);
      if (it == binding.end())
        throw UnboundHole("unbound ambiguous surface: " + seed.surface);
      return it->second;
    }
  }
  throw UnboundHole("invalid seed");
}

inline bool passes_predicate(const std::string& id, const Predicate& pred,
                             const StepResult& input,
                             const KnowledgeGraph& g) {
  if (const auto* hr = std::get_if<HasRelationPred>(&pred)) {
    const IdSet& ns = g.neighbors(id, hr->relation, hr->dir);
    if (hr->target) return set_contains(ns, *hr->target);
    return !ns.empty();
  }
  if (const auto* ca = std::get_if<CountAtLeastPred>(&pred)) {
    auto it = input.multiplicity.find(id);
    return it != input.multiplicity.end() && it->second >= ca->k;
  }
  const auto& ac = std::get<AttrComparePred>(pred);
  if (ac.value_hole)
    throw Error("cannot execute a predicate with an ungrounded value");
  const auto* values = g.attribute_values(id, ac.attribute);
  if (!values) return false;
  for (const auto& v : *values)
    if (literal_compare(v, ac.cmp, ac.value)) return true;
  return false;
}

}  // namespace detail

inline Execution execute_plan(const Plan& plan, const KnowledgeGraph& g,
                              const Binding& binding = {}) {
  Execution exec;
  exec.final_step = plan.final_step;
  exec.steps.resize(plan.steps.size());

  for (const PlanStep& s : plan.steps) {
    StepResult& out = exec.steps[s.index - 1];
    if (const auto* a = std::get_if<AtomicOp>(&s.op)) {
      const std::string& seed = detail::resolve_seed(a->seed, binding);
      out.members = g.neighbors(seed, a->relation, a->dir);
      for (const auto& m : out.members) out.multiplicity[m] = 1;
    } else if (const auto* j = std::get_if<JoinOp>(&s.op)) {
      const StepResult& in = exec.steps[j->input - 1];
      for (const auto& src : in.members)
        for (const auto& m : g.neighbors(src, j->relation, j->dir))
          out.multiplicity[m] += 1;
      for (const auto& [m, n] : out.multiplicity) out.members.push_back(m);
    } else if (const auto* f = std::get_if<FilterOp>(&s.op)) {
      const StepResult& in = exec.steps[f->input - 1];
      for (const auto& m : in.members)
        if (detail::passes_predicate(m, f->pred, in, g)) {
          out.members.push_back(m);
          out.multiplicity[m] = in.multiplicity.at(m);
        }
    } else if (const auto* so = std::get_if<SetOp>(&s.op)) {
      const StepResult& l = exec.steps[so->left - 1];
      const StepResult& r = exec.steps[so->right - 1];
      switch (so->kind) {
        case OpKind::Union:
          out.members = set_union(l.members, r.members);
          for (const auto& m : out.members) {
            int n = 0;
            if (auto it = l.multiplicity.find(m); it != l.multiplicity.end())
              n += it->second;
            if (auto it = r.multiplicity.find(m); it != r.multiplicity.end())
              n += it->second;
            out.multiplicity[m] = n;
          }
          break;
        case OpKind::Intersection:
          out.members = set_intersection(l.members, r.members);
          for (const auto& m : out.members)
            out.multiplicity[m] =
                std::min(l.multiplicity.at(m), r.multiplicity.at(m));
          break;
        default:  // Difference
          out.members = set_difference(l.members, r.members);
          for (const auto& m : out.members)
            out.multiplicity[m] = l.multiplicity.at(m);
          break;
      }
    } else if (const auto* gb = std::get_if<GroupByOp>(&s.op)) {
      out = exec.steps[gb->input - 1];
    }
  }
  return exec;
}

struct BranchExecution {
  std::string label;
  std::string entity;  // bound registry entity; empty for "default"
  Execution exec;
};

struct BranchedExecution {
  std::vector<BranchExecution> branches;  // non-empty answers only
  bool ambiguous = false;
};

// Full per-branch executions; used by record assembly, which also needs the
// intermediate step results.
inline BranchedExecution execute_branched_full(const Plan& plan,
                                               const KnowledgeGraph& g,
                                               const Binding& binding = {}) {
  BranchedExecution out;
  const int amb_index = ambiguous_step(plan);
  if (amb_index == 0) {
    Execution exec = execute_plan(plan, g, binding);
    if (exec.answer().empty())
      throw AllBranchesEmpty("plan has an empty answer set");
    out.branches.push_back({"default", "", std::move(exec)});
    return out;
  }

  out.ambiguous = true;
  const auto& seed = std::get<AtomicOp>(plan.step(amb_index).op).seed;
  const AmbiguousName& amb = g.surface(seed.surface);
  for (const std::string& id : amb.entities) {  // sorted by construction
    if (g.entity(id).type != seed.type) continue;
    Binding b = binding;
    b[seed.surface] = id;
    Execution exec = execute_plan(plan, g, b);
    if (exec.answer().empty()) continue;
    std::string label = g.label(id);
    for (const auto& existing : out.branches)
      if (existing.label == label) label += " [" + id + "]";
    out.branches.push_back({std::move(label), id, std::move(exec)});
  }
  if (out.branches.empty())
    throw AllBranchesEmpty("no reading of surface '" + seed.surface +
                           "' yields a non-empty answer");
  return out;
}

inline BranchedAnswer to_branched_answer(const BranchedExecution& be) {
  BranchedAnswer out;
  out.ambiguous = be.ambiguous;
  for (const auto& b : be.branches)
    out.branches[b.label] = b.exec.answer();
  return out;
}

inline BranchedAnswer execute_branched(const Plan& plan,
                                       const KnowledgeGraph& g,
                                       const Binding& binding = {}) {
  return to_branched_answer(execute_branched_full(plan, g, binding));
}

}  // namespace kgqa
