#pragma once

// Independent reference interpreter used as the executor oracle.  It was
// written against the operation definitions, not the executor code, and is
// deliberately naive: every step recomputes its inputs recursively and all
// lookups are linear scans over the raw triple/fact lists.  Correct-but-slow
// by design so it cannot share a bug with the indexed executor.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "kgqa/executor.hpp"
#include "kgqa/graph.hpp"
#include "kgqa/plan.hpp"

namespace kgqa::testing {

// member -> multiplicity
using OracleResult = std::map<std::string, int>;

inline std::vector<std::string> oracle_neighbors(const KnowledgeGraph& g,
                                                 const std::string& id,
                                                 const std::string& relation,
                                                 Direction dir) {
  std::vector<std::string> out;
  for (const Triple& t : g.triples()) {
    if (t.relation != relation) continue;
    if (dir == Direction::Forward && t.subject == id)
      out.push_back(t.object);
    if (dir == Direction::Reverse && t.object == id) out.push_back(t.subject);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline OracleResult oracle_eval(const Plan& plan, const KnowledgeGraph& g,
                                const Binding& binding, int index) {
  const PlanStep& step = plan.step(index);
  OracleResult out;

  if (const auto* a = std::get_if<AtomicOp>(&step.op)) {
    std::string seed;
    switch (a->seed.kind) {
      case Seed::Kind::Entity: seed = a->seed.entity; break;
      case Seed::Kind::Hole: seed = binding.at(a->seed.slot); break;
      case Seed::Kind::Ambiguous: seed = binding.at(a->seed.surface); break;
    }
    for (const std::string& m : oracle_neighbors(g, seed, a->relation, a->dir))
      out[m] = 1;
    return out;
  }

  if (const auto* j = std::get_if<JoinOp>(&step.op)) {
    const OracleResult in = oracle_eval(plan, g, binding, j->input);
    for (const auto& [src, n] : in)
      for (const std::string& m : oracle_neighbors(g, src, j->relation, j->dir))
        out[m] += 1;
    return out;
  }

  if (const auto* f = std::get_if<FilterOp>(&step.op)) {
    const OracleResult in = oracle_eval(plan, g, binding, f->input);
    for (const auto& [m, n] : in) {
      bool keep = false;
      if (const auto* hr = std::get_if<HasRelationPred>(&f->pred)) {
        const auto ns = oracle_neighbors(g, m, hr->relation, hr->dir);
        keep = hr->target
                   ? std::find(ns.begin(), ns.end(), *hr->target) != ns.end()
                   : !ns.empty();
      } else if (const auto* ca = std::get_if<CountAtLeastPred>(&f->pred)) {
        keep = n >= ca->k;
      } else {
        const auto& ac = std::get<AttrComparePred>(f->pred);
        for (const AttributeFact& fact : g.attribute_facts())
          if (fact.subject == m && fact.attribute == ac.attribute &&
              literal_compare(fact.value, ac.cmp, ac.value))
            keep = true;
      }
      if (keep) out[m] = n;
    }
    return out;
  }

  if (const auto* so = std::get_if<SetOp>(&step.op)) {
    const OracleResult l = oracle_eval(plan, g, binding, so->left);
    const OracleResult r = oracle_eval(plan, g, binding, so->right);
    if (so->kind == OpKind::Union) {
      out = l;
      for (const auto& [m, n] : r) out[m] += n;
    } else if (so->kind == OpKind::Intersection) {
      for (const auto& [m, n] : l)
        if (auto it = r.find(m); it != r.end())
          out[m] = n < it->second ? n : it->second;
    } else {
      for (const auto& [m, n] : l)
        if (!r.count(m)) out[m] = n;
    }
    return out;
  }

  const auto& gb = std::get<GroupByOp>(step.op);
  return oracle_eval(plan, g, binding, gb.input);
}

inline IdSet oracle_answer(const Plan& plan, const KnowledgeGraph& g,
                           const Binding& binding = {}) {
  IdSet out;
  for (const auto& [m, n] : oracle_eval(plan, g, binding, plan.final_step))
    out.push_back(m);
  return out;  // map iteration is already sorted and unique
}

// Mirrors the branched execution contract: one branch per type-matching
// registry entity with a non-empty answer, labelled by entity label (with
// an id suffix on collisions); plans without an ambiguous seed produce a
// single "default" branch.
inline std::map<std::string, IdSet> oracle_branched(const Plan& plan,
                                                    const KnowledgeGraph& g,
                                                    const Binding& binding = {}) {
  std::map<std::string, IdSet> out;
  const int amb = ambiguous_step(plan);
  if (amb == 0) {
    IdSet ans = oracle_answer(plan, g, binding);
    if (!ans.empty()) out["default"] = std::move(ans);
    return out;
  }
  const Seed& seed = std::get<AtomicOp>(plan.step(amb).op).seed;
  std::vector<std::string> labels_in_order;
  for (const std::string& id : g.surface(seed.surface).entities) {
    if (g.entity(id).type != seed.type) continue;
    Binding b = binding;
    b[seed.surface] = id;
    IdSet ans = oracle_answer(plan, g, b);
    if (ans.empty()) continue;
    std::string label = g.label(id);
    for (const std::string& existing : labels_in_order)
      if (existing == label) label += " [" + id + "]";
    labels_in_order.push_back(label);
    out[label] = std::move(ans);
  }
  return out;
}

}  // namespace kgqa::testing
