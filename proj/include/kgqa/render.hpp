#pragma once

// Deterministic natural-language rendering of plan steps.  Every step
// becomes one numbered clause such as
//
//   (1) Find film of Saoirse Ronan via cast member.
//   (3) Group by person.
//   (4) Filter by count >= 2.
//
// Holes render as {SLOT} placeholders and ambiguous seeds as their surface
// form, so skeletons and realized plans share one renderer.  Requires a
// typechecked plan (out_type present).

#include <string>
#include <vector>

#include "kgqa/graph.hpp"
#include "kgqa/plan.hpp"

namespace kgqa {

namespace detail {

inline std::string seed_text(const Seed& s, const KnowledgeGraph& g) {
  switch (s.kind) {
    case Seed::Kind::Entity: return g.label(s.entity);
    case Seed::Kind::Hole: return "{" + s.slot + "}";
    case Seed::Kind::Ambiguous: return s.surface;
  }
  return "";
}

inline std::string type_label(const std::string& type,
                              const KnowledgeGraph& g) {
  return g.schema().entity_type(type).label;
}

}  // namespace detail

// The unnumbered body of one step's clause, without the trailing period.
inline std::string render_clause(const Plan& plan, const PlanStep& s,
                                 const KnowledgeGraph& g) {
  (void)plan;
  if (s.out_type.empty())
    throw Error("render requires a typechecked plan (step " +
                std::to_string(s.index) + " has no inferred type)");
  const Schema& schema = g.schema();
  if (const auto* a = std::get_if<AtomicOp>(&s.op)) {
    return "Find " + detail::type_label(s.out_type, g) + " of " +
           detail::seed_text(a->seed, g) + " via " +
           schema.relation(a->relation).label;
  }
  if (const auto* j = std::get_if<JoinOp>(&s.op)) {
    return "Find " + detail::type_label(s.out_type, g) + " of step " +
           std::to_string(j->input) + " result via " +
           schema.relation(j->relation).label;
  }
  if (const auto* f = std::get_if<FilterOp>(&s.op)) {
    if (const auto* hr = std::get_if<HasRelationPred>(&f->pred)) {
      std::string text = "Keep step " + std::to_string(f->input) +
                         " result with " + schema.relation(hr->relation).label;
      if (hr->target) text += " " + g.label(*hr->target);
      return text;
    }
    if (const auto* ca = std::get_if<CountAtLeastPred>(&f->pred))
      return "Filter by count ≥ " + std::to_string(ca->k);
    const auto& ac = std::get<AttrComparePred>(f->pred);
    std::string value = ac.value_hole ? "{" + ac.slot + "}"
                                      : ac.value.to_string();
    return "Keep step " + std::to_string(f->input) + " result where " +
           schema.attribute(ac.attribute).label + " " + cmp_symbol(ac.cmp) +
           " " + value;
  }
  if (const auto* so = std::get_if<SetOp>(&s.op)) {
    std::string name = op_kind_name(so->kind);
    name[0] = static_cast<char>(name[0] - 'a' + 'A');
    return name + " of step " + std::to_string(so->left) + " and step " +
           std::to_string(so->right);
  }
  const auto& gb = std::get<GroupByOp>(s.op);
  (void)gb;
  return "Group by " + detail::type_label(s.out_type, g);
}

// Numbered clauses, one per step, numbering equal to step indexes.
inline std::vector<std::string> render_steps(const Plan& plan,
                                             const KnowledgeGraph& g) {
  std::vector<std::string> out;
  out.reserve(plan.steps.size());
  for (const PlanStep& s : plan.steps)
    out.push_back("(" + std::to_string(s.index) + ") " +
                  render_clause(plan, s, g) + ".");
  return out;
}

}  // namespace kgqa
