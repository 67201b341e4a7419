#pragma once

// Plan typechecker.  Works from the schema alone (seeds carry their entity
// type), collects every violation instead of stopping at the first, and on
// success caches each step's inferred output type in PlanStep::out_type and
// fills Plan::goal_type.  Malformed plans produce errors, never crashes.

#include <string>
#include <vector>

#include "kgqa/plan.hpp"
#include "kgqa/schema.hpp"

namespace kgqa {

struct TypeError {
  int step = 0;
  std::string message;
};

inline std::vector<TypeError> typecheck(Plan& plan, const Schema& schema) {
  std::vector<TypeError> errors;
  for (const std::string& p : validate_structure(plan))
    errors.push_back({0, p});
  if (!errors.empty()) return errors;

  const int n = static_cast<int>(plan.steps.size());
  std::vector<std::string> out(n + 1);  // inferred type per step, "" = failed
  auto fail = [&](int step, std::string msg) {
    errors.push_back({step, std::move(msg)});
  };

  for (PlanStep& s : plan.steps) {
    const int i = s.index;
    // Skip steps whose inputs already failed; reporting them again would
    // only duplicate the root cause.
    bool inputs_ok = true;
    for (int ref : operand_indexes(s.op)) inputs_ok = inputs_ok && !out[ref].empty();
    if (!inputs_ok) continue;

    if (const auto* a = std::get_if<AtomicOp>(&s.op)) {
      auto rel = schema.relations.find(a->relation);
      if (rel == schema.relations.end()) {
        fail(i, "unknown relation '" + a->relation + "'");
        continue;
      }
      if (a->seed.type.empty()) {
        fail(i, "seed has no entity type");
        continue;
      }
      if (!schema.entity_types.count(a->seed.type)) {
        fail(i, "unknown seed type '" + a->seed.type + "'");
        continue;
      }
      if (a->seed.type != near_type(rel->second, a->dir)) {
        fail(i, "seed type '" + a->seed.type + "' does not match relation '" +
                    a->relation + "' (" + direction_name(a->dir) +
                    " expects '" + near_type(rel->second, a->dir) + "')");
        continue;
      }
      out[i] = far_type(rel->second, a->dir);
    } else if (const auto* j = std::get_if<JoinOp>(&s.op)) {
      auto rel = schema.relations.find(j->relation);
      if (rel == schema.relations.end()) {
        fail(i, "unknown relation '" + j->relation + "'");
        continue;
      }
      if (out[j->input] != near_type(rel->second, j->dir)) {
        fail(i, "input type '" + out[j->input] +
                    "' does not match relation '" + j->relation + "' (" +
                    direction_name(j->dir) + " expects '" +
                    near_type(rel->second, j->dir) + "')");
        continue;
      }
      out[i] = far_type(rel->second, j->dir);
    } else if (const auto* f = std::get_if<FilterOp>(&s.op)) {
      const std::string& in_type = out[f->input];
      if (const auto* hr = std::get_if<HasRelationPred>(&f->pred)) {
        auto rel = schema.relations.find(hr->relation);
        if (rel == schema.relations.end()) {
          fail(i, "unknown relation '" + hr->relation + "' in predicate");
          continue;
        }
        if (in_type != near_type(rel->second, hr->dir)) {
          fail(i, "predicate relation '" + hr->relation +
                      "' does not apply to type '" + in_type + "'");
          continue;
        }
      } else if (const auto* ca = std::get_if<CountAtLeastPred>(&f->pred)) {
        if (op_kind(plan.step(f->input).op) != OpKind::GroupBy) {
          fail(i, "count predicate requires a groupby input");
          continue;
        }
        if (ca->k < 1) {
          fail(i, "count threshold must be at least 1");
          continue;
        }
      } else if (const auto* ac = std::get_if<AttrComparePred>(&f->pred)) {
        auto attr = schema.attributes.find(ac->attribute);
        if (attr == schema.attributes.end()) {
          fail(i, "unknown attribute '" + ac->attribute + "'");
          continue;
        }
        if (attr->second.subject_type != in_type) {
          fail(i, "attribute '" + ac->attribute +
                      "' does not apply to type '" + in_type + "'");
          continue;
        }
        if (!ac->value_hole && ac->value.kind != attr->second.value_kind) {
          fail(i, "literal kind does not match attribute '" + ac->attribute +
                      "'");
          continue;
        }
      }
      out[i] = in_type;
    } else if (const auto* so = std::get_if<SetOp>(&s.op)) {
      if (out[so->left] != out[so->right]) {
        fail(i, op_kind_name(so->kind) + " over mismatched types '" +
                    out[so->left] + "' and '" + out[so->right] + "'");
        continue;
      }
      out[i] = out[so->left];
    } else if (const auto* g = std::get_if<GroupByOp>(&s.op)) {
      out[i] = out[g->input];
    }
  }

  if (errors.empty()) {
    for (PlanStep& s : plan.steps) s.out_type = out[s.index];
    const std::string& goal = out[plan.final_step];
    if (plan.goal_type.empty())
      plan.goal_type = goal;
    else if (plan.goal_type != goal)
      errors.push_back({plan.final_step,
                        "declared goal type '" + plan.goal_type +
                            "' does not match inferred '" + goal + "'"});
  }
  return errors;
}

inline bool typechecks(Plan& plan, const Schema& schema) {
  return typecheck(plan, schema).empty();
}

}  // namespace kgqa
