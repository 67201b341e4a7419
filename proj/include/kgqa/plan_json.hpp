#pragma once

// Canonical JSON form for plans (see docs/plan.schema.json).  Serialization
// sorts keys and emits no whitespace, so equal plans produce byte-identical
// text and distinct plans produce distinct text.  Deserialization is strict:
// unknown fields, unknown op kinds, index gaps, and forward references are
// all ParseErrors.

#include <string>

#include <json.hpp>

#include "kgqa/plan.hpp"

namespace kgqa {

namespace detail {

using nlohmann::json;

inline json seed_to_json(const Seed& s) {
  switch (s.kind) {
    case Seed::Kind::Entity:
      return {{"kind", "entity"}, {"id", s.entity}, {"type", s.type}};
    case Seed::Kind::Hole:
      return {{"kind", "hole"}, {"slot", s.slot}, {"type", s.type}};
    case Seed::Kind::Ambiguous:
      return {{"kind", "ambiguous"}, {"surface", s.surface}, {"type", s.type}};
  }
  return {};
}

inline void reject_unknown(const json& j,
                           const std::vector<std::string>& known,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || it.key() == k;
    if (!ok) throw ParseError(where + ": unknown field '" + it.key() + "'");
  }
}

inline std::string get_string(const json& j, const char* key,
                              const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw ParseError(where + ": missing string field '" + std::string(key) +
                     "'");
  return j[key].get<std::string>();
}

inline int get_int(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw ParseError(where + ": missing integer field '" + std::string(key) +
                     "'");
  return j[key].get<int>();
}

inline Seed seed_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": seed must be an object");
  const std::string kind = get_string(j, "kind", where);
  if (kind == "entity") {
    reject_unknown(j, {"kind", "id", "type"}, where);
    return Seed::of_entity(get_string(j, "id", where),
                           get_string(j, "type", where));
  }
  if (kind == "hole") {
    reject_unknown(j, {"kind", "slot", "type"}, where);
    return Seed::hole(get_string(j, "slot", where),
                      get_string(j, "type", where));
  }
  if (kind == "ambiguous") {
    reject_unknown(j, {"kind", "surface", "type"}, where);
    return Seed::ambiguous(get_string(j, "surface", where),
                           get_string(j, "type", where));
  }
  throw ParseError(where + ": unknown seed kind '" + kind + "'");
}

inline json predicate_to_json(const Predicate& p) {
  if (const auto* hr = std::get_if<HasRelationPred>(&p)) {
    json j{{"kind", "has_relation"},
           {"relation", hr->relation},
           {"dir", direction_name(hr->dir)}};
    if (hr->target) j["target"] = *hr->target;
    return j;
  }
  if (const auto* ca = std::get_if<CountAtLeastPred>(&p))
    return {{"kind", "count_at_least"}, {"k", ca->k}};
  const auto& ac = std::get<AttrComparePred>(p);
  if (ac.value_hole)
    throw Error("cannot serialize a predicate with an ungrounded value");
  json j{{"kind", "attr_cmp"},
         {"attribute", ac.attribute},
         {"cmp", cmp_name(ac.cmp)},
         {"value_kind", value_kind_name(ac.value.kind)}};
  j["value"] = ac.value.kind == ValueKind::String ? json(ac.value.str)
                                                  : json(ac.value.num);
  return j;
}

inline Predicate predicate_from_json(const json& j, const std::string& where) {
  if (!j.is_object())
    throw ParseError(where + ": predicate must be an object");
  const std::string kind = get_string(j, "kind", where);
  if (kind == "has_relation") {
    reject_unknown(j, {"kind", "relation", "dir", "target"}, where);
    HasRelationPred p;
    p.relation = get_string(j, "relation", where);
    p.dir = parse_direction(get_string(j, "dir", where));
    if (j.contains("target")) p.target = get_string(j, "target", where);
    return p;
  }
  if (kind == "count_at_least") {
    reject_unknown(j, {"kind", "k"}, where);
    return CountAtLeastPred{get_int(j, "k", where)};
  }
  if (kind == "attr_cmp") {
    reject_unknown(j, {"kind", "attribute", "cmp", "value", "value_kind"},
                   where);
    AttrComparePred p;
    p.attribute = get_string(j, "attribute", where);
    p.cmp = parse_cmp(get_string(j, "cmp", where));
    ValueKind vk = parse_value_kind(get_string(j, "value_kind", where));
    if (!j.contains("value")) throw ParseError(where + ": missing 'value'");
    if (vk == ValueKind::String) {
      if (!j["value"].is_string())
        throw ParseError(where + ": value must be a string");
      p.value = LiteralValue::string(j["value"].get<std::string>());
    } else {
      if (!j["value"].is_number_integer())
        throw ParseError(where + ": value must be an integer");
      p.value = {vk, j["value"].get<std::int64_t>(), ""};
    }
    return p;
  }
  throw ParseError(where + ": unknown predicate kind '" + kind + "'");
}

}  // namespace detail

inline nlohmann::json plan_to_json(const Plan& plan) {
  using detail::json;
  json steps = json::array();
  for (const PlanStep& s : plan.steps) {
    json j{{"i", s.index}, {"op", op_kind_name(op_kind(s.op))}};
    if (const auto* a = std::get_if<AtomicOp>(&s.op)) {
      j["seed"] = detail::seed_to_json(a->seed);
      j["relation"] = a->relation;
      j["dir"] = direction_name(a->dir);
    } else if (const auto* jn = std::get_if<JoinOp>(&s.op)) {
      j["in"] = jn->input;
      j["relation"] = jn->relation;
      j["dir"] = direction_name(jn->dir);
    } else if (const auto* f = std::get_if<FilterOp>(&s.op)) {
      j["in"] = f->input;
      j["pred"] = detail::predicate_to_json(f->pred);
    } else if (const auto* so = std::get_if<SetOp>(&s.op)) {
      j["l"] = so->left;
      j["r"] = so->right;
    } else if (const auto* g = std::get_if<GroupByOp>(&s.op)) {
      j["in"] = g->input;
    }
    steps.push_back(std::move(j));
  }
  return {{"steps", std::move(steps)},
          {"final", plan.final_step},
          {"goal_type", plan.goal_type}};
}

inline std::string serialize_plan(const Plan& plan) {
  return plan_to_json(plan).dump();
}

inline Plan plan_from_json(const nlohmann::json& j) {
  using detail::json;
  if (!j.is_object()) throw ParseError("plan: expected a JSON object");
  detail::reject_unknown(j, {"steps", "final", "goal_type"}, "plan");
  if (!j.contains("steps") || !j["steps"].is_array())
    throw ParseError("plan: missing array field 'steps'");

  Plan plan;
  int expected = 1;
  for (const auto& sj : j["steps"]) {
    const std::string where = "plan step " + std::to_string(expected);
    if (!sj.is_object()) throw ParseError(where + ": expected an object");
    const int index = detail::get_int(sj, "i", where);
    if (index != expected)
      throw ParseError(where + ": non-contiguous step index " +
                       std::to_string(index));
    const std::string op = detail::get_string(sj, "op", where);
    auto input_ref = [&](const char* key) {
      int ref = detail::get_int(sj, key, where);
      if (ref < 1 || ref >= index)
        throw ParseError(where + ": non-topological reference to step " +
                         std::to_string(ref));
      return ref;
    };

    PlanStep step;
    step.index = index;
    if (op == "atomic") {
      detail::reject_unknown(sj, {"i", "op", "seed", "relation", "dir"},
                             where);
      if (!sj.contains("seed")) throw ParseError(where + ": missing 'seed'");
      step.op = AtomicOp{detail::seed_from_json(sj["seed"], where),
                         detail::get_string(sj, "relation", where),
                         parse_direction(detail::get_string(sj, "dir", where))};
    } else if (op == "join") {
      detail::reject_unknown(sj, {"i", "op", "in", "relation", "dir"}, where);
      step.op = JoinOp{input_ref("in"),
                       detail::get_string(sj, "relation", where),
                       parse_direction(detail::get_string(sj, "dir", where))};
    } else if (op == "filter") {
      detail::reject_unknown(sj, {"i", "op", "in", "pred"}, where);
      int in = input_ref("in");
      if (!sj.contains("pred")) throw ParseError(where + ": missing 'pred'");
      step.op = FilterOp{in, detail::predicate_from_json(sj["pred"], where)};
    } else if (op == "union" || op == "difference" || op == "intersection") {
      detail::reject_unknown(sj, {"i", "op", "l", "r"}, where);
      OpKind kind = op == "union" ? OpKind::Union
                    : op == "difference" ? OpKind::Difference
                                         : OpKind::Intersection;
      step.op = SetOp{kind, input_ref("l"), input_ref("r")};
    } else if (op == "groupby") {
      detail::reject_unknown(sj, {"i", "op", "in"}, where);
      step.op = GroupByOp{input_ref("in")};
    } else {
      throw ParseError(where + ": unknown op '" + op + "'");
    }
    plan.steps.push_back(std::move(step));
    ++expected;
  }

  plan.final_step = detail::get_int(j, "final", "plan");
  plan.goal_type = detail::get_string(j, "goal_type", "plan");
  for (const std::string& p : validate_structure(plan))
    throw ParseError("plan: " + p);
  return plan;
}

inline Plan deserialize_plan(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
  return plan_from_json(j);
}

}  // namespace kgqa
