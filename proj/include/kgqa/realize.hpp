#pragma once

// Skeleton realization: binds entity holes, the ambiguous surface, and open
// predicate literals so the plan executes non-empty.
//
// For every open slot a bounded candidate pool is drawn from the graph.  An
// optional EntitySelector (e.g. an LLM adapter) proposes bindings first;
// proposals outside the offered pool are discarded rather than trusted.
// Remaining combinations are tried in a deterministic shuffled order with
// cheap per-slot pruning, capped by max_attempts_per_plan full executions —
// the "oracle-greedy" fallback: keep the first binding whose execution
// meets the goal (enough non-empty branches, answer not oversized).

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgqa/executor.hpp"
#include "kgqa/render.hpp"
#include "kgqa/rng.hpp"
#include "kgqa/sampler.hpp"

namespace kgqa {

struct Candidate {
  std::string id;
  std::string label;
};

struct SelectionRequest {
  std::vector<std::string> rendered_plan;
  // slot -> offered candidates; includes the ambiguous surface slot (whose
  // candidates are surface forms) when the plan has one.
  std::map<std::string, std::vector<Candidate>> entity_pools;
  std::map<std::string, std::vector<LiteralValue>> value_pools;
  std::string key;  // request id for cache/stub lookup
};

struct Selection {
  std::map<std::string, std::string> entities;  // slot -> chosen id/surface
  std::map<std::string, LiteralValue> values;
};

class EntitySelector {
 public:
  virtual ~EntitySelector() = default;
  // May throw SelectorError / ClientError; the caller falls back.
  virtual Selection select(const SelectionRequest& request) = 0;
};

struct RealizeGoal {
  int min_branches = 1;
  int max_total = 1 << 30;
};

struct RealizeReport {
  int full_executions = 0;
  bool selector_used = false;     // a selector proposal survived validation
  bool selector_consulted = false;
};

namespace detail {

constexpr const char* kSurfaceSlot = "AMBIGUOUS_SURFACE";

struct OpenSlot {
  enum class Kind { Entity, Surface, Value } kind;
  std::string name;
  int step = 0;             // atomic step (entity/surface slots)
  std::string type;         // entity type (entity/surface slots)
  std::string attribute;    // value slots
};

inline std::vector<OpenSlot> open_slots(const Plan& plan) {
  std::vector<OpenSlot> slots;
  for (const PlanStep& s : plan.steps) {
    if (const auto* a = std::get_if<AtomicOp>(&s.op)) {
      if (a->seed.kind == Seed::Kind::Hole)
        slots.push_back({OpenSlot::Kind::Entity, a->seed.slot, s.index,
                         a->seed.type, ""});
      else if (a->seed.kind == Seed::Kind::Ambiguous && a->seed.surface.empty())
        slots.push_back({OpenSlot::Kind::Surface, kSurfaceSlot, s.index,
                         a->seed.type, ""});
    } else if (const auto* f = std::get_if<FilterOp>(&s.op)) {
      if (const auto* ac = std::get_if<AttrComparePred>(&f->pred))
        if (ac->value_hole)
          slots.push_back(
              {OpenSlot::Kind::Value, ac->slot, s.index, "", ac->attribute});
    }
  }
  return slots;
}

// Grounds one assignment into a copy of the skeleton.
inline Plan ground_plan(const Plan& skeleton,
                        const std::map<std::string, std::string>& entities,
                        const std::map<std::string, LiteralValue>& values,
                        const std::string& surface) {
  Plan plan = skeleton;
  for (PlanStep& s : plan.steps) {
    if (auto* a = std::get_if<AtomicOp>(&s.op)) {
      if (a->seed.kind == Seed::Kind::Hole) {
        auto it = entities.find(a->seed.slot);
        if (it == entities.end())
          throw UnboundHole("unbound hole: " + a->seed.slot);
        a->seed = Seed::of_entity(it->second, a->seed.type);
      } else if (a->seed.kind == Seed::Kind::Ambiguous &&
                 a->seed.surface.empty()) {
        a->seed.surface = surface;
      }
    } else if (auto* f = std::get_if<FilterOp>(&s.op)) {
      if (auto* ac = std::get_if<AttrComparePred>(&f->pred)) {
        if (ac->value_hole) {
          auto it = values.find(ac->slot);
          if (it == values.end())
            throw UnboundHole("unbound value: " + ac->slot);
          ac->value = it->second;
          ac->value_hole = false;
          ac->slot.clear();
        }
      }
    }
  }
  return plan;
}

}  // namespace detail

// Binds every open slot of `skeleton`; returns the grounded plan.  Throws
// NoViableBinding when the pools are exhausted without meeting the goal.
inline Plan realize_entities(const Plan& skeleton, const KnowledgeGraph& g,
                             EntitySelector* selector,
                             const SynthesisConfig& config, Rng& rng,
                             const RealizeGoal& goal = {},
                             const std::string& request_key = "",
                             RealizeReport* report = nullptr) {
  const auto slots = detail::open_slots(skeleton);
  const std::size_t pool_cap =
      static_cast<std::size_t>(std::max(1, config.candidate_pool));

  // Build candidate pools.
  SelectionRequest request;
  request.key = request_key;
  request.rendered_plan = render_steps(skeleton, g);
  std::map<std::string, std::vector<LiteralValue>> value_pools;
  for (const auto& slot : slots) {
    if (slot.kind == detail::OpenSlot::Kind::Entity) {
      std::vector<Candidate> pool;
      for (const std::string& id : rng.sample(g.entities_of_type(slot.type),
                                              pool_cap))
        pool.push_back({id, g.label(id)});
      request.entity_pools[slot.name] = std::move(pool);
    } else if (slot.kind == detail::OpenSlot::Kind::Surface) {
      std::vector<std::string> surfaces;
      for (const auto& [surface, amb] : g.ambiguity()) {
        int of_type = 0;
        for (const std::string& id : amb.entities)
          of_type += g.entity(id).type == slot.type;
        if (of_type >= std::max(goal.min_branches, 1) && of_type >= 2)
          surfaces.push_back(surface);
      }
      std::vector<Candidate> pool;
      for (const std::string& s : rng.sample(std::move(surfaces), pool_cap))
        pool.push_back({s, s});
      request.entity_pools[slot.name] = std::move(pool);
    } else {
      std::vector<LiteralValue> values;
      for (const auto& f : g.attribute_facts())
        if (f.attribute == slot.attribute) values.push_back(f.value);
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      value_pools[slot.name] = rng.sample(std::move(values), pool_cap);
      request.value_pools[slot.name] = value_pools[slot.name];
    }
  }
  for (const auto& slot : slots) {
    const bool is_value = slot.kind == detail::OpenSlot::Kind::Value;
    if ((is_value && value_pools[slot.name].empty()) ||
        (!is_value && request.entity_pools[slot.name].empty()))
      throw NoViableBinding("no candidates for slot " + slot.name);
  }

  // Consult the selector; invalid output degrades to the plain fallback.
  Selection picks;
  if (selector && !slots.empty()) {
    if (report) report->selector_consulted = true;
    try {
      Selection raw = selector->select(request);
      for (const auto& [slot, id] : raw.entities) {
        auto pool = request.entity_pools.find(slot);
        if (pool == request.entity_pools.end()) continue;
        for (const auto& c : pool->second)
          if (c.id == id) picks.entities[slot] = id;
      }
      for (const auto& [slot, value] : raw.values) {
        auto pool = value_pools.find(slot);
        if (pool == value_pools.end()) continue;
        for (const auto& v : pool->second)
          if (v == value) picks.values[slot] = value;
      }
    } catch (const Error&) {
      // Selector unavailable or malformed: proceed unassisted.
    }
  }

  // Per-slot candidate orders: selector choice first, rest shuffled.
  struct SlotOrder {
    detail::OpenSlot slot;
    std::vector<std::string> entity_order;
    std::vector<LiteralValue> value_order;
  };
  std::vector<SlotOrder> order;
  for (const auto& slot : slots) {
    SlotOrder so{slot, {}, {}};
    if (slot.kind == detail::OpenSlot::Kind::Value) {
      so.value_order = value_pools[slot.name];
      rng.shuffle(so.value_order);
      if (auto it = picks.values.find(slot.name); it != picks.values.end()) {
        std::erase(so.value_order, it->second);
        so.value_order.insert(so.value_order.begin(), it->second);
        if (report) report->selector_used = true;
      }
    } else {
      for (const auto& c : request.entity_pools[slot.name])
        so.entity_order.push_back(c.id);
      rng.shuffle(so.entity_order);
      if (auto it = picks.entities.find(slot.name);
          it != picks.entities.end()) {
        std::erase(so.entity_order, it->second);
        so.entity_order.insert(so.entity_order.begin(), it->second);
        if (report) report->selector_used = true;
      }
      // Cheap local pruning: an atomic seed with no outgoing traversal can
      // never contribute a non-empty branch.
      const auto* atomic = std::get_if<AtomicOp>(&skeleton.step(slot.step).op);
      std::vector<std::string> kept;
      for (const std::string& id : so.entity_order) {
        if (slot.kind == detail::OpenSlot::Kind::Entity) {
          if (!g.neighbors(id, atomic->relation, atomic->dir).empty())
            kept.push_back(id);
        } else {
          int viable = 0;
          for (const std::string& e : g.surface(id).entities)
            viable += g.entity(e).type == slot.type &&
                      !g.neighbors(e, atomic->relation, atomic->dir).empty();
          if (viable >= std::max(goal.min_branches, 1)) kept.push_back(id);
        }
      }
      so.entity_order = std::move(kept);
      if (so.entity_order.empty())
        throw NoViableBinding("no viable candidates for slot " + slot.name);
    }
    order.push_back(std::move(so));
  }

  // Depth-first product over the ordered pools, capped by full executions.
  std::map<std::string, std::string> entities;
  std::map<std::string, LiteralValue> values;
  std::string surface;
  int executions = 0;
  const int max_executions = std::max(1, config.max_attempts_per_plan);

  std::function<std::optional<Plan>(std::size_t)> search =
      [&](std::size_t depth) -> std::optional<Plan> {
    if (depth == order.size()) {
      if (executions >= max_executions) return std::nullopt;
      ++executions;
      if (report) report->full_executions = executions;
      Plan plan = detail::ground_plan(skeleton, entities, values, surface);
      try {
        BranchedExecution be = execute_branched_full(plan, g);
        if (static_cast<int>(be.branches.size()) >= goal.min_branches &&
            to_branched_answer(be).total_size() <= goal.max_total)
          return plan;
      } catch (const AllBranchesEmpty&) {
      }
      return std::nullopt;
    }
    const SlotOrder& so = order[depth];
    if (so.slot.kind == detail::OpenSlot::Kind::Value) {
      for (const LiteralValue& v : so.value_order) {
        if (executions >= max_executions) return std::nullopt;
        values[so.slot.name] = v;
        if (auto plan = search(depth + 1)) return plan;
      }
      values.erase(so.slot.name);
    } else {
      for (const std::string& id : so.entity_order) {
        if (executions >= max_executions) return std::nullopt;
        if (so.slot.kind == detail::OpenSlot::Kind::Surface)
          surface = id;
        else
          entities[so.slot.name] = id;
        if (auto plan = search(depth + 1)) return plan;
      }
      if (so.slot.kind == detail::OpenSlot::Kind::Surface)
        surface.clear();
      else
        entities.erase(so.slot.name);
    }
    return std::nullopt;
  };

  if (auto plan = search(0)) return *plan;
  throw NoViableBinding("no binding meets the goal after " +
                        std::to_string(executions) + " executions");
}

}  // namespace kgqa
