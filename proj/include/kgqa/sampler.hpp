#pragma once

// Random plan-skeleton sampling.  Grows one or two traversal chains from
// typed hole seeds, choosing each extension among type-legal moves weighted
// by SynthesisConfig::op_weights, and merges chains with a set operation.
// groupby is always emitted together with a count filter so its
// multiplicity is consumed.  Every returned skeleton typechecks and passes
// the heuristic rules; the sampler resamples internally and reports the
// last violations if it cannot produce one.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgqa/heuristics.hpp"
#include "kgqa/plan.hpp"
#include "kgqa/rng.hpp"
#include "kgqa/typecheck.hpp"
#include "kgqa/util.hpp"

namespace kgqa {

struct SynthesisConfig {
  std::uint64_t seed = 0;
  int min_steps = 2;
  int max_steps = 8;
  // Keys: atomic, join, filter, groupby, union, difference, intersection.
  // Missing keys default to 1.0; zero disables an operation.
  std::map<std::string, double> op_weights;
  int candidate_pool = 50;
  int max_attempts_per_plan = 64;
  int max_answer_size = 64;

  double op_weight(const std::string& op) const {
    auto it = op_weights.find(op);
    return it == op_weights.end() ? 1.0 : it->second;
  }
};

class ExhaustedAttempts : public Error {
 public:
  ExhaustedAttempts(const std::string& msg,
                    std::vector<RuleViolation> violations)
      : Error(msg), last_violations(std::move(violations)) {}
  std::vector<RuleViolation> last_violations;
};

namespace detail {

// One growable traversal chain: the open step index and its current type.
struct Chain {
  int step = 0;
  std::string type;
  bool has_join = false;  // whether the open step is a join (groupby target)
};

struct SamplerTables {
  // type -> (relation id, direction) pairs whose near side is that type
  std::map<std::string, std::vector<std::pair<std::string, Direction>>> touch;
  std::map<std::string, std::vector<std::string>> attrs_by_type;
  std::vector<std::pair<std::string, Direction>> all_moves;

  explicit SamplerTables(const Schema& schema) {
    for (const auto& [id, r] : schema.relations) {
      touch[r.source_type].push_back({id, Direction::Forward});
      touch[r.target_type].push_back({id, Direction::Reverse});
      all_moves.push_back({id, Direction::Forward});
      all_moves.push_back({id, Direction::Reverse});
    }
    for (const auto& [id, a] : schema.attributes)
      attrs_by_type[a.subject_type].push_back(id);
  }

  const std::vector<std::pair<std::string, Direction>>& touching(
      const std::string& type) const {
    static const std::vector<std::pair<std::string, Direction>> none;
    auto it = touch.find(type);
    return it == touch.end() ? none : it->second;
  }

  const std::vector<std::string>& attrs(const std::string& type) const {
    static const std::vector<std::string> none;
    auto it = attrs_by_type.find(type);
    return it == attrs_by_type.end() ? none : it->second;
  }
};

class SkeletonSampler {
 public:
  SkeletonSampler(const Schema& schema, const SynthesisConfig& config,
                  Rng& rng, bool ambiguous,
                  const std::set<std::string>& ambiguous_seed_types)
      : schema_(schema),
        config_(config),
        rng_(rng),
        ambiguous_(ambiguous),
        ambiguous_seed_types_(ambiguous_seed_types),
        tables_(schema) {}

  Plan sample() {
    std::vector<RuleViolation> last;
    for (int attempt = 0; attempt < config_.max_attempts_per_plan; ++attempt) {
      Plan plan;
      if (!grow(plan)) continue;
      if (!typechecks(plan, schema_)) continue;  // defensive; growth is typed
      auto violations = validate_heuristics(
          plan, {config_.min_steps, config_.max_steps});
      if (violations.empty()) return plan;
      last = std::move(violations);
    }
    throw ExhaustedAttempts("could not sample a valid plan skeleton after " +
                                std::to_string(config_.max_attempts_per_plan) +
                                " attempts",
                            std::move(last));
  }

 private:
  bool grow(Plan& plan) {
    PlanBuilder builder;
    std::vector<Chain> open;
    slot_counts_.clear();

    if (!start_chain(builder, open, ambiguous_)) return false;
    int length = 1;

    while (true) {
      if (open.size() == 1 && length >= config_.min_steps &&
          rng_.chance(stop_probability(length)))
        break;
      if (length >= config_.max_steps) {
        if (open.size() == 1) break;
        return false;
      }

      enum Move { kJoin, kFilter, kGroupBy, kAtomic, kUnion, kDiff, kInter };
      std::vector<Move> moves;
      std::vector<double> weights;
      auto offer = [&](Move m, const char* name, bool feasible) {
        double w = config_.op_weight(name);
        if (feasible && w > 0) {
          moves.push_back(m);
          weights.push_back(w);
        }
      };

      const int budget = config_.max_steps - length;
      // Steps still needed to close extra chains after this move.
      const int merge_debt = static_cast<int>(open.size()) - 1;
      bool any_touch = false, any_attr = false, any_join_chain = false;
      for (const Chain& c : open) {
        any_touch = any_touch || !tables_.touching(c.type).empty();
        any_attr = any_attr || !tables_.attrs(c.type).empty() ||
                   !tables_.touching(c.type).empty();
        any_join_chain = any_join_chain || c.has_join;
      }
      const bool set_ops_enabled = config_.op_weight("union") > 0 ||
                                   config_.op_weight("difference") > 0 ||
                                   config_.op_weight("intersection") > 0;

      offer(kJoin, "join", any_touch && budget >= 1 + merge_debt);
      offer(kFilter, "filter", any_attr && budget >= 1 + merge_debt);
      offer(kGroupBy, "groupby", any_join_chain && budget >= 2 + merge_debt);
      offer(kAtomic, "atomic",
            open.size() == 1 && set_ops_enabled && budget >= 2 &&
                can_open_second_chain(open[0].type));
      if (open.size() == 2 && open[0].type == open[1].type) {
        offer(kUnion, "union", true);
        offer(kDiff, "difference", true);
        offer(kInter, "intersection", true);
      }
      if (moves.empty()) return false;

      switch (moves[rng_.weighted(weights)]) {
        case kJoin: apply_join(builder, open); break;
        case kFilter: apply_filter(builder, open); break;
        case kGroupBy: apply_group_count(builder, open); break;
        case kAtomic:
          if (!start_chain(builder, open, false, open[0].type)) return false;
          break;
        case kUnion: apply_set(builder, open, OpKind::Union); break;
        case kDiff: apply_set(builder, open, OpKind::Difference); break;
        case kInter: apply_set(builder, open, OpKind::Intersection); break;
      }
      length = count_steps(open, builder);
    }

    plan = builder.finish();
    return typechecks(plan, schema_);
  }

  double stop_probability(int length) const {
    const int span = config_.max_steps - config_.min_steps + 1;
    return static_cast<double>(length - config_.min_steps + 1) / span;
  }

  // A second chain must be mergeable, so its traversal must land on the
  // first chain's current type.
  bool can_open_second_chain(const std::string& goal_type) const {
    for (const auto& [rel, dir] : tables_.all_moves)
      if (far_type(schema_.relation(rel), dir) == goal_type) return true;
    return false;
  }

  bool start_chain(PlanBuilder& builder, std::vector<Chain>& open,
                   bool ambiguous, const std::string& goal_type = "") {
    std::vector<std::pair<std::string, Direction>> options;
    for (const auto& [rel, dir] : tables_.all_moves) {
      const RelationDef& r = schema_.relation(rel);
      if (!goal_type.empty() && far_type(r, dir) != goal_type) continue;
      if (ambiguous && !ambiguous_seed_types_.empty() &&
          !ambiguous_seed_types_.count(near_type(r, dir)))
        continue;
      options.push_back({rel, dir});
    }
    if (options.empty()) return false;
    auto [rel, dir] = options[rng_.below(options.size())];
    const RelationDef& r = schema_.relation(rel);
    const std::string& seed_type = near_type(r, dir);
    Seed seed = ambiguous ? Seed::ambiguous("", seed_type)
                          : Seed::hole(next_slot(seed_type), seed_type);
    int step = builder.atomic(std::move(seed), rel, dir);
    open.push_back({step, far_type(r, dir), false});
    return true;
  }

  void apply_join(PlanBuilder& builder, std::vector<Chain>& open) {
    Chain& c = pick_chain(open, [&](const Chain& ch) {
      return !tables_.touching(ch.type).empty();
    });
    const auto& options = tables_.touching(c.type);
    auto [rel, dir] = options[rng_.below(options.size())];
    c.step = builder.join(c.step, rel, dir);
    c.type = far_type(schema_.relation(rel), dir);
    c.has_join = true;
  }

  void apply_filter(PlanBuilder& builder, std::vector<Chain>& open) {
    Chain& c = pick_chain(open, [&](const Chain& ch) {
      return !tables_.attrs(ch.type).empty() ||
             !tables_.touching(ch.type).empty();
    });
    const auto& rels = tables_.touching(c.type);
    const auto& attrs = tables_.attrs(c.type);
    const bool use_attr =
        !attrs.empty() && (rels.empty() || rng_.chance(0.5));
    Predicate pred;
    if (use_attr) {
      const std::string& attr = attrs[rng_.below(attrs.size())];
      AttrComparePred p;
      p.attribute = attr;
      static const Cmp cmps[] = {Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt};
      p.cmp = cmps[rng_.below(5)];
      if (schema_.attribute(attr).value_kind == ValueKind::String)
        p.cmp = Cmp::Eq;
      p.value_hole = true;
      p.slot = next_slot_value(attr);
      pred = std::move(p);
    } else {
      auto [rel, dir] = rels[rng_.below(rels.size())];
      pred = HasRelationPred{rel, dir, std::nullopt};
    }
    c.step = builder.filter(c.step, std::move(pred));
    c.has_join = false;
  }

  void apply_group_count(PlanBuilder& builder, std::vector<Chain>& open) {
    Chain& c = pick_chain(open, [](const Chain& ch) { return ch.has_join; });
    int grouped = builder.group_by(c.step);
    int k = 2 + static_cast<int>(rng_.below(2));  // threshold 2 or 3
    c.step = builder.filter(grouped, CountAtLeastPred{k});
    c.has_join = false;
  }

  void apply_set(PlanBuilder& builder, std::vector<Chain>& open, OpKind kind) {
    int l = open[0].step, r = open[1].step;
    if (rng_.chance(0.5)) std::swap(l, r);  // difference is asymmetric
    Chain merged{builder.set_op(kind, l, r), open[0].type, false};
    open.clear();
    open.push_back(merged);
  }

  template <class Pred>
  Chain& pick_chain(std::vector<Chain>& open, Pred eligible) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < open.size(); ++i)
      if (eligible(open[i])) candidates.push_back(i);
    return open[candidates[rng_.below(candidates.size())]];
  }

  std::string next_slot(const std::string& type) {
    int n = ++slot_counts_["e:" + type];
    std::string slot = "SUBJECT_" + slot_slug(type);
    if (n > 1) slot += "_" + std::to_string(n);
    return slot;
  }

  std::string next_slot_value(const std::string& attr) {
    int n = ++slot_counts_["v:" + attr];
    std::string slot = "VALUE_" + slot_slug(attr);
    if (n > 1) slot += "_" + std::to_string(n);
    return slot;
  }

  static int count_steps(const std::vector<Chain>& open,
                         PlanBuilder& builder) {
    // PlanBuilder has no size accessor; track via the max open step plus the
    // fact that every step is reachable.  The highest issued index is the
    // current length because indexes are sequential.
    int n = 0;
    for (const Chain& c : open) n = std::max(n, c.step);
    (void)builder;
    return n;
  }

  const Schema& schema_;
  const SynthesisConfig& config_;
  Rng& rng_;
  bool ambiguous_;
  const std::set<std::string>& ambiguous_seed_types_;
  SamplerTables tables_;
  std::map<std::string, int> slot_counts_;
};

}  // namespace detail

// Samples a hole-seeded plan skeleton.  When `ambiguous` is set, the first
// chain's seed is an ambiguous reference whose surface is chosen during
// realization; `ambiguous_seed_types` optionally restricts its entity type
// to types for which the caller knows ambiguous surfaces exist.
inline Plan sample_plan_skeleton(
    const Schema& schema, const SynthesisConfig& config, Rng& rng,
    bool ambiguous = false, const std::set<std::string>& ambiguous_seed_types = {}) {
  detail::SkeletonSampler sampler(schema, config, rng, ambiguous,
                                  ambiguous_seed_types);
  return sampler.sample();
}

}  // namespace kgqa
