#pragma once

// Quota-driven dataset synthesis.
//
// Attempts are numbered by ordinal; each ordinal derives its own RNG stream
// from (config.seed, ordinal) and independently runs sample -> realize ->
// execute -> assemble.  Workers race through ordinals in chunks, but
// acceptance scans strictly in ordinal order, so the emitted dataset depends
// only on (seed, graph, config) — never on the worker count or scheduling.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "kgqa/executor.hpp"
#include "kgqa/realize.hpp"
#include "kgqa/record.hpp"
#include "kgqa/sampler.hpp"
#include "kgqa/stats.hpp"

namespace kgqa {

struct SynthesisQuota {
  int ambiguous = 0;
  int non_ambiguous = 0;
  // Optional cap on records per domain tag (applied at acceptance time).
  std::map<std::string, int> per_domain;
};

struct SynthesisOutcome {
  std::vector<QARecord> records;
  DatasetStats stats;
  std::uint64_t ordinals_tried = 0;
};

namespace detail {

inline std::set<std::string> ambiguous_seed_types(const KnowledgeGraph& g) {
  std::set<std::string> types;
  for (const auto& [surface, amb] : g.ambiguity()) {
    std::map<std::string, int> per_type;
    for (const std::string& id : amb.entities) per_type[g.entity(id).type] += 1;
    for (const auto& [type, n] : per_type)
      if (n >= 2) types.insert(type);
  }
  return types;
}

// One full attempt; nullopt when any stage fails to produce a keepable
// record (the ordinal is simply skipped).
inline std::optional<QARecord> attempt_record(
    const KnowledgeGraph& g, const SynthesisConfig& config,
    std::uint64_t ordinal, bool want_ambiguous,
    const std::set<std::string>& amb_types, EntitySelector* selector) {
  Rng rng = Rng::derive(config.seed, ordinal);
  try {
    Plan skeleton =
        sample_plan_skeleton(g.schema(), config, rng, want_ambiguous,
                             want_ambiguous ? amb_types : std::set<std::string>{});
    RealizeGoal goal{want_ambiguous ? 2 : 1, config.max_answer_size};
    Plan plan = realize_entities(skeleton, g, selector, config, rng, goal,
                                 "select:" + std::to_string(ordinal));
    BranchedExecution be = execute_branched_full(plan, g);
    if (static_cast<int>(be.branches.size()) < goal.min_branches)
      return std::nullopt;

    QARecord record;
    record.plan = std::move(plan);
    record.answers = to_branched_answer(be);
    if (record.answers.total_size() > config.max_answer_size)
      return std::nullopt;
    record.rendered_plan = render_steps(record.plan, g);
    record.stats = compute_record_stats(record.plan, be);
    record.domain = g.schema().entity_type(record.plan.goal_type).domain;
    return record;
  } catch (const ExhaustedAttempts&) {
  } catch (const NoViableBinding&) {
  } catch (const AllBranchesEmpty&) {
  }
  return std::nullopt;
}

}  // namespace detail

inline SynthesisOutcome synthesize_dataset(const KnowledgeGraph& g,
                                           const SynthesisConfig& config,
                                           const SynthesisQuota& quota,
                                           EntitySelector* selector = nullptr,
                                           int workers = 1) {
  if (quota.ambiguous < 0 || quota.non_ambiguous < 0 ||
      quota.ambiguous + quota.non_ambiguous == 0)
    throw ConfigError("synthesis quota must request at least one record");
  workers = std::max(1, workers);

  const std::set<std::string> amb_types = detail::ambiguous_seed_types(g);

  // Alternate attempt kinds when both quotas are open so neither subset
  // starves; parity keeps the assignment independent of progress.
  auto wants_ambiguous = [&](std::uint64_t ordinal) {
    if (quota.ambiguous == 0) return false;
    if (quota.non_ambiguous == 0) return true;
    return ordinal % 2 == 0;
  };

  const std::uint64_t total_quota =
      static_cast<std::uint64_t>(quota.ambiguous) + quota.non_ambiguous;
  const std::uint64_t ordinal_budget = 500 * total_quota;

  SynthesisOutcome outcome;
  std::map<std::string, int> domain_taken;
  int taken_ambiguous = 0, taken_non_ambiguous = 0;

  auto filled = [&] {
    return taken_ambiguous >= quota.ambiguous &&
           taken_non_ambiguous >= quota.non_ambiguous;
  };

  const std::uint64_t chunk =
      std::max<std::uint64_t>(16, static_cast<std::uint64_t>(workers) * 8);
  std::uint64_t base = 0;
  while (!filled()) {
    if (base >= ordinal_budget)
      throw QuotaUnreachable(
          "quota not reachable within " + std::to_string(ordinal_budget) +
          " attempts (" + std::to_string(taken_ambiguous) + "/" +
          std::to_string(quota.ambiguous) + " ambiguous, " +
          std::to_string(taken_non_ambiguous) + "/" +
          std::to_string(quota.non_ambiguous) + " non-ambiguous)");

    const std::uint64_t end = std::min(base + chunk, ordinal_budget);
    std::vector<std::optional<QARecord>> results(end - base);
    std::atomic<std::uint64_t> cursor{base};
    auto work = [&] {
      for (std::uint64_t ord = cursor.fetch_add(1); ord < end;
           ord = cursor.fetch_add(1))
        results[ord - base] = detail::attempt_record(
            g, config, ord, wants_ambiguous(ord), amb_types, selector);
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }

    // Strict ordinal-order acceptance.
    for (std::uint64_t ord = base; ord < end && !filled(); ++ord) {
      auto& result = results[ord - base];
      outcome.ordinals_tried = ord + 1;
      if (!result) continue;
      QARecord& r = *result;
      int& taken = r.answers.ambiguous ? taken_ambiguous : taken_non_ambiguous;
      const int cap = r.answers.ambiguous ? quota.ambiguous
                                          : quota.non_ambiguous;
      if (taken >= cap) continue;
      if (auto it = quota.per_domain.find(r.domain);
          it != quota.per_domain.end() && domain_taken[r.domain] >= it->second)
        continue;
      taken += 1;
      domain_taken[r.domain] += 1;
      r.id = "q" + pad_number(outcome.records.size() + 1, 6);
      outcome.records.push_back(std::move(r));
    }
    base = end;
  }

  outcome.stats = compute_dataset_stats(outcome.records);
  return outcome;
}

}  // namespace kgqa
