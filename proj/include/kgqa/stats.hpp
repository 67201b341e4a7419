#pragma once

// Per-record and dataset-level statistics.  Dataset stats report the
// ambiguous and non-ambiguous subsets separately (branch-related means only
// where branching exists) plus explicit {value: count} histograms: steps,
// answer sizes, and branch counts are counted per record; operation and
// predicate kinds are counted per occurrence.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/executor.hpp"
#include "kgqa/record.hpp"
#include "kgqa/util.hpp"

namespace kgqa {

inline RecordStats compute_record_stats(const Plan& plan,
                                        const BranchedExecution& be) {
  RecordStats s;
  s.n_steps = static_cast<int>(plan.steps.size());
  s.n_branches = static_cast<int>(be.branches.size());
  for (const auto& b : be.branches) {
    s.answer_size_total += static_cast<int>(b.exec.answer().size());
    // Every distinct entity touched while executing this branch, including
    // intermediates; branches are independent readings, so they sum.
    IdSet touched;
    if (b.entity.size()) touched.push_back(b.entity);
    for (const StepResult& step : b.exec.steps)
      touched.insert(touched.end(), step.members.begin(), step.members.end());
    sort_unique(touched);
    s.entities_involved += static_cast<int>(touched.size());
  }
  s.answer_size_per_branch =
      s.n_branches ? static_cast<double>(s.answer_size_total) / s.n_branches
                   : 0.0;
  return s;
}

struct SubsetStats {
  int count = 0;
  double mean_question_words = 0.0;
  double mean_answer_size = 0.0;
  double mean_steps = 0.0;
  double mean_entities_involved = 0.0;
  // Branch structure; meaningful for the ambiguous subset only.
  double mean_branches = 0.0;
  double mean_answer_size_per_branch = 0.0;
  bool operator==(const SubsetStats&) const = default;
};

struct DatasetStats {
  SubsetStats ambiguous;
  SubsetStats non_ambiguous;
  std::map<int, int> hist_steps;
  std::map<int, int> hist_answer_size;
  std::map<int, int> hist_branches;
  std::map<std::string, int> hist_operations;
  std::map<std::string, int> hist_predicates;
  bool operator==(const DatasetStats&) const = default;
};

inline DatasetStats compute_dataset_stats(const std::vector<QARecord>& records) {
  if (records.empty())
    throw EmptyInput("cannot compute statistics over zero records");

  DatasetStats out;
  for (const QARecord& r : records) {
    SubsetStats& s = r.answers.ambiguous ? out.ambiguous : out.non_ambiguous;
    s.count += 1;
    s.mean_question_words += r.stats.question_words;
    s.mean_answer_size += r.stats.answer_size_total;
    s.mean_steps += r.stats.n_steps;
    s.mean_entities_involved += r.stats.entities_involved;
    s.mean_branches += r.stats.n_branches;
    s.mean_answer_size_per_branch += r.stats.answer_size_per_branch;

    out.hist_steps[r.stats.n_steps] += 1;
    out.hist_answer_size[r.stats.answer_size_total] += 1;
    out.hist_branches[r.stats.n_branches] += 1;
    for (const PlanStep& step : r.plan.steps) {
      out.hist_operations[op_kind_name(op_kind(step.op))] += 1;
      if (const auto* f = std::get_if<FilterOp>(&step.op))
        out.hist_predicates[predicate_kind_name(f->pred)] += 1;
    }
  }
  for (SubsetStats* s : {&out.ambiguous, &out.non_ambiguous}) {
    if (!s->count) continue;
    s->mean_question_words /= s->count;
    s->mean_answer_size /= s->count;
    s->mean_steps /= s->count;
    s->mean_entities_involved /= s->count;
    s->mean_branches /= s->count;
    s->mean_answer_size_per_branch /= s->count;
  }
  return out;
}

namespace detail {

inline nlohmann::json subset_to_json(const SubsetStats& s, bool branched) {
  nlohmann::json j{{"count", s.count},
                   {"mean_question_words", s.mean_question_words},
                   {"mean_answer_size", s.mean_answer_size},
                   {"mean_steps", s.mean_steps},
                   {"mean_entities_involved", s.mean_entities_involved}};
  if (branched) {
    j["mean_branches"] = s.mean_branches;
    j["mean_answer_size_per_branch"] = s.mean_answer_size_per_branch;
  }
  return j;
}

template <class K>
nlohmann::json hist_to_json(const std::map<K, int>& hist) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : hist) {
    if constexpr (std::is_same_v<K, int>)
      j[std::to_string(k)] = v;
    else
      j[k] = v;
  }
  return j;
}

}  // namespace detail

inline nlohmann::json stats_to_json(const DatasetStats& s) {
  return {{"ambiguous", detail::subset_to_json(s.ambiguous, true)},
          {"non_ambiguous", detail::subset_to_json(s.non_ambiguous, false)},
          {"histograms",
           {{"steps", detail::hist_to_json(s.hist_steps)},
            {"answer_size", detail::hist_to_json(s.hist_answer_size)},
            {"branches", detail::hist_to_json(s.hist_branches)},
            {"operations", detail::hist_to_json(s.hist_operations)},
            {"predicates", detail::hist_to_json(s.hist_predicates)}}}};
}

// Human-readable block for the CLI.
inline std::string stats_to_text(const DatasetStats& s) {
  char buf[256];
  std::string out;
  auto row = [&](const char* name, double amb, double non) {
    std::snprintf(buf, sizeof buf, "  %-28s %12.2f %14.2f\n", name, amb, non);
    out += buf;
  };
  out += "                                  ambiguous  non-ambiguous\n";
  std::snprintf(buf, sizeof buf, "  %-28s %12d %14d\n", "count",
                s.ambiguous.count, s.non_ambiguous.count);
  out += buf;
  row("mean question words", s.ambiguous.mean_question_words,
      s.non_ambiguous.mean_question_words);
  row("mean answer size", s.ambiguous.mean_answer_size,
      s.non_ambiguous.mean_answer_size);
  row("mean plan steps", s.ambiguous.mean_steps, s.non_ambiguous.mean_steps);
  row("mean entities involved", s.ambiguous.mean_entities_involved,
      s.non_ambiguous.mean_entities_involved);
  std::snprintf(buf, sizeof buf, "  %-28s %12.2f %14s\n", "mean branches",
                s.ambiguous.mean_branches, "-");
  out += buf;
  std::snprintf(buf, sizeof buf, "  %-28s %12.2f %14s\n",
                "mean answers per branch",
                s.ambiguous.mean_answer_size_per_branch, "-");
  out += buf;
  return out;
}

}  // namespace kgqa
