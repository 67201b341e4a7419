#pragma once

// Evaluation harness: branch alignment, pooled micro precision/recall,
// label-aware exact match, aggregation, and the error taxonomy.
//
// Alignment runs in three stages: (1) exact normalized label match (plus
// the single-branch "default" convention), (2) unambiguous partial match —
// whole-label containment or a distinctive shared token that occurs in
// exactly one gold label, accepted only when exactly one gold candidate
// remains, and (3) an optional chat-backed matcher for the leftovers whose
// output is validated against the gold label set.  Unaligned gold branches
// count fully against recall; unaligned predicted branches count against
// precision (unless lenient mode ignores them) and always forfeit exact
// match.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/chat.hpp"
#include "kgqa/normalize.hpp"
#include "kgqa/prompts.hpp"
#include "kgqa/record.hpp"

namespace kgqa {

struct ToolEvent {
  std::string tool;
  std::string query;
  std::string status;
  std::vector<std::string> documents;
};

struct Prediction {
  std::string id;
  std::string reasoning;
  std::map<std::string, std::vector<std::string>> answers;  // label -> strings
  std::optional<std::vector<ToolEvent>> transcript;
};

inline Prediction prediction_from_json(const nlohmann::json& j,
                                       const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
  Prediction p;
  if (!j.contains("id") || !j["id"].is_string())
    throw ParseError(where + ": missing string field 'id'");
  p.id = j["id"].get<std::string>();
  p.reasoning = j.value("reasoning", std::string{});
  if (!j.contains("answers") || !j["answers"].is_object())
    throw ParseError(where + ": missing object field 'answers'");
  for (auto it = j["answers"].begin(); it != j["answers"].end(); ++it) {
    if (!it.value().is_array())
      throw ParseError(where + ": answers." + it.key() + " must be an array");
    std::vector<std::string> values;
    for (const auto& v : it.value()) {
      if (!v.is_string())
        throw ParseError(where + ": answers." + it.key() +
                         " must contain strings");
      values.push_back(v.get<std::string>());
    }
    p.answers[it.key()] = std::move(values);
  }
  if (j.contains("transcript")) {
    if (!j["transcript"].is_array())
      throw ParseError(where + ": 'transcript' must be an array");
    std::vector<ToolEvent> events;
    for (const auto& ej : j["transcript"]) {
      ToolEvent e;
      e.tool = ej.value("tool", std::string{});
      e.query = ej.value("query", std::string{});
      e.status = ej.value("status", std::string{});
      for (const auto& d : ej.value("documents", nlohmann::json::array()))
        e.documents.push_back(d.get<std::string>());
      events.push_back(std::move(e));
    }
    p.transcript = std::move(events);
  }
  return p;
}

inline std::vector<Prediction> read_predictions_jsonl(const std::string& path) {
  std::vector<Prediction> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(read_file(path))) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(
        prediction_from_json(j, path + ":" + std::to_string(line_no)));
  }
  return out;
}

// --- gold view ---------------------------------------------------------------

// Gold answers keyed by normalized branch labels, with display labels and
// the underlying entity ids kept for reporting and error analysis.
struct GoldView {
  bool ambiguous = false;
  std::map<std::string, IdSet> branch_keys;  // branch key -> entity keys
  std::map<std::string, IdSet> branch_ids;   // branch key -> entity ids
  std::map<std::string, std::string> display;  // branch key -> original label
};

inline GoldView make_gold_view(const QARecord& record,
                               const KnowledgeGraph& g,
                               const Normalizer& norm) {
  GoldView view;
  view.ambiguous = record.answers.ambiguous;
  for (const auto& [label, ids] : record.answers.branches) {
    const std::string key = norm.branch_key(label);
    IdSet entity_keys;
    for (const std::string& id : ids)
      entity_keys.push_back(
          norm.entity_key(g.has_entity(id) ? g.label(id) : id));
    sort_unique(entity_keys);
    view.branch_keys[key] = std::move(entity_keys);
    view.branch_ids[key] = ids;
    view.display[key] = label;
  }
  return view;
}

// --- alignment ---------------------------------------------------------------

namespace detail {

inline std::vector<std::string> label_tokens(const std::string& key) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : key) {
    const bool sep = std::isspace(static_cast<unsigned char>(c)) || c == '(' ||
                     c == ')' || c == ',' || c == ';';
    if (sep) {
      if (cur.size() >= 2) tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (cur.size() >= 2) tokens.push_back(cur);
  return tokens;
}

inline bool contains(const std::string& haystack, const std::string& needle) {
  return !needle.empty() && haystack.find(needle) != std::string::npos;
}

}  // namespace detail

struct AlignOptions {
  ChatClient* matcher = nullptr;     // stage-3 fallback, optional
  const PromptKit* kit = nullptr;
  std::string request_key;           // e.g. "branch_match:q000001"
};

// Maps normalized prediction labels to normalized gold branch keys.
// Injective: each gold branch takes at most one prediction.
inline std::map<std::string, std::string> align_branches(
    const Prediction& pred, const GoldView& gold, const Normalizer& norm,
    const AlignOptions& options = {}) {
  std::map<std::string, std::string> alignment;  // pred key -> gold key
  std::set<std::string> taken;

  std::vector<std::string> pred_keys;
  for (const auto& [label, values] : pred.answers)
    pred_keys.push_back(norm.branch_key(label));
  sort_unique(pred_keys);

  // Stage 1: exact key equality.
  for (const std::string& p : pred_keys) {
    if (gold.branch_keys.count(p) && !taken.count(p)) {
      alignment[p] = p;
      taken.insert(p);
    }
  }

  // Single-branch convention: one gold branch and one predicted set match
  // regardless of the predicted label ("default" or anything else).
  if (gold.branch_keys.size() == 1 && pred_keys.size() == 1 &&
      alignment.empty()) {
    alignment[pred_keys[0]] = gold.branch_keys.begin()->first;
    taken.insert(gold.branch_keys.begin()->first);
  }

  // Token frequency across gold labels; a token occurring in exactly one
  // gold label pins that label down.
  std::map<std::string, std::vector<std::string>> token_homes;
  for (const auto& [gkey, ids] : gold.branch_keys)
    for (const std::string& t : detail::label_tokens(gkey))
      token_homes[t].push_back(gkey);

  // Stage 2: unambiguous partial matches.
  for (const std::string& p : pred_keys) {
    if (alignment.count(p)) continue;
    std::set<std::string> candidates;
    for (const auto& [gkey, ids] : gold.branch_keys) {
      if (taken.count(gkey)) continue;
      if (detail::contains(gkey, p) || detail::contains(p, gkey))
        candidates.insert(gkey);
    }
    for (const std::string& t : detail::label_tokens(p)) {
      auto it = token_homes.find(t);
      if (it == token_homes.end() || it->second.size() != 1) continue;
      if (!taken.count(it->second[0])) candidates.insert(it->second[0]);
    }
    if (candidates.size() == 1) {
      alignment[p] = *candidates.begin();
      taken.insert(*candidates.begin());
    }
  }

  // Stage 3: chat-backed matcher over the leftovers; its output is only
  // accepted where it names a remaining gold label verbatim.
  std::vector<std::string> leftovers;
  for (const std::string& p : pred_keys)
    if (!alignment.count(p)) leftovers.push_back(p);
  if (options.matcher && options.kit && !leftovers.empty() &&
      taken.size() < gold.branch_keys.size()) {
    std::vector<std::string> gold_labels;
    for (const auto& [gkey, ids] : gold.branch_keys)
      if (!taken.count(gkey)) gold_labels.push_back(gold.display.at(gkey));
    try {
      ChatRequest request{
          options.request_key.empty() ? "branch_match:?" : options.request_key,
          options.kit->branch_match.system,
          fill_template(options.kit->branch_match.user,
                        {{"GOLD_LABELS", join(gold_labels, "\n")},
                         {"PREDICTED_LABELS", join(leftovers, "\n")}})};
      nlohmann::json j = nlohmann::json::parse(
          options.matcher->complete(request), nullptr, true);
      if (j.is_object()) {
        for (const std::string& p : leftovers) {
          if (!j.contains(p) || !j[p].is_string()) continue;
          const std::string gkey = norm.branch_key(j[p].get<std::string>());
          if (gold.branch_keys.count(gkey) && !taken.count(gkey)) {
            alignment[p] = gkey;
            taken.insert(gkey);
          }
        }
      }
    } catch (const Error&) {
      // Matcher unavailable or unusable; stop at stage 2.
    } catch (const nlohmann::json::exception&) {
    }
  }
  return alignment;
}

// --- scoring -----------------------------------------------------------------

struct BranchScore {
  double precision = 0.0;
  double recall = 0.0;
  int exact = 0;
};

struct QuestionScore {
  double precision = 0.0;
  double recall = 0.0;
  int exact_match = 0;
  // original predicted label -> original gold label
  std::map<std::string, std::string> alignment;
  // gold display label -> per-branch score (only for aligned branches)
  std::map<std::string, BranchScore> per_branch;
};

struct ScoreOptions {
  bool ignore_spurious_branches = false;
  AlignOptions align;
};

inline QuestionScore score_question(const Prediction& pred,
                                    const GoldView& gold,
                                    const Normalizer& norm,
                                    const ScoreOptions& options = {}) {
  const auto alignment = align_branches(pred, gold, norm, options.align);

  // Normalized prediction sets keyed by branch key; original labels kept
  // for the report.
  std::map<std::string, IdSet> pred_sets;
  std::map<std::string, std::string> pred_display;
  for (const auto& [label, values] : pred.answers) {
    const std::string key = norm.branch_key(label);
    IdSet set;
    for (const std::string& v : values) set.push_back(norm.entity_key(v));
    sort_unique(set);
    pred_sets[key] = std::move(set);
    pred_display.emplace(key, label);
  }

  QuestionScore score;
  std::size_t hits = 0, pred_total = 0, gold_total = 0;
  bool all_branches_exact = true;

  for (const auto& [gkey, gset] : gold.branch_keys) gold_total += gset.size();

  std::set<std::string> aligned_gold;
  for (const auto& [pkey, gkey] : alignment) {
    aligned_gold.insert(gkey);
    const IdSet& pset = pred_sets.at(pkey);
    const IdSet& gset = gold.branch_keys.at(gkey);
    const std::size_t inter = set_intersection(pset, gset).size();
    hits += inter;
    pred_total += pset.size();
    BranchScore b;
    b.precision = pset.empty() ? 0.0 : static_cast<double>(inter) / pset.size();
    b.recall = gset.empty() ? 0.0 : static_cast<double>(inter) / gset.size();
    b.exact = pset == gset ? 1 : 0;
    all_branches_exact = all_branches_exact && b.exact;
    score.per_branch[gold.display.at(gkey)] = b;
    score.alignment[pred_display.at(pkey)] = gold.display.at(gkey);
  }

  bool spurious = false;
  for (const auto& [pkey, pset] : pred_sets) {
    if (alignment.count(pkey)) continue;
    spurious = true;
    if (!options.ignore_spurious_branches) pred_total += pset.size();
  }

  score.precision =
      pred_total ? static_cast<double>(hits) / pred_total : 0.0;
  score.recall = gold_total ? static_cast<double>(hits) / gold_total : 0.0;

  const bool all_gold_aligned = aligned_gold.size() == gold.branch_keys.size();
  const bool spurious_ok = options.ignore_spurious_branches || !spurious;
  score.exact_match =
      all_gold_aligned && all_branches_exact && spurious_ok ? 1 : 0;
  return score;
}

// --- error taxonomy ----------------------------------------------------------

enum class Tri { No, Yes, Unknown };

inline std::string tri_name(Tri t) {
  switch (t) {
    case Tri::No: return "no";
    case Tri::Yes: return "yes";
    case Tri::Unknown: return "unknown";
  }
  return "unknown";
}

struct ErrorFlags {
  Tri incomplete_information_extraction = Tri::No;
  Tri incorrect_intermediate_reasoning = Tri::No;
  Tri wrong_tool_call = Tri::No;
};

// Diagnoses why a non-exact prediction missed, following the evidence in
// the tool transcript when one is present:
//   - a gold entity that never appears in any retrieved document (or an
//     entirely uncovered gold branch) points at incomplete information
//     extraction;
//   - a gold entity that was retrieved but still missing from the answer
//     points at incorrect intermediate reasoning;
//   - any failed tool event is a wrong tool call.
// Without a transcript only the branch-coverage clause is computable; the
// document-dependent flags are reported unknown.
inline ErrorFlags classify_errors(const Prediction& pred, const GoldView& gold,
                                  const QuestionScore& score,
                                  const KnowledgeGraph& g,
                                  const Normalizer& norm) {
  ErrorFlags flags;
  if (score.exact_match) return flags;

  // Gold branch key -> aligned predicted set (normalized).
  std::map<std::string, const IdSet*> aligned;
  std::map<std::string, IdSet> pred_sets;
  for (const auto& [label, values] : pred.answers) {
    IdSet set;
    for (const std::string& v : values) set.push_back(norm.entity_key(v));
    sort_unique(set);
    pred_sets[norm.branch_key(label)] = std::move(set);
  }
  for (const auto& [plabel, glabel] : score.alignment)
    aligned[norm.branch_key(glabel)] = &pred_sets.at(norm.branch_key(plabel));

  bool branch_uncovered = false;
  IdSet missed_ids;
  for (const auto& [gkey, gids] : gold.branch_ids) {
    auto it = aligned.find(gkey);
    if (it == aligned.end()) {
      branch_uncovered = true;
      missed_ids.insert(missed_ids.end(), gids.begin(), gids.end());
      continue;
    }
    const IdSet& pset = *it->second;
    const IdSet& gkeys = gold.branch_keys.at(gkey);
    for (std::size_t i = 0; i < gids.size(); ++i) {
      // branch_ids and branch_keys are parallel only setwise; recompute the
      // key per id to stay exact.
      const std::string& id = gids[i];
      const std::string key =
          norm.entity_key(g.has_entity(id) ? g.label(id) : id);
      (void)gkeys;
      if (!set_contains(pset, key)) missed_ids.push_back(id);
    }
  }
  sort_unique(missed_ids);

  if (!pred.transcript.has_value()) {
    flags.incomplete_information_extraction =
        branch_uncovered ? Tri::Yes : Tri::No;
    flags.incorrect_intermediate_reasoning = Tri::Unknown;
    flags.wrong_tool_call = Tri::Unknown;
    return flags;
  }

  std::vector<std::string> documents;
  bool tool_failed = false;
  for (const ToolEvent& e : *pred.transcript) {
    for (const std::string& d : e.documents)
      documents.push_back(Normalizer::basic(d));
    tool_failed = tool_failed || e.status == "error" || e.status == "failed" ||
                  e.status == "malformed";
  }

  bool missed_absent = false, missed_present = false;
  for (const std::string& id : missed_ids) {
    std::vector<std::string> forms;
    if (g.has_entity(id)) {
      forms.push_back(Normalizer::basic(g.entity(id).label));
      for (const std::string& alias : g.entity(id).aliases)
        forms.push_back(Normalizer::basic(alias));
    } else {
      forms.push_back(Normalizer::basic(id));
    }
    bool in_docs = false;
    for (const std::string& doc : documents)
      for (const std::string& form : forms)
        in_docs = in_docs || detail::contains(doc, form);
    (in_docs ? missed_present : missed_absent) = true;
  }

  flags.incomplete_information_extraction =
      missed_absent || branch_uncovered ? Tri::Yes : Tri::No;
  flags.incorrect_intermediate_reasoning = missed_present ? Tri::Yes : Tri::No;
  flags.wrong_tool_call = tool_failed ? Tri::Yes : Tri::No;
  return flags;
}

// --- aggregation and reports ---------------------------------------------------

struct SubsetAggregate {
  int count = 0;
  double precision = 0.0;
  double recall = 0.0;
  double exact_match = 0.0;
};

struct ErrorBreakdown {
  int evaluated = 0;  // non-exact predictions examined
  std::map<std::string, int> yes;
  std::map<std::string, int> unknown;
};

struct QuestionReport {
  std::string id;
  bool ambiguous = false;
  bool missing_prediction = false;
  QuestionScore score;
  ErrorFlags flags;
};

struct EvalReport {
  std::vector<QuestionReport> questions;
  SubsetAggregate ambiguous, non_ambiguous, overall;
  ErrorBreakdown errors;
  int missing_predictions = 0;
};

inline void aggregate(EvalReport& report) {
  auto add = [](SubsetAggregate& agg, const QuestionScore& s) {
    agg.count += 1;
    agg.precision += s.precision;
    agg.recall += s.recall;
    agg.exact_match += s.exact_match;
  };
  for (const QuestionReport& q : report.questions) {
    add(report.overall, q.score);
    add(q.ambiguous ? report.ambiguous : report.non_ambiguous, q.score);
  }
  for (SubsetAggregate* agg :
       {&report.ambiguous, &report.non_ambiguous, &report.overall}) {
    if (!agg->count) continue;
    agg->precision /= agg->count;
    agg->recall /= agg->count;
    agg->exact_match /= agg->count;
  }
}

struct EvalOptions {
  ScoreOptions score;
  bool classify = true;
};

inline EvalReport evaluate_all(const std::vector<QARecord>& records,
                               const std::vector<Prediction>& predictions,
                               const KnowledgeGraph& g, const Normalizer& norm,
                               const EvalOptions& options = {}) {
  if (records.empty()) throw EmptyInput("no gold records to evaluate");
  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions) by_id[p.id] = &p;

  EvalReport report;
  static const std::vector<std::string> flag_names{
      "incomplete_information_extraction", "incorrect_intermediate_reasoning",
      "wrong_tool_call"};
  for (const std::string& name : flag_names) {
    report.errors.yes[name] = 0;
    report.errors.unknown[name] = 0;
  }

  for (const QARecord& r : records) {
    QuestionReport q;
    q.id = r.id;
    q.ambiguous = r.answers.ambiguous;
    const GoldView gold = make_gold_view(r, g, norm);

    static const Prediction empty_prediction{};
    const Prediction* pred = nullptr;
    if (auto it = by_id.find(r.id); it != by_id.end()) {
      pred = it->second;
    } else {
      pred = &empty_prediction;
      q.missing_prediction = true;
      report.missing_predictions += 1;
    }

    ScoreOptions score_options = options.score;
    if (!score_options.align.request_key.empty() ||
        score_options.align.matcher)
      score_options.align.request_key = "branch_match:" + r.id;
    q.score = score_question(*pred, gold, norm, score_options);
    if (options.classify && !q.score.exact_match) {
      q.flags = classify_errors(*pred, gold, q.score, g, norm);
      report.errors.evaluated += 1;
      auto tally = [&](const char* name, Tri t) {
        if (t == Tri::Yes) report.errors.yes[name] += 1;
        if (t == Tri::Unknown) report.errors.unknown[name] += 1;
      };
      tally("incomplete_information_extraction",
            q.flags.incomplete_information_extraction);
      tally("incorrect_intermediate_reasoning",
            q.flags.incorrect_intermediate_reasoning);
      tally("wrong_tool_call", q.flags.wrong_tool_call);
    }
    report.questions.push_back(std::move(q));
  }
  aggregate(report);
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  auto subset = [](const SubsetAggregate& s) {
    return nlohmann::json{{"count", s.count},
                          {"precision", s.precision},
                          {"recall", s.recall},
                          {"exact_match", s.exact_match}};
  };
  nlohmann::json questions = nlohmann::json::array();
  for (const QuestionReport& q : report.questions) {
    nlohmann::json per_branch = nlohmann::json::object();
    for (const auto& [label, b] : q.score.per_branch)
      per_branch[label] = {{"precision", b.precision},
                           {"recall", b.recall},
                           {"exact", b.exact}};
    nlohmann::json jq{{"id", q.id},
                      {"ambiguous", q.ambiguous},
                      {"precision", q.score.precision},
                      {"recall", q.score.recall},
                      {"exact_match", q.score.exact_match},
                      {"alignment", q.score.alignment},
                      {"per_branch", per_branch}};
    if (q.missing_prediction) jq["missing_prediction"] = true;
    if (!q.score.exact_match)
      jq["errors"] = {
          {"incomplete_information_extraction",
           tri_name(q.flags.incomplete_information_extraction)},
          {"incorrect_intermediate_reasoning",
           tri_name(q.flags.incorrect_intermediate_reasoning)},
          {"wrong_tool_call", tri_name(q.flags.wrong_tool_call)}};
    questions.push_back(std::move(jq));
  }
  return {{"subsets",
           {{"ambiguous", subset(report.ambiguous)},
            {"non_ambiguous", subset(report.non_ambiguous)},
            {"overall", subset(report.overall)}}},
          {"errors",
           {{"evaluated_non_exact", report.errors.evaluated},
            {"yes", report.errors.yes},
            {"unknown", report.errors.unknown}}},
          {"missing_predictions", report.missing_predictions},
          {"questions", questions}};
}

inline std::string report_to_text(const EvalReport& report) {
  char buf[256];
  std::string out;
  out += "subset          count  precision     recall  exact_match\n";
  auto row = [&](const char* name, const SubsetAggregate& s) {
    std::snprintf(buf, sizeof buf, "%-15s %5d %10.3f %10.3f %12.3f\n", name,
                  s.count, s.precision, s.recall, s.exact_match);
    out += buf;
  };
  row("ambiguous", report.ambiguous);
  row("non-ambiguous", report.non_ambiguous);
  row("overall", report.overall);
  if (report.missing_predictions) {
    std::snprintf(buf, sizeof buf, "missing predictions: %d\n",
                  report.missing_predictions);
    out += buf;
  }
  if (report.errors.evaluated) {
    out += "error breakdown over " + std::to_string(report.errors.evaluated) +
           " non-exact predictions (yes/unknown):\n";
    for (const auto& [name, yes] : report.errors.yes) {
      std::snprintf(buf, sizeof buf, "  %-36s %4d / %d\n", name.c_str(), yes,
                    report.errors.unknown.at(name));
      out += buf;
    }
  }
  return out;
}

}  // namespace kgqa
