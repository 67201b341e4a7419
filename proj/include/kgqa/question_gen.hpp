#pragma once

// Plan-to-question translation and LLM vetting.
//
// Chat responses are parsed line-anchored: translation replies must carry
// "Analysis:" and "Question:" sections, vet replies a "Classification:"
// line whose value is Valid or Invalid (same line or next).  Anything else
// is MalformedResponse; callers retry and then degrade — translation falls
// back to the deterministic template form, vetting marks the record
// "unvetted" and keeps it (or drops it under strict filtering).

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kgqa/chat.hpp"
#include "kgqa/graph.hpp"
#include "kgqa/prompts.hpp"
#include "kgqa/realize.hpp"
#include "kgqa/record.hpp"
#include "kgqa/render.hpp"
#include "kgqa/typecheck.hpp"

namespace kgqa {

struct TranslationResult {
  std::string analysis;
  std::string question;
  std::string raw;
};

enum class Verdict { Valid, Invalid };

struct VetResult {
  Verdict verdict = Verdict::Valid;
  std::string analysis;
  std::string raw;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string lower_ascii(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

// Value of the first "<label>:" line; multi-line values run until the next
// known label.  Returns false when the label is absent.
inline bool section_value(const std::vector<std::string>& lines,
                          const std::string& label,
                          const std::vector<std::string>& all_labels,
                          std::string* out) {
  const std::string needle = lower_ascii(label) + ":";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string lowered = lower_ascii(trim(lines[i]));
    if (lowered.rfind(needle, 0) != 0) continue;
    std::string value = trim(trim(lines[i]).substr(needle.size()));
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const std::string next = lower_ascii(trim(lines[j]));
      bool is_label = false;
      for (const auto& l : all_labels)
        is_label = is_label || next.rfind(lower_ascii(l) + ":", 0) == 0;
      if (is_label) break;
      if (!value.empty() && !trim(lines[j]).empty()) value += "\n";
      value += trim(lines[j]);
      value = trim(value);
    }
    *out = value;
    return true;
  }
  return false;
}

}  // namespace detail

inline TranslationResult parse_translation(const std::string& raw) {
  const auto lines = split_lines(raw);
  static const std::vector<std::string> labels{"Analysis", "Question"};
  TranslationResult result;
  result.raw = raw;
  if (!detail::section_value(lines, "Analysis", labels, &result.analysis))
    throw MalformedResponse("translation reply lacks an 'Analysis:' section");
  if (!detail::section_value(lines, "Question", labels, &result.question) ||
      result.question.empty())
    throw MalformedResponse("translation reply lacks a 'Question:' section");
  // A question is a single line; keep only the first.
  const auto nl = result.question.find('\n');
  if (nl != std::string::npos) result.question.resize(nl);
  return result;
}

inline VetResult parse_verdict(const std::string& raw) {
  const auto lines = split_lines(raw);
  static const std::vector<std::string> labels{"Analysis", "Classification"};
  VetResult result;
  result.raw = raw;
  detail::section_value(lines, "Analysis", labels, &result.analysis);
  std::string value;
  if (!detail::section_value(lines, "Classification", labels, &value))
    throw MalformedResponse("vet reply lacks a 'Classification:' line");
  std::string token = detail::lower_ascii(detail::trim(value));
  // Tolerate bracketed or punctuated verdicts and a next-line value.
  for (char strip : {'[', ']', '.', '"'})
    token.erase(std::remove(token.begin(), token.end(), strip), token.end());
  if (const auto nl = token.find('\n'); nl != std::string::npos)
    token.resize(nl);
  token = detail::trim(token);
  if (token == "valid") result.verdict = Verdict::Valid;
  else if (token == "invalid") result.verdict = Verdict::Invalid;
  else
    throw MalformedResponse("unrecognized classification '" + value + "'");
  return result;
}

// --- deterministic fallback translation ------------------------------------

inline std::string template_translate(const QARecord& record,
                                      const KnowledgeGraph& g) {
  std::vector<std::string> clauses;
  for (const PlanStep& s : record.plan.steps) {
    std::string clause = render_clause(record.plan, s, g);
    if (!clause.empty())
      clause[0] = static_cast<char>(std::tolower(
          static_cast<unsigned char>(clause[0])));
    clauses.push_back(std::move(clause));
  }
  const std::string& goal_label =
      g.schema().entity_type(record.plan.goal_type).label;
  std::string plural = goal_label;
  plural += plural.empty() || plural.back() == 's' ? "" : "s";
  return "Which " + plural + " satisfy: " + join(clauses, "; ") + "?";
}

// --- prompt assembly --------------------------------------------------------

namespace detail {

inline std::string answers_text(const QARecord& record,
                                const KnowledgeGraph& g) {
  std::vector<std::string> lines;
  for (const auto& [label, ids] : record.answers.branches) {
    std::vector<std::string> names;
    for (const std::string& id : ids)
      names.push_back(g.has_entity(id) ? g.label(id) : id);
    lines.push_back("- " + label + ": " + join(names, "; "));
  }
  return join(lines, "\n");
}

inline std::string plan_text(const QARecord& record) {
  return join(record.rendered_plan, "\n");
}

}  // namespace detail

inline TranslationResult translate(const QARecord& record,
                                   const KnowledgeGraph& g, ChatClient& client,
                                   const PromptKit& kit) {
  ChatRequest request{
      "translate:" + record.id, kit.translation.system,
      fill_template(kit.translation.user,
                    {{"PLAN", detail::plan_text(record)},
                     {"ANSWERS", detail::answers_text(record, g)}})};
  return parse_translation(client.complete(request));
}

inline VetResult vet_plan(const QARecord& record, ChatClient& client,
                          const PromptKit& kit) {
  ChatRequest request{
      "vet_plan:" + record.id, kit.plan_feasibility.system,
      fill_template(kit.plan_feasibility.user,
                    {{"PLAN", detail::plan_text(record)}})};
  return parse_verdict(client.complete(request));
}

inline VetResult vet_qa(const QARecord& record, const KnowledgeGraph& g,
                        ChatClient& client, const PromptKit& kit) {
  ChatRequest request{
      "vet_qa:" + record.id, kit.qa_feasibility.system,
      fill_template(kit.qa_feasibility.user,
                    {{"QUESTION", record.question},
                     {"PLAN", detail::plan_text(record)},
                     {"ANSWERS", detail::answers_text(record, g)}})};
  return parse_verdict(client.complete(request));
}

// --- LLM-backed entity selection ---------------------------------------------

// Strict JSON object mapping slot -> candidate id; ids outside the offered
// pool are discarded (never trusted), malformed JSON is MalformedResponse.
inline Selection parse_entity_selection(const std::string& raw,
                                        const SelectionRequest& request) {
  std::string text = detail::trim(raw);
  if (text.rfind("```", 0) == 0) {  // tolerate fenced JSON
    const auto first_nl = text.find('\n');
    const auto last_fence = text.rfind("```");
    if (first_nl != std::string::npos && last_fence > first_nl)
      text = detail::trim(text.substr(first_nl + 1, last_fence - first_nl - 1));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedResponse(std::string("selection is not JSON: ") + e.what());
  }
  if (!j.is_object())
    throw MalformedResponse("selection must be a JSON object");

  Selection out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto pool = request.entity_pools.find(it.key());
    if (pool != request.entity_pools.end()) {
      if (!it.value().is_string()) continue;
      const std::string id = it.value().get<std::string>();
      for (const auto& c : pool->second)
        if (c.id == id) out.entities[it.key()] = id;
      continue;
    }
    auto values = request.value_pools.find(it.key());
    if (values == request.value_pools.end()) continue;
    for (const auto& v : values->second) {
      const bool match =
          v.kind == ValueKind::String
              ? it.value().is_string() && it.value().get<std::string>() == v.str
              : it.value().is_number_integer() &&
                    it.value().get<std::int64_t>() == v.num;
      if (match) out.values[it.key()] = v;
    }
  }
  return out;
}

class LlmEntitySelector : public EntitySelector {
 public:
  LlmEntitySelector(ChatClient& client, const PromptKit& kit)
      : client_(client), kit_(kit) {}

  Selection select(const SelectionRequest& request) override {
    std::vector<std::string> options;
    for (const auto& [slot, pool] : request.entity_pools) {
      std::vector<std::string> items;
      for (const auto& c : pool)
        items.push_back(c.id == c.label ? c.id : c.id + " = " + c.label);
      options.push_back(slot + ": " + join(items, " | "));
    }
    for (const auto& [slot, pool] : request.value_pools) {
      std::vector<std::string> items;
      for (const auto& v : pool) items.push_back(v.to_string());
      options.push_back(slot + ": " + join(items, " | "));
    }
    ChatRequest chat{
        request.key, kit_.entity_selection.system,
        fill_template(kit_.entity_selection.user,
                      {{"PLAN", join(request.rendered_plan, "\n")},
                       {"OPTIONS", join(options, "\n")}})};
    return parse_entity_selection(client_.complete(chat), request);
  }

 private:
  ChatClient& client_;
  const PromptKit& kit_;
};

// --- stage orchestration -----------------------------------------------------

struct TranslationOptions {
  bool offline = false;
  bool strict = false;  // drop records vetted Invalid instead of flagging
  int retries = 3;
  int parallelism = 4;
};

struct StageSummary {
  int total = 0;
  int llm = 0;
  int templated = 0;
  int invalid_plan = 0;
  int invalid_qa = 0;
  int unvetted = 0;
  int dropped = 0;

  // True when the emitted dataset contains records kept despite a failed or
  // skipped-over vet/translation (CLI exit 1).
  bool flagged() const {
    return invalid_plan + invalid_qa + unvetted + templated > 0;
  }

  nlohmann::json to_json() const {
    return {{"total", total},           {"llm", llm},
            {"templated", templated},   {"invalid_plan", invalid_plan},
            {"invalid_qa", invalid_qa}, {"unvetted", unvetted},
            {"dropped", dropped},       {"flagged", flagged()}};
  }
};

// Fills question/provenance/vet fields of every record in place.  Offline
// mode performs no chat calls at all: questions come from the template and
// vets are recorded as "skipped" (a deliberate policy, not a failure).
inline StageSummary run_translation_stage(std::vector<QARecord>& records,
                                          const KnowledgeGraph& g,
                                          ChatClient* client,
                                          const PromptKit* kit,
                                          const TranslationOptions& options) {
  StageSummary summary;
  summary.total = static_cast<int>(records.size());

  // Inferred step types are not serialized; records loaded from disk need a
  // typecheck pass before their plans can render.
  for (QARecord& r : records) {
    bool typed = !r.plan.steps.empty();
    for (const PlanStep& s : r.plan.steps) typed = typed && !s.out_type.empty();
    if (typed) continue;
    const auto errors = typecheck(r.plan, g.schema());
    if (!errors.empty())
      throw ParseError("record " + r.id +
                       ": plan does not typecheck: " + errors[0].message);
  }

  if (options.offline || !client) {
    for (QARecord& r : records) {
      r.question = template_translate(r, g);
      r.provenance = "template";
      r.plan_vet = "skipped";
      r.qa_vet = "skipped";
      r.stats.question_words = count_words(r.question);
    }
    // Template fallback is the requested behaviour offline, not a flag.
    return summary;
  }
  if (!kit) throw ConfigError("translation stage requires prompt templates");

  // vector<bool> is bit-packed and unsafe to write from worker threads.
  std::vector<char> drop(records.size(), 0);

  auto process = [&](QARecord& r, bool& dropped) {
    auto with_retries = [&](auto&& call) -> std::optional<VetResult> {
      for (int attempt = 0; attempt <= options.retries; ++attempt) {
        try {
          return call();
        } catch (const MalformedResponse&) {
          continue;  // ask again; the reply may parse next time
        } catch (const ClientError&) {
          break;  // transport trouble: retrying is the client's job
        }
      }
      return std::nullopt;
    };

    if (auto vet = with_retries([&] { return vet_plan(r, *client, *kit); })) {
      r.plan_vet = vet->verdict == Verdict::Valid ? "valid" : "invalid";
    } else {
      r.plan_vet = "unvetted";
    }
    if (options.strict && r.plan_vet == "invalid") {
      dropped = true;
      return;
    }

    std::optional<TranslationResult> translated;
    for (int attempt = 0; attempt <= options.retries && !translated;
         ++attempt) {
      try {
        translated = translate(r, g, *client, *kit);
      } catch (const MalformedResponse&) {
      } catch (const ClientError&) {
        break;
      }
    }
    if (translated) {
      r.question = translated->question;
      r.provenance = "llm";
    } else {
      r.question = template_translate(r, g);
      r.provenance = "template";
    }
    r.stats.question_words = count_words(r.question);

    if (auto vet =
            with_retries([&] { return vet_qa(r, g, *client, *kit); })) {
      r.qa_vet = vet->verdict == Verdict::Valid ? "valid" : "invalid";
    } else {
      r.qa_vet = "unvetted";
    }
    if (options.strict && r.qa_vet == "invalid") dropped = true;
  };

  const int workers =
      std::max(1, std::min<int>(options.parallelism,
                                static_cast<int>(records.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      bool dropped = false;
      process(records[i], dropped);
      drop[i] = dropped ? 1 : 0;
    }
  } else {
    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
      for (std::size_t i = cursor.fetch_add(1); i < records.size();
           i = cursor.fetch_add(1)) {
        bool dropped = false;
        process(records[i], dropped);
        drop[i] = dropped ? 1 : 0;
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<QARecord> kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const QARecord& r = records[i];
    summary.invalid_plan += r.plan_vet == "invalid";
    summary.invalid_qa += r.qa_vet == "invalid";
    summary.unvetted += r.plan_vet == "unvetted" || r.qa_vet == "unvetted";
    if (drop[i]) {
      summary.dropped += 1;
      continue;
    }
    summary.llm += r.provenance == "llm";
    summary.templated += r.provenance == "template";
    kept.push_back(r);
  }
  records = std::move(kept);
  return summary;
}

}  // namespace kgqa
