#pragma once

// Dataset records.  A record carries a realized plan, its rendered steps,
// the branched gold answers (one branch per reading of an ambiguous seed,
// or a single "default" branch), per-record statistics, and bookkeeping
// from the translation/vetting stage.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/plan_json.hpp"
#include "kgqa/util.hpp"

namespace kgqa {

struct BranchedAnswer {
  // branch label -> sorted answer entity ids; labels are entity labels for
  // ambiguous records and "default" otherwise.  No branch is ever empty.
  std::map<std::string, IdSet> branches;
  bool ambiguous = false;

  bool operator==(const BranchedAnswer&) const = default;

  int total_size() const {
    int n = 0;
    for (const auto& [label, ids] : branches) n += static_cast<int>(ids.size());
    return n;
  }
};

struct RecordStats {
  int n_steps = 0;
  int answer_size_total = 0;
  double answer_size_per_branch = 0.0;
  int n_branches = 0;
  int entities_involved = 0;
  int question_words = 0;
  bool operator==(const RecordStats&) const = default;
};

struct QARecord {
  std::string id;
  std::string question;  // empty until the translation stage runs
  Plan plan;
  std::vector<std::string> rendered_plan;
  BranchedAnswer answers;
  std::string domain;
  RecordStats stats;
  std::string provenance;  // "" pre-translation, then "llm" or "template"
  std::string plan_vet;    // "", "valid", "invalid", "unvetted", "skipped"
  std::string qa_vet;

  bool operator==(const QARecord&) const = default;
};

inline nlohmann::json record_to_json(const QARecord& r) {
  nlohmann::json branches = nlohmann::json::object();
  for (const auto& [label, ids] : r.answers.branches) branches[label] = ids;
  return {{"id", r.id},
          {"question", r.question},
          {"plan", plan_to_json(r.plan)},
          {"rendered_plan", r.rendered_plan},
          {"answers",
           {{"ambiguous", r.answers.ambiguous}, {"branches", branches}}},
          {"domain", r.domain},
          {"stats",
           {{"n_steps", r.stats.n_steps},
            {"answer_size_total", r.stats.answer_size_total},
            {"answer_size_per_branch", r.stats.answer_size_per_branch},
            {"n_branches", r.stats.n_branches},
            {"entities_involved", r.stats.entities_involved},
            {"question_words", r.stats.question_words}}},
          {"provenance", r.provenance},
          {"plan_vet", r.plan_vet},
          {"qa_vet", r.qa_vet}};
}

inline QARecord record_from_json(const nlohmann::json& j,
                                 const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
  QARecord r;
  r.id = detail::get_string(j, "id", where);
  r.question = j.value("question", std::string{});
  if (!j.contains("plan")) throw ParseError(where + ": missing 'plan'");
  r.plan = plan_from_json(j["plan"]);
  for (const auto& line : j.value("rendered_plan", nlohmann::json::array()))
    r.rendered_plan.push_back(line.get<std::string>());
  if (!j.contains("answers") || !j["answers"].is_object())
    throw ParseError(where + ": missing object field 'answers'");
  const auto& aj = j["answers"];
  r.answers.ambiguous = aj.value("ambiguous", false);
  if (!aj.contains("branches") || !aj["branches"].is_object())
    throw ParseError(where + ": missing object field 'answers.branches'");
  for (auto it = aj["branches"].begin(); it != aj["branches"].end(); ++it) {
    IdSet ids;
    for (const auto& id : it.value()) ids.push_back(id.get<std::string>());
    sort_unique(ids);
    r.answers.branches[it.key()] = std::move(ids);
  }
  r.domain = j.value("domain", std::string{});
  if (j.contains("stats")) {
    const auto& sj = j["stats"];
    r.stats.n_steps = sj.value("n_steps", 0);
    r.stats.answer_size_total = sj.value("answer_size_total", 0);
    r.stats.answer_size_per_branch = sj.value("answer_size_per_branch", 0.0);
    r.stats.n_branches = sj.value("n_branches", 0);
    r.stats.entities_involved = sj.value("entities_involved", 0);
    r.stats.question_words = sj.value("question_words", 0);
  }
  r.provenance = j.value("provenance", std::string{});
  r.plan_vet = j.value("plan_vet", std::string{});
  r.qa_vet = j.value("qa_vet", std::string{});
  return r;
}

inline std::string records_to_jsonl(const std::vector<QARecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

inline std::vector<QARecord> read_records_jsonl(const std::string& path) {
  std::vector<QARecord> records;
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
    records.push_back(
        record_from_json(j, path + ":" + std::to_string(line_no)));
  }
  return records;
}

inline void write_records_jsonl(const std::string& path,
                                const std::vector<QARecord>& records) {
  write_file_atomic(path, records_to_jsonl(records));
}

}  // namespace kgqa
