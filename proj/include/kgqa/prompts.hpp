#pragma once

// Prompt assets.  Each chat-backed operation pairs a system prompt with a
// user-message template; both ship as plain files under assets/prompts and
// are loaded verbatim.  User templates carry {{NAME}} placeholders:
//
//   entity_selection   {{PLAN}} {{OPTIONS}}
//   plan_feasibility   {{PLAN}}
//   translation        {{PLAN}} {{ANSWERS}}
//   qa_feasibility     {{QUESTION}} {{PLAN}} {{ANSWERS}}
//   branch_match       {{GOLD_LABELS}} {{PREDICTED_LABELS}}

#include <map>
#include <string>

#include "kgqa/errors.hpp"
#include "kgqa/util.hpp"

namespace kgqa {

struct PromptTemplate {
  std::string system;
  std::string user;  // template with {{NAME}} placeholders
};

inline std::string fill_template(
    const std::string& tpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const std::size_t open = tpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tpl, pos, tpl.size() - pos);
      break;
    }
    const std::size_t close = tpl.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(tpl, pos, tpl.size() - pos);
      break;
    }
    out.append(tpl, pos, open - pos);
    const std::string name = tpl.substr(open + 2, close - open - 2);
    auto it = vars.find(name);
    if (it == vars.end())
      throw ConfigError("prompt template references unknown placeholder '" +
                        name + "'");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

struct PromptKit {
  PromptTemplate entity_selection;
  PromptTemplate plan_feasibility;
  PromptTemplate translation;
  PromptTemplate qa_feasibility;
  PromptTemplate branch_match;

  static PromptKit load(const std::string& dir) {
    auto read = [&](const std::string& name) -> PromptTemplate {
      return {read_file(dir + "/" + name + ".txt"),
              read_file(dir + "/" + name + "_user.txt")};
    };
    PromptKit kit;
    kit.entity_selection = read("entity_selection");
    kit.plan_feasibility = read("plan_feasibility");
    kit.translation = read("translation");
    kit.qa_feasibility = read("qa_feasibility");
    kit.branch_match = read("branch_match");
    return kit;
  }
};

}  // namespace kgqa
