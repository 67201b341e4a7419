#pragma once

// Answer-string normalization for evaluation.  The base form is Unicode
// NFKC + casefold (via ICU's combined NFKC_Casefold transform), trimmed,
// with internal whitespace runs collapsed.  Entity keys additionally strip
// one trailing parenthetical ("City of God (2002 film)" -> "city of god")
// and map known aliases to their canonical label; branch keys keep the
// parenthetical because it is what disambiguates branch labels.

#include <map>
#include <set>
#include <string>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "kgqa/graph.hpp"

namespace kgqa {

namespace detail {

inline const icu::Normalizer2& nfkc_casefold() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm =
      icu::Normalizer2::getNFKCCasefoldInstance(status);
  if (U_FAILURE(status) || !norm)
    throw Error("ICU NFKC_Casefold normalizer unavailable");
  return *norm;
}

inline std::string collapse_whitespace(const std::string& s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v') {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

inline std::string strip_trailing_parenthetical(const std::string& s) {
  if (s.empty() || s.back() != ')') return s;
  const auto open = s.rfind(" (");
  if (open == std::string::npos || open == 0) return s;
  return s.substr(0, open);
}

}  // namespace detail

class Normalizer {
 public:
  Normalizer() = default;

  // Builds the alias -> canonical-label map from the graph.  Aliases that
  // collide with a canonical label or with each other are left unmapped
  // rather than guessed.
  explicit Normalizer(const KnowledgeGraph& g) {
    std::set<std::string> canonical;
    for (const auto& [id, e] : g.entities())
      canonical.insert(entity_key_base(e.label));
    std::set<std::string> conflicted;
    for (const auto& [id, e] : g.entities()) {
      const std::string target = entity_key_base(e.label);
      for (const std::string& alias : e.aliases) {
        const std::string key = entity_key_base(alias);
        if (key == target || canonical.count(key)) continue;
        auto it = aliases_.find(key);
        if (it != aliases_.end() && it->second != target) {
          conflicted.insert(key);
          continue;
        }
        aliases_[key] = target;
      }
    }
    for (const std::string& key : conflicted) aliases_.erase(key);
  }

  // NFKC + casefold + trim + collapse internal whitespace.
  static std::string basic(const std::string& s) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString folded = detail::nfkc_casefold().normalize(
        icu::UnicodeString::fromUTF8(s), status);
    if (U_FAILURE(status)) throw Error("ICU normalization failed");
    std::string utf8;
    folded.toUTF8String(utf8);
    return detail::collapse_whitespace(utf8);
  }

  // Key for answer-entity comparison.
  std::string entity_key(const std::string& s) const {
    const std::string key = entity_key_base(s);
    auto it = aliases_.find(key);
    return it == aliases_.end() ? key : it->second;
  }

  // Key for branch-label comparison (parenthetical retained).
  std::string branch_key(const std::string& s) const { return basic(s); }

 private:
  static std::string entity_key_base(const std::string& s) {
    return detail::strip_trailing_parenthetical(basic(s));
  }

  std::map<std::string, std::string> aliases_;
};

}  // namespace kgqa
