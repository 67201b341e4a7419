#pragma once

// Typed-graph schema: entity types, directed relation signatures, and typed
// attribute definitions.  The schema is the sole authority the plan
// typechecker consults, so everything a plan can mention lives here.

#include <cstdint>
#include <map>
#include <string>

#include "kgqa/errors.hpp"

namespace kgqa {

enum class Direction { Forward, Reverse };

inline std::string direction_name(Direction d) {
  return d == Direction::Forward ? "fwd" : "rev";
}

inline Direction parse_direction(const std::string& s) {
  if (s == "fwd") return Direction::Forward;
  if (s == "rev") return Direction::Reverse;
  throw ParseError("unknown direction: " + s);
}

enum class ValueKind { Integer, DateYear, String };

inline std::string value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Integer: return "integer";
    case ValueKind::DateYear: return "date-year";
    case ValueKind::String: return "string";
  }
  return "integer";
}

inline ValueKind parse_value_kind(const std::string& s) {
  if (s == "integer") return ValueKind::Integer;
  if (s == "date-year") return ValueKind::DateYear;
  if (s == "string") return ValueKind::String;
  throw ParseError("unknown value kind: " + s);
}

// Tagged literal: integers and date-years carry num, strings carry str.
struct LiteralValue {
  ValueKind kind = ValueKind::Integer;
  std::int64_t num = 0;
  std::string str;

  static LiteralValue integer(std::int64_t v) {
    return {ValueKind::Integer, v, ""};
  }
  static LiteralValue date_year(std::int64_t v) {
    return {ValueKind::DateYear, v, ""};
  }
  static LiteralValue string(std::string v) {
    return {ValueKind::String, 0, std::move(v)};
  }

  bool operator==(const LiteralValue& o) const {
    if (kind != o.kind) return false;
    return kind == ValueKind::String ? str == o.str : num == o.num;
  }
  bool operator<(const LiteralValue& o) const {
    if (kind != o.kind) return kind < o.kind;
    return kind == ValueKind::String ? str < o.str : num < o.num;
  }

  std::string to_string() const {
    return kind == ValueKind::String ? str : std::to_string(num);
  }
};

enum class Cmp { Lt, Le, Eq, Ge, Gt };

inline std::string cmp_name(Cmp c) {
  switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "=";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
  }
  return "=";
}

// Display form; uses the single-glyph comparators in rendered clauses.
inline std::string cmp_symbol(Cmp c) {
  switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "≤";
    case Cmp::Eq: return "=";
    case Cmp::Ge: return "≥";
    case Cmp::Gt: return ">";
  }
  return "=";
}

inline Cmp parse_cmp(const std::string& s) {
  if (s == "<") return Cmp::Lt;
  if (s == "<=") return Cmp::Le;
  if (s == "=") return Cmp::Eq;
  if (s == ">=") return Cmp::Ge;
  if (s == ">") return Cmp::Gt;
  throw ParseError("unknown comparator: " + s);
}

// Comparison is only defined between literals of the same kind; the
// typechecker guarantees this before execution.
inline bool literal_compare(const LiteralValue& a, Cmp cmp,
                            const LiteralValue& b) {
  if (a.kind != b.kind) return false;
  auto rel = [&](auto x, auto y) {
    switch (cmp) {
      case Cmp::Lt: return x < y;
      case Cmp::Le: return x <= y;
      case Cmp::Eq: return x == y;
      case Cmp::Ge: return x >= y;
      case Cmp::Gt: return x > y;
    }
    return false;
  };
  return a.kind == ValueKind::String ? rel(a.str, b.str) : rel(a.num, b.num);
}

struct EntityType {
  std::string id;
  std::string label;
  std::string domain;
  bool operator==(const EntityType&) const = default;
};

struct RelationDef {
  std::string id;
  std::string label;
  std::string source_type;
  std::string target_type;
  bool operator==(const RelationDef&) const = default;
};

struct AttributeDef {
  std::string id;
  std::string label;
  std::string subject_type;
  ValueKind value_kind = ValueKind::Integer;
  bool operator==(const AttributeDef&) const = default;
};

struct Schema {
  std::map<std::string, EntityType> entity_types;
  std::map<std::string, RelationDef> relations;
  std::map<std::string, AttributeDef> attributes;

  bool operator==(const Schema&) const = default;

  // Referential closure; throws SchemaViolation / DuplicateId.
  void validate() const {
    for (const auto& [id, t] : entity_types) {
      if (id.empty() || id != t.id)
        throw SchemaViolation("entity type id mismatch: '" + id + "'");
    }
    for (const auto& [id, r] : relations) {
      if (id.empty() || id != r.id)
        throw SchemaViolation("relation id mismatch: '" + id + "'");
      if (!entity_types.count(r.source_type))
        throw SchemaViolation("relation " + id + ": unknown source type '" +
                              r.source_type + "'");
      if (!entity_types.count(r.target_type))
        throw SchemaViolation("relation " + id + ": unknown target type '" +
                              r.target_type + "'");
    }
    for (const auto& [id, a] : attributes) {
      if (id.empty() || id != a.id)
        throw SchemaViolation("attribute id mismatch: '" + id + "'");
      if (!entity_types.count(a.subject_type))
        throw SchemaViolation("attribute " + id + ": unknown subject type '" +
                              a.subject_type + "'");
    }
  }

  const RelationDef& relation(const std::string& id) const {
    auto it = relations.find(id);
    if (it == relations.end()) throw UnknownRelation("unknown relation: " + id);
    return it->second;
  }

  const EntityType& entity_type(const std::string& id) const {
    auto it = entity_types.find(id);
    if (it == entity_types.end()) throw UnknownType("unknown type: " + id);
    return it->second;
  }

  const AttributeDef& attribute(const std::string& id) const {
    auto it = attributes.find(id);
    if (it == attributes.end())
      throw UnknownRelation("unknown attribute: " + id);
    return it->second;
  }
};

// The entity type adjacent to a traversal seed (Forward: source) and the
// type produced by the traversal (Forward: target).
inline const std::string& near_type(const RelationDef& r, Direction d) {
  return d == Direction::Forward ? r.source_type : r.target_type;
}
inline const std::string& far_type(const RelationDef& r, Direction d) {
  return d == Direction::Forward ? r.target_type : r.source_type;
}

}  // namespace kgqa
