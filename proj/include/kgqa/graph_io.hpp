#pragma once

// Graph file IO.
//
//   schema.json      one JSON object: entity_types / relations / attributes
//   entities.jsonl   {"id","label","type","aliases":[...]}
//   triples.jsonl    {"subject","relation","object"}
//   attributes.jsonl {"subject","attribute","value"}
//   ambiguity.jsonl  {"surface","entities":[...]}
//
// Loading is strict about shape (ParseError with path:line) and about the
// schema (SchemaViolation naming the offending line); unknown extra fields
// are ignored with a warning.  save_graph emits a canonical sorted form so
// load -> save round-trips byte-identically.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/graph.hpp"
#include "kgqa/util.hpp"

namespace kgqa {

struct GraphPaths {
  std::string schema;
  std::string entities;
  std::string triples;
  std::string attributes;  // optional: empty path means none
  std::string ambiguity;   // optional: empty path means none
};

namespace detail {

using nlohmann::json;

inline std::string at(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

inline json parse_json_line(const std::string& path, std::size_t line,
                            const std::string& text) {
  try {
    json j = json::parse(text);
    if (!j.is_object())
      throw ParseError(at(path, line) + ": expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(at(path, line) + ": " + e.what());
  }
}

inline void warn_unknown_fields(const json& j,
                                const std::vector<std::string>& known,
                                const std::string& where,
                                std::vector<std::string>* warnings) {
  if (!warnings) return;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || it.key() == k;
    if (!ok)
      warnings->push_back(where + ": ignoring unknown field '" + it.key() +
                          "'");
  }
}

inline std::string require_string(const json& j, const char* key,
                                  const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw ParseError(where + ": missing string field '" + std::string(key) +
                     "'");
  return j[key].get<std::string>();
}

inline LiteralValue literal_from_json(const json& v, ValueKind kind,
                                      const std::string& where) {
  switch (kind) {
    case ValueKind::Integer:
    case ValueKind::DateYear:
      if (!v.is_number_integer())
        throw ParseError(where + ": value must be an integer");
      return {kind, v.get<std::int64_t>(), ""};
    case ValueKind::String:
      if (!v.is_string())
        throw ParseError(where + ": value must be a string");
      return LiteralValue::string(v.get<std::string>());
  }
  throw ParseError(where + ": unsupported value");
}

inline json literal_to_json(const LiteralValue& v) {
  if (v.kind == ValueKind::String) return v.str;
  return v.num;
}

// Applies `fn` to each non-empty line of a JSONL file.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(std::size_t, const json&)>&
                               fn) {
  const std::string text = read_file(path);
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    fn(line_no, parse_json_line(path, line_no, line));
  }
}

}  // namespace detail

inline Schema load_schema(const std::string& path,
                          std::vector<std::string>* warnings = nullptr) {
  using detail::json;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path + ": expected a JSON object");
  detail::warn_unknown_fields(j, {"entity_types", "relations", "attributes"},
                              path, warnings);

  Schema schema;
  for (const auto& t : j.value("entity_types", json::array())) {
    detail::warn_unknown_fields(t, {"id", "label", "domain"}, path, warnings);
    EntityType et{detail::require_string(t, "id", path),
                  detail::require_string(t, "label", path),
                  t.value("domain", std::string{})};
    if (!schema.entity_types.emplace(et.id, et).second)
      throw DuplicateId(path + ": duplicate entity type: " + et.id);
  }
  for (const auto& r : j.value("relations", json::array())) {
    detail::warn_unknown_fields(
        r, {"id", "label", "source_type", "target_type"}, path, warnings);
    RelationDef rd{detail::require_string(r, "id", path),
                   detail::require_string(r, "label", path),
                   detail::require_string(r, "source_type", path),
                   detail::require_string(r, "target_type", path)};
    if (!schema.relations.emplace(rd.id, rd).second)
      throw DuplicateId(path + ": duplicate relation: " + rd.id);
  }
  for (const auto& a : j.value("attributes", json::array())) {
    detail::warn_unknown_fields(
        a, {"id", "label", "subject_type", "value_kind"}, path, warnings);
    AttributeDef ad{detail::require_string(a, "id", path),
                    detail::require_string(a, "label", path),
                    detail::require_string(a, "subject_type", path),
                    parse_value_kind(
                        detail::require_string(a, "value_kind", path))};
    if (!schema.attributes.emplace(ad.id, ad).second)
      throw DuplicateId(path + ": duplicate attribute: " + ad.id);
  }
  schema.validate();
  return schema;
}

inline KnowledgeGraph load_graph(const GraphPaths& paths,
                                 std::vector<std::string>* warnings = nullptr) {
  using detail::json;
  Schema schema = load_schema(paths.schema, warnings);

  std::vector<Entity> entities;
  std::map<std::string, std::string> type_of;
  detail::for_each_jsonl(paths.entities, [&](std::size_t n, const json& j) {
    const std::string where = detail::at(paths.entities, n);
    detail::warn_unknown_fields(j, {"id", "label", "type", "aliases"}, where,
                                warnings);
    Entity e;
    e.id = detail::require_string(j, "id", where);
    e.label = detail::require_string(j, "label", where);
    e.type = detail::require_string(j, "type", where);
    if (j.contains("aliases")) {
      if (!j["aliases"].is_array())
        throw ParseError(where + ": 'aliases' must be an array");
      for (const auto& a : j["aliases"]) {
        if (!a.is_string())
          throw ParseError(where + ": alias must be a string");
        e.aliases.push_back(a.get<std::string>());
      }
    }
    if (!schema.entity_types.count(e.type))
      throw SchemaViolation(where + ": unknown entity type '" + e.type + "'");
    if (!type_of.emplace(e.id, e.type).second)
      throw DuplicateId(where + ": duplicate entity id: " + e.id);
    entities.push_back(std::move(e));
  });

  std::vector<Triple> triples;
  detail::for_each_jsonl(paths.triples, [&](std::size_t n, const json& j) {
    const std::string where = detail::at(paths.triples, n);
    detail::warn_unknown_fields(j, {"subject", "relation", "object"}, where,
                                warnings);
    Triple t{detail::require_string(j, "subject", where),
             detail::require_string(j, "relation", where),
             detail::require_string(j, "object", where)};
    auto rel = schema.relations.find(t.relation);
    if (rel == schema.relations.end())
      throw SchemaViolation(where + ": triple " + t.describe() +
                            ": unknown relation");
    auto st = type_of.find(t.subject);
    if (st == type_of.end())
      throw SchemaViolation(where + ": triple " + t.describe() +
                            ": unknown subject");
    auto ot = type_of.find(t.object);
    if (ot == type_of.end())
      throw SchemaViolation(where + ": triple " + t.describe() +
                            ": unknown object");
    if (st->second != rel->second.source_type)
      throw SchemaViolation(where + ": triple " + t.describe() +
                            ": subject type '" + st->second +
                            "' does not match relation source '" +
                            rel->second.source_type + "'");
    if (ot->second != rel->second.target_type)
      throw SchemaViolation(where + ": triple " + t.describe() +
                            ": object type '" + ot->second +
                            "' does not match relation target '" +
                            rel->second.target_type + "'");
    triples.push_back(std::move(t));
  });

  std::vector<AttributeFact> facts;
  if (!paths.attributes.empty()) {
    detail::for_each_jsonl(paths.attributes, [&](std::size_t n, const json& j) {
      const std::string where = detail::at(paths.attributes, n);
      detail::warn_unknown_fields(j, {"subject", "attribute", "value"}, where,
                                  warnings);
      AttributeFact f;
      f.subject = detail::require_string(j, "subject", where);
      f.attribute = detail::require_string(j, "attribute", where);
      auto ad = schema.attributes.find(f.attribute);
      if (ad == schema.attributes.end())
        throw SchemaViolation(where + ": unknown attribute '" + f.attribute +
                              "'");
      if (!j.contains("value")) throw ParseError(where + ": missing 'value'");
      f.value = detail::literal_from_json(j["value"], ad->second.value_kind,
                                          where);
      auto st = type_of.find(f.subject);
      if (st == type_of.end())
        throw SchemaViolation(where + ": unknown subject '" + f.subject + "'");
      if (st->second != ad->second.subject_type)
        throw SchemaViolation(where + ": attribute " + f.attribute + " on " +
                              f.subject + ": subject type mismatch");
      facts.push_back(std::move(f));
    });
  }

  std::vector<AmbiguousName> ambiguity;
  if (!paths.ambiguity.empty()) {
    detail::for_each_jsonl(paths.ambiguity, [&](std::size_t n, const json& j) {
      const std::string where = detail::at(paths.ambiguity, n);
      detail::warn_unknown_fields(j, {"surface", "entities"}, where, warnings);
      AmbiguousName a;
      a.surface = detail::require_string(j, "surface", where);
      if (!j.contains("entities") || !j["entities"].is_array())
        throw ParseError(where + ": missing array field 'entities'");
      for (const auto& e : j["entities"]) {
        if (!e.is_string())
          throw ParseError(where + ": entity id must be a string");
        a.entities.push_back(e.get<std::string>());
      }
      for (const auto& id : a.entities)
        if (!type_of.count(id))
          throw SchemaViolation(where + ": ambiguous surface '" + a.surface +
                                "': unknown entity '" + id + "'");
      if (a.entities.size() < 2)
        throw SchemaViolation(where + ": ambiguous surface '" + a.surface +
                              "' needs at least 2 distinct entities");
      ambiguity.push_back(std::move(a));
    });
  }

  return KnowledgeGraph(std::move(schema), std::move(entities),
                        std::move(triples), std::move(facts),
                        std::move(ambiguity));
}

// Canonical serialization: sorted ids, sorted JSON keys, one record per line.
inline void save_graph(const KnowledgeGraph& g, const GraphPaths& paths) {
  using detail::json;

  json sj;
  sj["entity_types"] = json::array();
  for (const auto& [id, t] : g.schema().entity_types)
    sj["entity_types"].push_back(
        {{"id", t.id}, {"label", t.label}, {"domain", t.domain}});
  sj["relations"] = json::array();
  for (const auto& [id, r] : g.schema().relations)
    sj["relations"].push_back({{"id", r.id},
                               {"label", r.label},
                               {"source_type", r.source_type},
                               {"target_type", r.target_type}});
  sj["attributes"] = json::array();
  for (const auto& [id, a] : g.schema().attributes)
    sj["attributes"].push_back({{"id", a.id},
                                {"label", a.label},
                                {"subject_type", a.subject_type},
                                {"value_kind", value_kind_name(a.value_kind)}});
  write_file_atomic(paths.schema, sj.dump(2) + "\n");

  std::string out;
  for (const auto& [id, e] : g.entities()) {
    json j{{"id", e.id}, {"label", e.label}, {"type", e.type}};
    if (!e.aliases.empty()) j["aliases"] = e.aliases;
    out += j.dump() + "\n";
  }
  write_file_atomic(paths.entities, out);

  out.clear();
  for (const auto& t : g.triples())
    out += json{{"subject", t.subject},
                {"relation", t.relation},
                {"object", t.object}}
               .dump() +
           "\n";
  write_file_atomic(paths.triples, out);

  if (!paths.attributes.empty()) {
    out.clear();
    for (const auto& f : g.attribute_facts())
      out += json{{"subject", f.subject},
                  {"attribute", f.attribute},
                  {"value", detail::literal_to_json(f.value)}}
                 .dump() +
             "\n";
    write_file_atomic(paths.attributes, out);
  }

  if (!paths.ambiguity.empty()) {
    out.clear();
    for (const auto& [surface, a] : g.ambiguity())
      out += json{{"surface", a.surface}, {"entities", a.entities}}.dump() +
             "\n";
    write_file_atomic(paths.ambiguity, out);
  }
}

}  // namespace kgqa
