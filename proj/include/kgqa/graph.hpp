#pragma once

// Immutable in-memory knowledge graph: entities, typed triples, attribute
// facts, and the ambiguous-surface registry.  Construction validates every
// record against the schema and builds forward/reverse adjacency indexes;
// afterwards all lookups are const and deterministic (ids are held in
// sorted containers).

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kgqa/schema.hpp"
#include "kgqa/util.hpp"

namespace kgqa {

struct Entity {
  std::string id;
  std::string label;
  std::string type;
  std::vector<std::string> aliases;
  bool operator==(const Entity&) const = default;
};

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;
  auto operator<=>(const Triple&) const = default;

  std::string describe() const {
    return "(" + subject + ", " + relation + ", " + object + ")";
  }
};

struct AttributeFact {
  std::string subject;
  std::string attribute;
  LiteralValue value;
  bool operator==(const AttributeFact&) const = default;
  bool operator<(const AttributeFact& o) const {
    if (subject != o.subject) return subject < o.subject;
    if (attribute != o.attribute) return attribute < o.attribute;
    return value < o.value;
  }
};

// One surface form shared by several distinct entities.
struct AmbiguousName {
  std::string surface;
  std::vector<std::string> entities;
  bool operator==(const AmbiguousName&) const = default;
};

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  KnowledgeGraph(Schema schema, std::vector<Entity> entities,
                 std::vector<Triple> triples,
                 std::vector<AttributeFact> attribute_facts,
                 std::vector<AmbiguousName> ambiguous_names)
      : schema_(std::move(schema)) {
    schema_.validate();

    for (auto& e : entities) {
      if (!schema_.entity_types.count(e.type))
        throw SchemaViolation("entity " + e.id + ": unknown type '" + e.type +
                              "'");
      sort_unique(e.aliases);
      auto [it, inserted] = entities_.emplace(e.id, std::move(e));
      if (!inserted) throw DuplicateId("duplicate entity id: " + it->first);
    }
    for (const auto& [id, e] : entities_)
      by_type_[e.type].push_back(id);

    std::sort(triples.begin(), triples.end());
    triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
    for (const auto& t : triples) check_triple(t);
    triples_ = std::move(triples);
    for (const auto& t : triples_) {
      fwd_[{t.subject, t.relation}].push_back(t.object);
      rev_[{t.object, t.relation}].push_back(t.subject);
    }
    for (auto& [k, v] : fwd_) sort_unique(v);
    for (auto& [k, v] : rev_) sort_unique(v);

    std::sort(attribute_facts.begin(), attribute_facts.end());
    attribute_facts.erase(
        std::unique(attribute_facts.begin(), attribute_facts.end()),
        attribute_facts.end());
    for (const auto& f : attribute_facts) check_attribute_fact(f);
    attribute_facts_ = std::move(attribute_facts);
    for (const auto& f : attribute_facts_)
      attr_index_[{f.subject, f.attribute}].push_back(f.value);

    for (auto& a : ambiguous_names) {
      if (a.surface.empty())
        throw SchemaViolation("ambiguous name with empty surface");
      sort_unique(a.entities);
      if (a.entities.size() < 2)
        throw SchemaViolation("ambiguous surface '" + a.surface +
                              "' needs at least 2 distinct entities");
      for (const auto& id : a.entities)
        if (!entities_.count(id))
          throw SchemaViolation("ambiguous surface '" + a.surface +
                                "': unknown entity '" + id + "'");
      auto [it, inserted] = ambiguity_.emplace(a.surface, std::move(a));
      if (!inserted)
        throw DuplicateId("duplicate ambiguous surface: " + it->first);
    }
  }

  const Schema& schema() const { return schema_; }
  const std::map<std::string, Entity>& entities() const { return entities_; }
  const std::vector<Triple>& triples() const { return triples_; }
  const std::vector<AttributeFact>& attribute_facts() const {
    return attribute_facts_;
  }
  const std::map<std::string, AmbiguousName>& ambiguity() const {
    return ambiguity_;
  }

  bool has_entity(const std::string& id) const { return entities_.count(id); }

  const Entity& entity(const std::string& id) const {
    auto it = entities_.find(id);
    if (it == entities_.end()) throw UnknownEntity("unknown entity: " + id);
    return it->second;
  }

  const std::string& label(const std::string& id) const {
    return entity(id).label;
  }

  // All ids reachable from `id` across `relation` in the given direction,
  // sorted; empty when the entity has no such edges.
  const IdSet& neighbors(const std::string& id, const std::string& relation,
                         Direction dir) const {
    if (!entities_.count(id)) throw UnknownEntity("unknown entity: " + id);
    if (!schema_.relations.count(relation))
      throw UnknownRelation("unknown relation: " + relation);
    const auto& index = dir == Direction::Forward ? fwd_ : rev_;
    auto it = index.find({id, relation});
    return it == index.end() ? empty_ : it->second;
  }

  // Sorted ids of every entity of the given type.
  const IdSet& entities_of_type(const std::string& type) const {
    if (!schema_.entity_types.count(type))
      throw UnknownType("unknown type: " + type);
    auto it = by_type_.find(type);
    return it == by_type_.end() ? empty_ : it->second;
  }

  // Values of an attribute on a subject; null when no fact exists.
  const std::vector<LiteralValue>* attribute_values(
      const std::string& subject, const std::string& attribute) const {
    auto it = attr_index_.find({subject, attribute});
    return it == attr_index_.end() ? nullptr : &it->second;
  }

  const AmbiguousName& surface(const std::string& name) const {
    auto it = ambiguity_.find(name);
    if (it == ambiguity_.end())
      throw UnknownSurface("unknown ambiguous surface: " + name);
    return it->second;
  }

  bool operator==(const KnowledgeGraph& o) const {
    return schema_ == o.schema_ && entities_ == o.entities_ &&
           triples_ == o.triples_ && attribute_facts_ == o.attribute_facts_ &&
           ambiguity_ == o.ambiguity_;
  }

 private:
  void check_triple(const Triple& t) const {
    auto s = entities_.find(t.subject);
    if (s == entities_.end())
      throw SchemaViolation("triple " + t.describe() + ": unknown subject");
    auto rel = schema_.relations.find(t.relation);
    if (rel == schema_.relations.end())
      throw SchemaViolation("triple " + t.describe() + ": unknown relation");
    auto o = entities_.find(t.object);
    if (o == entities_.end())
      throw SchemaViolation("triple " + t.describe() + ": unknown object");
    if (s->second.type != rel->second.source_type)
      throw SchemaViolation("triple " + t.describe() + ": subject type '" +
                            s->second.type + "' does not match relation source '" +
                            rel->second.source_type + "'");
    if (o->second.type != rel->second.target_type)
      throw SchemaViolation("triple " + t.describe() + ": object type '" +
                            o->second.type + "' does not match relation target '" +
                            rel->second.target_type + "'");
  }

  void check_attribute_fact(const AttributeFact& f) const {
    auto s = entities_.find(f.subject);
    if (s == entities_.end())
      throw SchemaViolation("attribute fact on unknown entity: " + f.subject);
    auto a = schema_.attributes.find(f.attribute);
    if (a == schema_.attributes.end())
      throw SchemaViolation("unknown attribute '" + f.attribute + "' on " +
                            f.subject);
    if (s->second.type != a->second.subject_type)
      throw SchemaViolation("attribute " + f.attribute + " on " + f.subject +
                            ": subject type mismatch");
    if (f.value.kind != a->second.value_kind)
      throw SchemaViolation("attribute " + f.attribute + " on " + f.subject +
                            ": value kind mismatch");
  }

  Schema schema_;
  std::map<std::string, Entity> entities_;
  std::vector<Triple> triples_;
  std::vector<AttributeFact> attribute_facts_;
  std::map<std::string, AmbiguousName> ambiguity_;
  std::map<std::pair<std::string, std::string>, IdSet> fwd_;
  std::map<std::pair<std::string, std::string>, IdSet> rev_;
  std::map<std::pair<std::string, std::string>, std::vector<LiteralValue>>
      attr_index_;
  std::map<std::string, IdSet> by_type_;
  IdSet empty_;
};

}  // namespace kgqa
