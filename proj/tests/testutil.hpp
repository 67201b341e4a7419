#pragma once

// Shared test scaffolding: fluent in-code graph construction, the film
// fixture loader, a deterministic random-graph generator for property
// tests, and an RAII temp directory.

#include <unistd.h>

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgqa/graph.hpp"
#include "kgqa/graph_io.hpp"
#include "kgqa/rng.hpp"

namespace kgqa::testing {

class GraphBuilder {
 public:
  GraphBuilder& type(const std::string& id, const std::string& domain = "") {
    schema_.entity_types[id] = EntityType{id, id, domain};
    return *this;
  }
  GraphBuilder& relation(const std::string& id, const std::string& source,
                         const std::string& target) {
    schema_.relations[id] = RelationDef{id, id, source, target};
    return *this;
  }
  GraphBuilder& attribute(const std::string& id, const std::string& subject,
                          ValueKind kind) {
    schema_.attributes[id] = AttributeDef{id, id, subject, kind};
    return *this;
  }
  GraphBuilder& entity(const std::string& id, const std::string& type,
                       const std::string& label = "",
                       std::vector<std::string> aliases = {}) {
    entities_.push_back(
        Entity{id, label.empty() ? id : label, type, std::move(aliases)});
    return *this;
  }
  GraphBuilder& triple(const std::string& s, const std::string& r,
                       const std::string& o) {
    triples_.push_back(Triple{s, r, o});
    return *this;
  }
  GraphBuilder& fact(const std::string& subject, const std::string& attribute,
                     LiteralValue value) {
    facts_.push_back(AttributeFact{subject, attribute, std::move(value)});
    return *this;
  }
  GraphBuilder& surface(const std::string& form, IdSet entities) {
    ambiguity_.push_back(AmbiguousName{form, std::move(entities)});
    return *this;
  }

  KnowledgeGraph build() const {
    return KnowledgeGraph(schema_, entities_, triples_, facts_, ambiguity_);
  }

  const Schema& schema() const { return schema_; }

 private:
  Schema schema_;
  std::vector<Entity> entities_;
  std::vector<Triple> triples_;
  std::vector<AttributeFact> facts_;
  std::vector<AmbiguousName> ambiguity_;
};

// Small handcrafted graph used across suites: two films named "Heat" in a
// registry, casts, directors, awards, and release years.
inline GraphBuilder mini_builder() {
  GraphBuilder b;
  b.type("film", "film").type("person", "film").type("award", "film");
  b.relation("cast", "film", "person")
      .relation("director", "film", "person")
      .relation("won", "person", "award");
  b.attribute("year", "film", ValueKind::DateYear);
  b.entity("f1", "film", "Heat (1995 film)")
      .entity("f2", "film", "Heat (2013 film)")
      .entity("f3", "film", "Glass Harbor")
      .entity("p1", "person", "Robert De Niro", {"R. De Niro", "Bobby De Niro"})
      .entity("p2", "person", "Al Pacino")
      .entity("p3", "person", "Dana Corey")
      .entity("p4", "person", "Michael Mann")
      .entity("a1", "award", "Academy Award");
  b.triple("f1", "cast", "p1")
      .triple("f1", "cast", "p2")
      .triple("f2", "cast", "p3")
      .triple("f3", "cast", "p1")
      .triple("f3", "cast", "p3")
      .triple("f1", "director", "p4")
      .triple("f3", "director", "p4")
      .triple("p1", "won", "a1")
      .triple("p2", "won", "a1");
  b.fact("f1", "year", LiteralValue::date_year(1995))
      .fact("f2", "year", LiteralValue::date_year(2013))
      .fact("f3", "year", LiteralValue::date_year(2001));
  b.surface("Heat", {"f1", "f2"});
  return b;
}

inline KnowledgeGraph mini_graph() { return mini_builder().build(); }

inline std::string fixture_path(const std::string& name) {
  return std::string(KGQA_FIXTURE_DIR) + "/" + name;
}

inline GraphPaths film_fixture_paths() {
  return GraphPaths{fixture_path("film/schema.json"),
                    fixture_path("film/entities.jsonl"),
                    fixture_path("film/triples.jsonl"),
                    fixture_path("film/attributes.jsonl"),
                    fixture_path("film/ambiguity.jsonl")};
}

inline KnowledgeGraph load_film_graph() {
  return load_graph(film_fixture_paths());
}

// Deterministic pseudo-random graph over two entity types with a
// cross-type relation, a same-type relation, an integer attribute, and a
// few ambiguity surfaces.  Sized for exhaustive oracle comparison.
inline KnowledgeGraph random_graph(Rng& rng, int per_type = 12) {
  GraphBuilder b;
  b.type("ta").type("tb");
  b.relation("ab", "ta", "tb").relation("bb", "tb", "tb");
  b.attribute("num", "ta", ValueKind::Integer);

  std::vector<std::string> as, bs;
  for (int i = 0; i < per_type; ++i) {
    as.push_back("a" + std::to_string(i));
    bs.push_back("b" + std::to_string(i));
    b.entity(as.back(), "ta", "Alpha " + std::to_string(i));
    b.entity(bs.back(), "tb", "Beta " + std::to_string(i));
  }
  for (const auto& a : as)
    for (const auto& t : bs)
      if (rng.chance(0.25)) b.triple(a, "ab", t);
  for (const auto& s : bs)
    for (const auto& t : bs)
      if (s != t && rng.chance(0.15)) b.triple(s, "bb", t);
  for (const auto& a : as)
    if (rng.chance(0.8))
      b.fact(a, "num", LiteralValue::integer(static_cast<std::int64_t>(
                           rng.below(10))));

  // Two surfaces over disjoint pairs of same-type entities.
  if (per_type >= 4) {
    b.surface("AlphaName", {as[0], as[1]});
    b.surface("BetaName", {bs[0], bs[1], bs[2]});
  }
  return b.build();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "kgqa") {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      std::filesystem::path candidate =
          base / (tag + "-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter()++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

}  // namespace kgqa::testing
