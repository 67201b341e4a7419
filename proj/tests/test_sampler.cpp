// Skeleton sampling and realization: determinism, weight controls, audit
// properties over many samples, binding search, selector validation, and
// quota-driven dataset synthesis including worker-count independence.

#include <gtest/gtest.h>

#include <set>

#include "kgqa/executor.hpp"
#include "kgqa/realize.hpp"
#include "kgqa/sampler.hpp"
#include "kgqa/synth.hpp"
#include "kgqa/typecheck.hpp"
#include "testutil.hpp"

namespace kgqa {
namespace {

SynthesisConfig small_config(std::uint64_t seed) {
  SynthesisConfig c;
  c.seed = seed;
  c.min_steps = 2;
  c.max_steps = 6;
  c.candidate_pool = 20;
  c.max_attempts_per_plan = 32;
  c.max_answer_size = 32;
  return c;
}

// --- skeleton sampling ---------------------------------------------------------

TEST(Sampler, FixedSeedReproduces) {
  KnowledgeGraph g = testing::load_film_graph();
  SynthesisConfig config = small_config(9);
  for (int i = 0; i < 20; ++i) {
    Rng r1 = Rng::derive(9, i);
    Rng r2 = Rng::derive(9, i);
    Plan p1 = sample_plan_skeleton(g.schema(), config, r1, i % 2 == 0);
    Plan p2 = sample_plan_skeleton(g.schema(), config, r2, i % 2 == 0);
    EXPECT_TRUE(p1 == p2) << "draw " << i;
  }
}

TEST(Sampler, ZeroWeightDisablesSetOps) {
  KnowledgeGraph g = testing::load_film_graph();
  SynthesisConfig config = small_config(11);
  config.op_weights = {{"union", 0.0}, {"difference", 0.0},
                       {"intersection", 0.0}};
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Plan p = sample_plan_skeleton(g.schema(), config, rng, false);
    for (const PlanStep& s : p.steps)
      EXPECT_FALSE(std::holds_alternative<SetOp>(s.op))
          << "draw " << i << " step " << s.index;
  }
}

TEST(Sampler, AuditManySkeletons) {
  KnowledgeGraph g = testing::load_film_graph();
  SynthesisConfig config = small_config(13);
  const std::set<std::string> amb_types{"film", "band"};
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const bool ambiguous = i % 2 == 0;
    Plan p = sample_plan_skeleton(g.schema(), config, rng, ambiguous,
                                  ambiguous ? amb_types
                                            : std::set<std::string>{});
    ASSERT_TRUE(typecheck(p, g.schema()).empty()) << "draw " << i;
    ASSERT_TRUE(
        validate_heuristics(p, {config.min_steps, config.max_steps}).empty())
        << "draw " << i;
    const int n = static_cast<int>(p.steps.size());
    ASSERT_GE(n, config.min_steps) << "draw " << i;
    ASSERT_LE(n, config.max_steps) << "draw " << i;

    int amb_seeds = 0;
    for (const PlanStep& s : p.steps)
      if (const auto* a = std::get_if<AtomicOp>(&s.op))
        if (a->seed.kind == Seed::Kind::Ambiguous) {
          ++amb_seeds;
          EXPECT_TRUE(a->seed.surface.empty());
          EXPECT_TRUE(amb_types.count(a->seed.type)) << a->seed.type;
        }
    ASSERT_EQ(amb_seeds, ambiguous ? 1 : 0) << "draw " << i;
  }
}

TEST(Sampler, RelationFreeSchemaExhausts) {
  testing::GraphBuilder b;
  b.type("film");
  b.entity("f", "film");
  KnowledgeGraph g = b.build();
  SynthesisConfig config = small_config(1);
  config.max_attempts_per_plan = 8;
  Rng rng(1);
  EXPECT_THROW(sample_plan_skeleton(g.schema(), config, rng, false),
               ExhaustedAttempts);
}

// --- realization -----------------------------------------------------------------

Plan cast_skeleton() {
  PlanBuilder b;
  int films = b.atomic(Seed::hole("SUBJECT_FILM", "film"), "cast",
                       Direction::Forward);
  b.group_by(films);
  return b.finish();
}

TEST(Realize, BindsTheOnlyViableSeed) {
  testing::GraphBuilder b;
  b.type("film").type("person");
  b.relation("cast", "film", "person");
  b.entity("f_good", "film").entity("f_bare", "film").entity("x", "person");
  b.triple("f_good", "cast", "x");
  KnowledgeGraph g = b.build();

  Plan skeleton = cast_skeleton();
  ASSERT_TRUE(typecheck(skeleton, g.schema()).empty());
  SynthesisConfig config = small_config(3);
  Rng rng(3);
  Plan plan = realize_entities(skeleton, g, nullptr, config, rng);
  const auto& seed = std::get<AtomicOp>(plan.steps[0].op).seed;
  EXPECT_EQ(seed.kind, Seed::Kind::Entity);
  EXPECT_EQ(seed.entity, "f_good");
  EXPECT_EQ(execute_branched(plan, g).branches.at("default"), (IdSet{"x"}));
}

TEST(Realize, NoViableBindingWhenGraphIsBare) {
  testing::GraphBuilder b;
  b.type("film").type("person");
  b.relation("cast", "film", "person");
  b.entity("f1", "film").entity("f2", "film");
  KnowledgeGraph g = b.build();

  Plan skeleton = cast_skeleton();
  ASSERT_TRUE(typecheck(skeleton, g.schema()).empty());
  SynthesisConfig config = small_config(3);
  Rng rng(3);
  EXPECT_THROW(realize_entities(skeleton, g, nullptr, config, rng),
               NoViableBinding);
}

TEST(Realize, GroundsAmbiguousSurface) {
  KnowledgeGraph g = testing::mini_graph();
  PlanBuilder b;
  int cast = b.atomic(Seed::ambiguous("", "film"), "cast",
                      Direction::Forward);
  b.group_by(cast);
  Plan skeleton = b.finish();
  ASSERT_TRUE(typecheck(skeleton, g.schema()).empty());
  SynthesisConfig config = small_config(5);
  Rng rng(5);
  Plan plan = realize_entities(skeleton, g, nullptr, config, rng,
                               RealizeGoal{2, 1 << 30});
  EXPECT_EQ(std::get<AtomicOp>(plan.steps[0].op).seed.surface, "Heat");
  EXPECT_EQ(execute_branched(plan, g).branches.size(), 2u);
}

TEST(Realize, GroundsValueHoleFromObservedFacts) {
  KnowledgeGraph g = testing::mini_graph();
  PlanBuilder b;
  int films = b.atomic(Seed::of_entity("p1", "person"), "cast",
                       Direction::Reverse);
  AttrComparePred pred;
  pred.attribute = "year";
  pred.cmp = Cmp::Eq;
  pred.value_hole = true;
  pred.slot = "VALUE_YEAR";
  b.filter(films, pred);
  Plan skeleton = b.finish();
  ASSERT_TRUE(typecheck(skeleton, g.schema()).empty());

  SynthesisConfig config = small_config(7);
  Rng rng(7);
  Plan plan = realize_entities(skeleton, g, nullptr, config, rng);
  const auto& ac =
      std::get<AttrComparePred>(std::get<FilterOp>(plan.steps[1].op).pred);
  EXPECT_FALSE(ac.value_hole);
  EXPECT_EQ(ac.value.kind, ValueKind::DateYear);
  // p1 appears in f1 (1995) and f3 (2001); an equality filter can only
  // succeed with one of the observed years.
  EXPECT_TRUE(ac.value.num == 1995 || ac.value.num == 2001) << ac.value.num;
  EXPECT_FALSE(execute_plan(plan, g).answer().empty());
}

struct FixedSelector : EntitySelector {
  Selection fixed;
  int calls = 0;
  SelectionRequest last_request;
  Selection select(const SelectionRequest& request) override {
    ++calls;
    last_request = request;
    return fixed;
  }
};

TEST(Realize, SelectorChoiceIsHonoredWhenInPool) {
  testing::GraphBuilder b;
  b.type("film").type("person");
  b.relation("cast", "film", "person");
  b.entity("f1", "film").entity("f2", "film");
  b.entity("x", "person").entity("y", "person");
  b.triple("f1", "cast", "x").triple("f2", "cast", "y");
  KnowledgeGraph g = b.build();

  Plan skeleton = cast_skeleton();
  ASSERT_TRUE(typecheck(skeleton, g.schema()).empty());
  SynthesisConfig config = small_config(3);

  for (const std::string want : {"f1", "f2"}) {
    FixedSelector selector;
    selector.fixed.entities = {{"SUBJECT_FILM", want}};
    Rng rng(3);
    RealizeReport report;
    Plan plan = realize_entities(skeleton, g, &selector, config, rng, {},
                                 "select:test", &report);
    EXPECT_EQ(std::get<AtomicOp>(plan.steps[0].op).seed.entity, want);
    EXPECT_EQ(selector.calls, 1);
    EXPECT_TRUE(report.selector_consulted);
    EXPECT_TRUE(report.selector_used);
    EXPECT_EQ(selector.last_request.key, "select:test");
    ASSERT_EQ(selector.last_request.entity_pools.count("SUBJECT_FILM"), 1u);
  }
}

TEST(Realize, OutOfPoolProposalIsStripped) {
  testing::GraphBuilder b;
  b.type("film").type("person");
  b.relation("cast", "film", "person");
  b.entity("f1", "film").entity("x", "person");
  b.triple("f1", "cast", "x");
  KnowledgeGraph g = b.build();

  Plan skeleton = cast_skeleton();
  ASSERT_TRUE(typecheck(skeleton, g.schema()).empty());
  SynthesisConfig config = small_config(3);
  FixedSelector selector;
  selector.fixed.entities = {{"SUBJECT_FILM", "hallucinated-id"}};
  Rng rng(3);
  RealizeReport report;
  Plan plan = realize_entities(skeleton, g, &selector, config, rng, {},
                               "", &report);
  // The proposal is discarded, the fallback still realizes the plan.
  EXPECT_EQ(std::get<AtomicOp>(plan.steps[0].op).seed.entity, "f1");
  EXPECT_TRUE(report.selector_consulted);
  EXPECT_FALSE(report.selector_used);
}

TEST(Realize, SelectorFailureDegradesToFallback) {
  struct ThrowingSelector : EntitySelector {
    Selection select(const SelectionRequest&) override {
      throw ClientError("offline");
    }
  };
  KnowledgeGraph g = testing::mini_graph();
  Plan skeleton = cast_skeleton();
  ASSERT_TRUE(typecheck(skeleton, g.schema()).empty());
  SynthesisConfig config = small_config(3);
  ThrowingSelector selector;
  Rng rng(3);
  EXPECT_NO_THROW(realize_entities(skeleton, g, &selector, config, rng));
}

TEST(RealizeProperty, GroundedSeedsComeFromTheGraph) {
  for (int round = 0; round < 15; ++round) {
    Rng graph_rng = Rng::derive(707, round);
    KnowledgeGraph g = testing::random_graph(graph_rng);
    SynthesisConfig config = small_config(808 + round);
    config.max_steps = 4;
    Rng rng = Rng::derive(808, round);

    FixedSelector selector;  // always proposes garbage
    selector.fixed.entities = {{"SUBJECT_TA", "bogus"},
                               {"SUBJECT_TB", "bogus"}};
    for (int i = 0; i < 5; ++i) {
      Plan skeleton;
      Plan plan;
      try {
        skeleton = sample_plan_skeleton(g.schema(), config, rng, false);
        plan = realize_entities(skeleton, g, &selector, config, rng);
      } catch (const ExhaustedAttempts&) {
        continue;
      } catch (const NoViableBinding&) {
        continue;
      }
      for (const PlanStep& s : plan.steps)
        if (const auto* a = std::get_if<AtomicOp>(&s.op)) {
          ASSERT_EQ(a->seed.kind, Seed::Kind::Entity);
          EXPECT_TRUE(
              set_contains(g.entities_of_type(a->seed.type), a->seed.entity))
              << a->seed.entity;
        }
    }
  }
}

// --- dataset synthesis ------------------------------------------------------------

TEST(Synth, WorkerCountDoesNotChangeTheDataset) {
  KnowledgeGraph g = testing::load_film_graph();
  SynthesisConfig config = small_config(42);
  config.max_steps = 5;
  SynthesisQuota quota{2, 2, {}};

  SynthesisOutcome serial = synthesize_dataset(g, config, quota, nullptr, 1);
  SynthesisOutcome parallel = synthesize_dataset(g, config, quota, nullptr, 4);
  EXPECT_EQ(records_to_jsonl(serial.records),
            records_to_jsonl(parallel.records));

  SynthesisOutcome again = synthesize_dataset(g, config, quota, nullptr, 1);
  EXPECT_EQ(records_to_jsonl(serial.records), records_to_jsonl(again.records));
}

TEST(Synth, EmittedRecordsAreWellFormed) {
  KnowledgeGraph g = testing::load_film_graph();
  SynthesisConfig config = small_config(42);
  config.max_steps = 5;
  SynthesisQuota quota{3, 3, {}};
  SynthesisOutcome outcome = synthesize_dataset(g, config, quota, nullptr, 2);

  ASSERT_EQ(outcome.records.size(), 6u);
  int ambiguous = 0;
  for (std::size_t i = 0; i < outcome.records.size(); ++i) {
    const QARecord& r = outcome.records[i];
    EXPECT_EQ(r.id, "q" + pad_number(i + 1, 6));
    Plan p = r.plan;
    EXPECT_TRUE(typecheck(p, g.schema()).empty());
    EXPECT_TRUE(
        validate_heuristics(p, {config.min_steps, config.max_steps}).empty());
    EXPECT_FALSE(r.answers.branches.empty());
    for (const auto& [label, ids] : r.answers.branches)
      EXPECT_FALSE(ids.empty()) << r.id << " branch " << label;
    EXPECT_LE(r.answers.total_size(), config.max_answer_size);
    EXPECT_EQ(r.answers.ambiguous, ambiguous_step(r.plan) != 0);
    if (r.answers.ambiguous) {
      ++ambiguous;
      EXPECT_GE(r.answers.branches.size(), 2u) << r.id;
    } else {
      EXPECT_EQ(r.answers.branches.size(), 1u);
      EXPECT_EQ(r.answers.branches.begin()->first, "default");
    }
    EXPECT_EQ(r.stats.n_steps, static_cast<int>(r.plan.steps.size()));
    EXPECT_EQ(r.rendered_plan.size(), r.plan.steps.size());
    EXPECT_FALSE(r.domain.empty());

    // Grounded plans round-trip through the JSON form.
    Plan back = deserialize_plan(serialize_plan(r.plan));
    EXPECT_TRUE(back == r.plan);

    // The recorded answers are reproducible from the plan.
    EXPECT_TRUE(execute_branched(r.plan, g) == r.answers);
  }
  EXPECT_EQ(ambiguous, 3);
}

TEST(Synth, PerDomainCapMakesQuotaUnreachable) {
  KnowledgeGraph g = testing::load_film_graph();
  SynthesisConfig config = small_config(42);
  config.max_steps = 4;
  config.candidate_pool = 8;
  config.max_attempts_per_plan = 4;
  SynthesisQuota quota{0, 1, {{"film", 0}, {"music", 0}}};
  EXPECT_THROW(synthesize_dataset(g, config, quota, nullptr, 1),
               QuotaUnreachable);
}

TEST(Synth, RejectsEmptyQuota) {
  KnowledgeGraph g = testing::load_film_graph();
  SynthesisConfig config = small_config(42);
  EXPECT_THROW(synthesize_dataset(g, config, {0, 0, {}}, nullptr, 1),
               ConfigError);
}

}  // namespace
}  // namespace kgqa
