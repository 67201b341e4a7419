// Executor semantics: hand-enumerated answers on the fixtures, multiplicity
// bookkeeping, ambiguity branching, and randomized cross-checks against the
// naive reference interpreter.

#include <gtest/gtest.h>

#include <map>

#include "kgqa/executor.hpp"
#include "kgqa/typecheck.hpp"
#include "oracle.hpp"
#include "plangen.hpp"
#include "testutil.hpp"

namespace kgqa {
namespace {

// --- hand-enumerated answers ---------------------------------------------------

TEST(Executor, GenreIntersection) {
  KnowledgeGraph g = testing::load_film_graph();
  PlanBuilder b;
  int g1 = b.atomic(Seed::of_entity("f_h95", "film"), "has_genre",
                    Direction::Forward);
  int g2 = b.atomic(Seed::of_entity("f_ns", "film"), "has_genre",
                    Direction::Forward);
  b.set_op(OpKind::Intersection, g1, g2);
  Plan p = b.finish();
  Execution exec = execute_plan(p, g);
  EXPECT_EQ(exec.steps[0].members, (IdSet{"g_crime", "g_thriller"}));
  EXPECT_EQ(exec.steps[1].members, (IdSet{"g_thriller"}));
  EXPECT_EQ(exec.answer(), (IdSet{"g_thriller"}));
}

TEST(Executor, GroupCountKeepsRepeatedDirector) {
  KnowledgeGraph g = testing::mini_graph();
  PlanBuilder b;
  int films = b.atomic(Seed::of_entity("p1", "person"), "cast",
                       Direction::Reverse);
  int directors = b.join(films, "director", Direction::Forward);
  int grouped = b.group_by(directors);
  b.filter(grouped, CountAtLeastPred{2});
  Plan p = b.finish();
  Execution exec = execute_plan(p, g);
  EXPECT_EQ(exec.steps[0].members, (IdSet{"f1", "f3"}));
  EXPECT_EQ(exec.steps[1].members, (IdSet{"p4"}));
  EXPECT_EQ(exec.steps[1].multiplicity.at("p4"), 2);
  EXPECT_EQ(exec.answer(), (IdSet{"p4"}));

  // Raising the threshold empties the answer.
  std::get<FilterOp>(p.steps[3].op).pred = CountAtLeastPred{3};
  EXPECT_TRUE(execute_plan(p, g).answer().empty());
}

TEST(Executor, JoinMultiplicityCountsDistinctInputs) {
  KnowledgeGraph g = testing::mini_graph();
  PlanBuilder b;
  int films = b.atomic(Seed::of_entity("p1", "person"), "cast",
                       Direction::Reverse);
  b.join(films, "cast", Direction::Forward);
  Plan p = b.finish();
  Execution exec = execute_plan(p, g);
  const auto& mult = exec.steps[1].multiplicity;
  EXPECT_EQ(mult.at("p1"), 2);  // reached from both f1 and f3
  EXPECT_EQ(mult.at("p2"), 1);
  EXPECT_EQ(mult.at("p3"), 1);
}

TEST(Executor, SetOpMultiplicities) {
  KnowledgeGraph g = testing::mini_graph();
  PlanBuilder b;
  int c1 = b.atomic(Seed::of_entity("f1", "film"), "cast",
                    Direction::Forward);
  int c3 = b.atomic(Seed::of_entity("f3", "film"), "cast",
                    Direction::Forward);
  int u = b.set_op(OpKind::Union, c1, c3);
  int i = b.set_op(OpKind::Intersection, c1, c3);
  b.set_op(OpKind::Difference, u, i);
  Plan p = b.finish();
  Execution exec = execute_plan(p, g);

  // union sums: p1 appears on both sides
  EXPECT_EQ(exec.steps[u - 1].members, (IdSet{"p1", "p2", "p3"}));
  EXPECT_EQ(exec.steps[u - 1].multiplicity.at("p1"), 2);
  EXPECT_EQ(exec.steps[u - 1].multiplicity.at("p2"), 1);
  // intersection takes the minimum
  EXPECT_EQ(exec.steps[i - 1].members, (IdSet{"p1"}));
  EXPECT_EQ(exec.steps[i - 1].multiplicity.at("p1"), 1);
  // difference keeps the left side's multiplicity
  EXPECT_EQ(exec.answer(), (IdSet{"p2", "p3"}));
  EXPECT_EQ(exec.steps.back().multiplicity.at("p2"), 1);
}

TEST(Executor, DifferenceWithSelfIsEmpty) {
  KnowledgeGraph g = testing::mini_graph();
  PlanBuilder b;
  int c1 = b.atomic(Seed::of_entity("f1", "film"), "cast",
                    Direction::Forward);
  int c1b = b.atomic(Seed::of_entity("f1", "film"), "cast",
                     Direction::Forward);
  b.set_op(OpKind::Difference, c1, c1b);
  Plan p = b.finish();
  EXPECT_TRUE(execute_plan(p, g).answer().empty());
  EXPECT_THROW(execute_branched(p, g), AllBranchesEmpty);
}

TEST(Executor, AttributeFilter) {
  KnowledgeGraph g = testing::mini_graph();
  PlanBuilder b;
  int films = b.atomic(Seed::of_entity("p1", "person"), "cast",
                       Direction::Reverse);
  b.filter(films, AttrComparePred{"year", Cmp::Lt,
                                  LiteralValue::date_year(2000), false, ""});
  Plan p = b.finish();
  EXPECT_EQ(execute_plan(p, g).answer(), (IdSet{"f1"}));
}

// --- ambiguity branching --------------------------------------------------------

TEST(Executor, HeatBranchesPlainCast) {
  KnowledgeGraph g = testing::load_film_graph();
  PlanBuilder b;
  int cast = b.atomic(Seed::ambiguous("Heat", "film"), "cast_member",
                      Direction::Forward);
  b.group_by(cast);
  Plan p = b.finish();
  BranchedAnswer out = execute_branched(p, g);
  EXPECT_TRUE(out.ambiguous);
  ASSERT_EQ(out.branches.size(), 3u);
  EXPECT_EQ(out.branches.at("Heat (1972 film)"), (IdSet{"p_glen", "p_rita"}));
  EXPECT_EQ(out.branches.at("Heat (1995 film)"),
            (IdSet{"p_deniro", "p_kilmer", "p_pacino"}));
  EXPECT_EQ(out.branches.at("Heat (2013 film)"), (IdSet{"p_dana", "p_liam"}));
}

TEST(Executor, HeatBranchesAwardWinningCast) {
  KnowledgeGraph g = testing::load_film_graph();
  PlanBuilder b;
  int cast = b.atomic(Seed::ambiguous("Heat", "film"), "cast_member",
                      Direction::Forward);
  b.filter(cast, HasRelationPred{"has_award", Direction::Forward,
                                 std::nullopt});
  Plan p = b.finish();
  BranchedAnswer out = execute_branched(p, g);
  EXPECT_TRUE(out.ambiguous);
  ASSERT_EQ(out.branches.size(), 3u);
  EXPECT_EQ(out.branches.at("Heat (1972 film)"), (IdSet{"p_rita"}));
  EXPECT_EQ(out.branches.at("Heat (1995 film)"),
            (IdSet{"p_deniro", "p_pacino"}));
  EXPECT_EQ(out.branches.at("Heat (2013 film)"), (IdSet{"p_dana"}));
}

TEST(Executor, EmptyBranchesAreDropped) {
  KnowledgeGraph g = testing::load_film_graph();
  // Genres shared with North Star (thriller): only the 2007 Eclipse
  // qualifies; the 1998 film is a drama and its branch disappears.
  PlanBuilder b;
  int g1 = b.atomic(Seed::ambiguous("Eclipse", "film"), "has_genre",
                    Direction::Forward);
  int g2 = b.atomic(Seed::of_entity("f_ns", "film"), "has_genre",
                    Direction::Forward);
  b.set_op(OpKind::Intersection, g1, g2);
  Plan p = b.finish();
  BranchedAnswer out = execute_branched(p, g);
  EXPECT_TRUE(out.ambiguous);
  ASSERT_EQ(out.branches.size(), 1u);
  EXPECT_EQ(out.branches.at("Eclipse (2007 film)"), (IdSet{"g_thriller"}));
}

TEST(Executor, TypeMismatchedSurfaceHasNoBranches) {
  KnowledgeGraph g = testing::load_film_graph();
  // "Nova" names two bands; binding it into a film slot matches nothing.
  PlanBuilder b;
  int cast = b.atomic(Seed::ambiguous("Nova", "film"), "cast_member",
                      Direction::Forward);
  b.group_by(cast);
  Plan p = b.finish();
  EXPECT_THROW(execute_branched(p, g), AllBranchesEmpty);
}

TEST(Executor, NonAmbiguousPlanHasDefaultBranch) {
  KnowledgeGraph g = testing::mini_graph();
  PlanBuilder b;
  int cast = b.atomic(Seed::of_entity("f1", "film"), "cast",
                      Direction::Forward);
  b.group_by(cast);
  Plan p = b.finish();
  BranchedAnswer out = execute_branched(p, g);
  EXPECT_FALSE(out.ambiguous);
  ASSERT_EQ(out.branches.size(), 1u);
  EXPECT_EQ(out.branches.at("default"), (IdSet{"p1", "p2"}));
}

TEST(Executor, UnboundHoleAndUnknownSurface) {
  KnowledgeGraph g = testing::mini_graph();
  {
    PlanBuilder b;
    int s = b.atomic(Seed::hole("SUBJECT_FILM", "film"), "cast",
                     Direction::Forward);
    b.group_by(s);
    Plan p = b.finish();
    EXPECT_THROW(execute_plan(p, g), UnboundHole);
    EXPECT_NO_THROW(execute_plan(p, g, {{"SUBJECT_FILM", "f1"}}));
  }
  {
    PlanBuilder b;
    int s = b.atomic(Seed::ambiguous("Zzz", "film"), "cast",
                     Direction::Forward);
    b.group_by(s);
    Plan p = b.finish();
    EXPECT_THROW(execute_branched(p, g), UnknownSurface);
  }
}

TEST(Executor, BranchLabelsDisambiguateOnCollision) {
  testing::GraphBuilder b;
  b.type("film").type("person");
  b.relation("cast", "film", "person");
  b.entity("f1", "film", "Heat").entity("f2", "film", "Heat");
  b.entity("x", "person").entity("y", "person");
  b.triple("f1", "cast", "x").triple("f2", "cast", "y");
  b.surface("Heat", {"f1", "f2"});
  KnowledgeGraph g = b.build();

  PlanBuilder pb;
  int cast = pb.atomic(Seed::ambiguous("Heat", "film"), "cast",
                       Direction::Forward);
  pb.group_by(cast);
  Plan p = pb.finish();
  BranchedAnswer out = execute_branched(p, g);
  ASSERT_EQ(out.branches.size(), 2u);
  EXPECT_EQ(out.branches.at("Heat"), (IdSet{"x"}));
  EXPECT_EQ(out.branches.at("Heat [f2]"), (IdSet{"y"}));
}

TEST(Executor, BranchesIgnoreRegistryInputOrder) {
  auto build = [](std::vector<std::string> order) {
    testing::GraphBuilder b;
    b.type("film").type("person");
    b.relation("cast", "film", "person");
    b.entity("f1", "film", "A").entity("f2", "film", "B").entity("f3", "film",
                                                                 "C");
    b.entity("x", "person").entity("y", "person");
    b.triple("f1", "cast", "x").triple("f2", "cast", "y").triple("f3", "cast",
                                                                 "x");
    b.surface("N", std::move(order));
    return b.build();
  };
  KnowledgeGraph g1 = build({"f1", "f2", "f3"});
  KnowledgeGraph g2 = build({"f3", "f1", "f2"});

  PlanBuilder pb;
  int cast = pb.atomic(Seed::ambiguous("N", "film"), "cast",
                       Direction::Forward);
  pb.group_by(cast);
  Plan p = pb.finish();
  EXPECT_TRUE(execute_branched(p, g1) == execute_branched(p, g2));
}

// --- randomized cross-checks -----------------------------------------------------

TEST(ExecutorOracle, RandomPlansAgreeOnEveryStep) {
  int executed = 0;
  for (int round = 0; round < 50; ++round) {
    Rng graph_rng = Rng::derive(101, round);
    KnowledgeGraph g = testing::random_graph(graph_rng);
    Rng plan_rng = Rng::derive(202, round);
    for (int i = 0; i < 4; ++i) {
      Plan p = testing::random_plan(plan_rng, g, /*allow_ambiguous=*/false);
      ASSERT_TRUE(typecheck(p, g.schema()).empty());
      Execution exec = execute_plan(p, g);
      for (const PlanStep& s : p.steps) {
        testing::OracleResult want = testing::oracle_eval(p, g, {}, s.index);
        EXPECT_EQ(exec.steps[s.index - 1].multiplicity, want)
            << "step " << s.index << " of " << serialize_plan(p);
      }
      ++executed;
    }
  }
  EXPECT_EQ(executed, 200);
}

TEST(ExecutorOracle, BranchedAgreesOnAmbiguousPlans) {
  for (int round = 0; round < 40; ++round) {
    Rng graph_rng = Rng::derive(303, round);
    KnowledgeGraph g = testing::random_graph(graph_rng);
    Rng plan_rng = Rng::derive(404, round);
    for (int i = 0; i < 4; ++i) {
      Plan p = testing::random_plan(plan_rng, g, /*allow_ambiguous=*/true);
      ASSERT_TRUE(typecheck(p, g.schema()).empty());
      std::map<std::string, IdSet> want = testing::oracle_branched(p, g);
      if (want.empty()) {
        EXPECT_THROW(execute_branched(p, g), AllBranchesEmpty);
        continue;
      }
      BranchedAnswer got = execute_branched(p, g);
      EXPECT_EQ(got.branches, want) << serialize_plan(p);
      EXPECT_EQ(got.ambiguous, ambiguous_step(p) != 0);
    }
  }
}

TEST(ExecutorProperty, StepwiseSetContainment) {
  for (int round = 0; round < 30; ++round) {
    Rng graph_rng = Rng::derive(505, round);
    KnowledgeGraph g = testing::random_graph(graph_rng);
    Rng plan_rng = Rng::derive(606, round);
    Plan p = testing::random_plan(plan_rng, g, /*allow_ambiguous=*/false);
    ASSERT_TRUE(typecheck(p, g.schema()).empty());
    Execution exec = execute_plan(p, g);
    for (const PlanStep& s : p.steps) {
      const IdSet& out = exec.steps[s.index - 1].members;
      if (const auto* f = std::get_if<FilterOp>(&s.op)) {
        EXPECT_EQ(set_difference(out, exec.steps[f->input - 1].members),
                  IdSet{});
      } else if (const auto* gb = std::get_if<GroupByOp>(&s.op)) {
        EXPECT_EQ(out, exec.steps[gb->input - 1].members);
      } else if (const auto* so = std::get_if<SetOp>(&s.op)) {
        const IdSet& l = exec.steps[so->left - 1].members;
        const IdSet& r = exec.steps[so->right - 1].members;
        switch (so->kind) {
          case OpKind::Union:
            EXPECT_EQ(set_difference(l, out), IdSet{});
            EXPECT_EQ(set_difference(r, out), IdSet{});
            break;
          case OpKind::Intersection:
            EXPECT_EQ(set_difference(out, l), IdSet{});
            EXPECT_EQ(set_difference(out, r), IdSet{});
            break;
          default:
            EXPECT_EQ(set_difference(out, l), IdSet{});
            EXPECT_EQ(set_intersection(out, r), IdSet{});
            break;
        }
      }
    }
  }
}

}  // namespace
}  // namespace kgqa
