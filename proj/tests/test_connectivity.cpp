#include "otcert/connectivity.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "otcert/generators.hpp"
#include "test_util.hpp"

namespace otcert {
namespace {

using testing::Q;
using testing::zero_diagonal;

SupportSet diagonal_support(std::size_t n) {
  SupportSet s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({i, i});
  return s;
}

// Two finite 2x2 blocks, infinite between them.
Instance<Q> two_blocks() {
  return testing::instance({"1/4", "1/4", "1/4", "1/4"}, {"1/4", "1/4", "1/4", "1/4"},
                           {{"0", "1", "inf", "inf"},
                            {"1", "0", "inf", "inf"},
                            {"inf", "inf", "0", "2"},
                            {"inf", "inf", "2", "0"}});
}

TEST(ReachGraph, FiniteCostsGiveCompleteDigraph) {
  auto g = reach_graph(zero_diagonal(), SupportSet{{0, 0}, {1, 1}, {0, 1}});
  for (std::size_t u = 0; u < 3; ++u) EXPECT_EQ(g.out[u].size(), 2u);
}

TEST(ReachGraph, ZeroOneDiagonalReachesDownward) {
  auto inst = validate_instance(gen_zero_one<Q>(4));
  auto g = reach_graph(inst, diagonal_support(5));
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t j = 0; j < 5; ++j) {
      if (j == k) continue;
      bool edge = std::find(g.out[k].begin(), g.out[k].end(), j) != g.out[k].end();
      EXPECT_EQ(edge, j >= k) << k << "->" << j;
    }
}

TEST(ReachGraph, InfiniteSupportPairThrows) {
  auto inst = testing::instance({"1/2", "1/2"}, {"1/2", "1/2"}, {{"inf", "0"}, {"0", "0"}});
  EXPECT_THROW(reach_graph(inst, SupportSet{{0, 0}}), InputError);
}

TEST(Decompose, FiniteCostsSingleClass) {
  auto d = decompose(zero_diagonal(), SupportSet{{1, 1}, {0, 0}});
  ASSERT_EQ(d.classes.size(), 1u);
  EXPECT_EQ(d.classes[0].sources, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(d.classes[0].pairs, (SupportSet{{0, 0}, {1, 1}}));
}

TEST(Decompose, ZeroOneDiagonalIsAllSingletons) {
  // N = 4 gives five grid points, hence five classes.
  auto inst = validate_instance(gen_zero_one<Q>(4));
  auto d = decompose(inst, diagonal_support(5));
  ASSERT_EQ(d.classes.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(d.classes[i].sources, std::vector<std::size_t>{i});
    EXPECT_EQ(d.classes[i].targets, std::vector<std::size_t>{i});
  }
  EXPECT_FALSE(is_connecting(inst, diagonal_support(5)));
}

TEST(Decompose, BlockDiagonalGivesTwoClasses) {
  auto d = decompose(two_blocks(), SupportSet{{3, 3}, {0, 1}, {2, 2}, {1, 0}});
  ASSERT_EQ(d.classes.size(), 2u);
  EXPECT_EQ(d.classes[0].sources, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(d.classes[0].targets, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(d.classes[1].sources, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(d.classes[1].targets, (std::vector<std::size_t>{2, 3}));
}

TEST(IsConnecting, Examples) {
  EXPECT_TRUE(is_connecting(zero_diagonal(), SupportSet{{0, 1}, {1, 0}}));
  auto ap = validate_instance(gen_ap<Q>(3, Q(1), Q(2)));
  EXPECT_TRUE(is_connecting(ap, SupportSet{{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_FALSE(is_connecting(two_blocks(), SupportSet{{0, 0}, {2, 2}}));
  EXPECT_FALSE(is_connecting(zero_diagonal(), SupportSet{}));
}

TEST(ClassConfinement, Examples) {
  auto blocks = two_blocks();
  auto d = decompose(blocks, SupportSet{{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  auto r = check_class_confinement(blocks, d);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.off_class_mass, Q(0));

  auto single = check_class_confinement(zero_diagonal(), decompose(zero_diagonal(), SupportSet{{0, 0}, {1, 1}}));
  EXPECT_EQ(single.off_class_mass, Q(0));

  // A finite arc from the first block into the second: mass balance still
  // keeps every optimal-looking plan inside the blocks.
  auto crossing = testing::instance({"1/4", "1/4", "1/4", "1/4"}, {"1/4", "1/4", "1/4", "1/4"},
                                    {{"0", "1", "0", "inf"},
                                     {"1", "0", "inf", "inf"},
                                     {"inf", "inf", "0", "2"},
                                     {"inf", "inf", "2", "0"}});
  auto dc = decompose(crossing, SupportSet{{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  ASSERT_EQ(dc.classes.size(), 2u);
  auto rc = check_class_confinement(crossing, dc);
  ASSERT_TRUE(rc.feasible);
  EXPECT_EQ(rc.off_class_mass, Q(0));
}

TEST(ClassConfinement, ReportsLeakWhenClassesAreNotFromAFullPlan) {
  // A single pair of a finite matrix as the "decomposition": the rest of the
  // mass has to sit outside.
  auto d = decompose(zero_diagonal(), SupportSet{{0, 0}});
  auto r = check_class_confinement(zero_diagonal(), d);
  EXPECT_EQ(r.off_class_mass, Q(1));
}

void expect_decomposition_invariants(const ConnectivityDecomposition& d) {
  std::set<std::size_t> xs, ys;
  std::size_t total = 0;
  for (const auto& c : d.classes) {
    total += c.pairs.size();
    for (std::size_t x : c.sources) EXPECT_TRUE(xs.insert(x).second) << "source in two classes";
    for (std::size_t y : c.targets) EXPECT_TRUE(ys.insert(y).second) << "target in two classes";
    // class = (C x D) intersected with the support
    for (const Pair& p : d.nodes) {
      bool in_rect = std::binary_search(c.sources.begin(), c.sources.end(), p.x) &&
                     std::binary_search(c.targets.begin(), c.targets.end(), p.y);
      bool in_class = std::binary_search(c.pairs.begin(), c.pairs.end(), p);
      EXPECT_EQ(in_rect, in_class);
    }
  }
  EXPECT_EQ(total, d.nodes.size());
  for (std::size_t i = 1; i < d.classes.size(); ++i)
    EXPECT_LT(d.classes[i - 1].sources.front(), d.classes[i].sources.front());
}

TEST(ConnectivityProperties, ClosureIsPreorderAndClassesAreMutualReach) {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    auto inst = validate_instance(gen_random<Q>({.rows = 5, .cols = 5, .seed = seed, .inf_density = 0.45}));
    auto plan = random_vertex_plan(inst, rng);
    auto d = decompose(inst, support(plan));
    expect_decomposition_invariants(d);
    auto r = reach_closure(d);
    const std::size_t n = d.nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_TRUE(r(i, i));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (r(i, j) && r(j, k)) {
            EXPECT_TRUE(r(i, k));
          }
      for (std::size_t j = 0; j < n; ++j)
        EXPECT_EQ(r(i, j) && r(j, i), d.class_of[i] == d.class_of[j]);
    }
  }
}

TEST(ConnectivityProperties, IndependentOfSupportOrder) {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = validate_instance(gen_random<Q>({.rows = 4, .cols = 6, .seed = seed, .inf_density = 0.4}));
    auto s = support(random_vertex_plan(inst, rng));
    auto base = decompose(inst, s);
    std::shuffle(s.begin(), s.end(), rng);
    auto again = decompose(inst, s);
    ASSERT_EQ(base.classes.size(), again.classes.size());
    for (std::size_t i = 0; i < base.classes.size(); ++i)
      EXPECT_EQ(base.classes[i].pairs, again.classes[i].pairs);
  }
}

TEST(ConnectivityProperties, FiniteCostsAlwaysConnect) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = validate_instance(gen_random<Q>({.rows = 4, .cols = 4, .seed = seed}));
    auto s = support(random_vertex_plan(inst, rng));
    EXPECT_TRUE(is_connecting(inst, s));
    EXPECT_EQ(decompose(inst, s).classes.size(), 1u);
  }
}

TEST(ConnectivityProperties, BlockInstancesConfineAndTransitionIsIdentity) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::size_t k = 2 + seed % 3;
    auto inst = validate_instance(gen_blocks<Q>(k, seed));
    auto best = solve_exact(inst);
    ASSERT_TRUE(best.feasible);
    auto d = decompose(inst, support(best.plan));
    EXPECT_EQ(d.classes.size(), k);
    EXPECT_EQ(check_class_confinement(inst, d).off_class_mass, Q(0));
    auto p = class_transition_matrix(inst, d, best.plan);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) EXPECT_EQ(p(i, j), Q(i == j ? 1 : 0));
  }
}

TEST(ConnectivityProperties, TransitionMatrixIsStochasticWithInvariantMass) {
  std::mt19937_64 rng(31);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = validate_instance(gen_random<Q>({.rows = 5, .cols = 5, .seed = seed, .inf_density = 0.4}));
    auto best = solve_exact(inst);
    auto d = decompose(inst, support(best.plan));
    auto other = random_vertex_plan(inst, rng);
    auto p = class_transition_matrix(inst, d, other);
    const std::size_t k = d.classes.size();
    std::vector<Q> weight(k, Q(0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t x : d.classes[i].sources) weight[i] += inst.mu()[x];
    for (std::size_t i = 0; i < k; ++i) {
      Q row(0);
      for (std::size_t j = 0; j < k; ++j) row += p(i, j);
      EXPECT_EQ(row, Q(1)) << "seed " << seed;
    }
    for (std::size_t j = 0; j < k; ++j) {
      Q inflow(0);
      for (std::size_t i = 0; i < k; ++i) inflow += weight[i] * p(i, j);
      EXPECT_EQ(inflow, weight[j]) << "seed " << seed;
    }
  }
}

}  // namespace
}  // namespace otcert
