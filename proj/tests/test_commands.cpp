#include "otcert/commands.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

namespace otcert {
namespace {

using testing::Q;
using testing::num;
using testing::raw;

const Verdict& verdict(const Report& r, const std::string& prefix) {
  for (const auto& v : r.verdicts)
    if (v.claim.rfind(prefix, 0) == 0) return v;
  throw std::runtime_error("no verdict " + prefix);
}

RawInstance<Q> zero_diagonal_raw() {
  return raw({"1/2", "1/2"}, {"1/2", "1/2"}, {{"0", "1"}, {"1", "0"}});
}

TEST(Json, ScalarsAcceptStringsAndNumbers) {
  EXPECT_EQ(scalar_from_json<Q>(Json("3/4")), Q(3, 4));
  EXPECT_EQ(scalar_from_json<Q>(Json(2)), Q(2));
  EXPECT_EQ(scalar_from_json<Q>(Json("0.25")), Q(1, 4));
  EXPECT_EQ(scalar_from_json<Q>(Json(0.5)), Q(1, 2));
  EXPECT_DOUBLE_EQ(scalar_from_json<double>(Json("1/4")), 0.25);
  EXPECT_THROW(scalar_from_json<Q>(Json::array()), InputError);
  EXPECT_THROW(scalar_from_json<Q>(Json("abc")), InputError);
  EXPECT_EQ(scalar_to_json(Q(1, 3)), Json("1/3"));
  EXPECT_EQ(scalar_to_json(0.5), Json(0.5));
}

TEST(Json, InstanceRoundTrip) {
  auto r = gen_ap<Q>(3, Q(1), Q(2));
  r.plan = cyclic_shift_plan<Q>(3);
  auto j = instance_to_json(r);
  EXPECT_EQ(j["cost"][0][2], Json("inf"));
  auto back = instance_from_json<Q>(j);
  EXPECT_EQ(back.mu, r.mu);
  EXPECT_EQ(back.nu, r.nu);
  EXPECT_EQ(back.plan, r.plan);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(back.cost[i][k], r.cost[i][k]);
}

TEST(Json, MalformedInstances) {
  EXPECT_THROW(instance_from_string<Q>("{"), InputError);
  EXPECT_THROW(instance_from_string<Q>("[1, 2]"), InputError);
  EXPECT_THROW(instance_from_string<Q>(R"({"mu": [1], "nu": [1]})"), InputError);
  EXPECT_THROW(instance_from_string<Q>(R"({"mu": [1], "nu": [1], "cost": [1]})"), InputError);
  EXPECT_THROW(instance_from_string<Q>(R"({"mu": 1, "nu": [1], "cost": [[0]]})"), InputError);
  auto ok = instance_from_string<Q>(R"({"mu": ["1"], "nu": [1], "cost": [["inf"]]})");
  EXPECT_TRUE(ok.cost[0][0].is_infinite());
}

TEST(Json, PlanFileForms) {
  auto bare = plan_from_json<Q>(Json::parse(R"([["1/2", 0], [0, "1/2"]])"));
  auto wrapped = plan_from_json<Q>(Json::parse(R"({"plan": [["1/2", 0], [0, "1/2"]]})"));
  EXPECT_EQ(bare, wrapped);
  EXPECT_THROW(plan_from_json<Q>(Json::parse(R"({"rows": []})")), InputError);
}

TEST(Json, PotentialsUseInfinityMarkers) {
  PotentialPair<Q> p;
  p.phi = {ExtendedReal<Q>(Q(0)), ExtendedReal<Q>::neg_inf()};
  p.psi = {ExtendedReal<Q>::pos_inf()};
  auto j = potentials_to_json(p);
  EXPECT_EQ(j["phi"][1], Json("-inf"));
  EXPECT_EQ(j["psi"][0], Json("inf"));
}

TEST(Json, MultiMarginalInput) {
  auto mmi = multi_marginal_from_json<Q>(Json::parse(R"({"weights": [["1/2","1/2"],["1/2","1/2"]], "B": [[0,0]]})"));
  EXPECT_EQ(mmi.spaces(), 2u);
  EXPECT_THROW(multi_marginal_from_json<Q>(Json::parse(R"({"weights": [[1],[1]], "B": [[0,-1]]})")), InputError);
  EXPECT_THROW(multi_marginal_from_json<Q>(Json::parse(R"({"weights": [[1],[1]]})")), InputError);
}

TEST(Report, FailWithoutWitnessGetsReason) {
  Report r("x");
  r.add("a", true);
  r.add("b", false);
  EXPECT_EQ(r.exit_code(), 1);
  EXPECT_FALSE(r.verdicts[1].witness.is_null());
  auto j = r.to_json();
  EXPECT_EQ(j["pass"], false);
  EXPECT_NE(r.to_text().find("[FAIL] b"), std::string::npos);
}

TEST(CmdSolve, Examples) {
  auto r = cmd_solve(zero_diagonal_raw());
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_EQ(r.data["value"], Json("0"));

  auto ap = cmd_solve(gen_ap<Q>(3, Q(2), Q(1)));
  EXPECT_EQ(ap.data["value"], Json("1"));
  EXPECT_EQ(ap.data["plan"], rows_to_json(TransportPlan<Q>::from_rows(cyclic_shift_plan<Q>(3)).mass()));

  auto none = cmd_solve(raw({"1/2", "1/2"}, {"1/2", "1/2"}, {{"0", "inf"}, {"0", "inf"}}));
  EXPECT_EQ(none.exit_code(), 1);
  EXPECT_EQ(none.verdicts[0].witness["reason"], "no finite plan");
  EXPECT_FALSE(none.timings.empty());
}

TEST(CmdCheck, OptimalPlanPassesEverything) {
  auto r = cmd_check(zero_diagonal_raw());
  EXPECT_EQ(r.data["plan_source"], "solver");
  EXPECT_EQ(r.verdicts.size(), 7u);
  for (const auto& v : r.verdicts) EXPECT_TRUE(v.pass) << v.claim;
}

TEST(CmdCheck, AntiDiagonalFailsAllFourWithCycle) {
  auto in = zero_diagonal_raw();
  in.plan = std::vector<std::vector<Q>>{{Q(0), Q(1, 2)}, {Q(1, 2), Q(0)}};
  auto r = cmd_check(in);
  EXPECT_EQ(r.exit_code(), 1);
  for (const char* p : {"(1)", "(2)", "(3) robust", "(4)"}) EXPECT_FALSE(verdict(r, p).pass) << p;
  EXPECT_TRUE(verdict(r, "(2)").witness.contains("cycle"));
  EXPECT_EQ(verdict(r, "(2)").witness["gap"], Json("2"));
  EXPECT_EQ(verdict(r, "(1)").witness["gap"], Json("1"));
  EXPECT_TRUE(verdict(r, "(4)").witness.contains("cycle"));
  for (const char* p : {"(3) <=>", "(3) =>", "(1) <=>"}) EXPECT_TRUE(verdict(r, p).pass) << p;
}

TEST(CmdCheck, DisconnectedClassesWithInfinity) {
  // Optimal plans of block instances are certified by gluing the classes.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto r = cmd_check(gen_blocks<Q>(3, seed));
    EXPECT_TRUE(verdict(r, "(1)").pass);
    EXPECT_TRUE(verdict(r, "(2)").pass);
    EXPECT_GE(r.data["classes"].size(), 2u);
    EXPECT_EQ(verdict(r, "(3) robust").pass, verdict(r, "(4)").pass);
    EXPECT_TRUE(r.all_pass());
  }
}

TEST(CmdCheck, PlanOverrideAndValidation) {
  auto in = zero_diagonal_raw();
  std::vector<std::vector<Q>> bad{{Q(1), Q(0)}, {Q(0), Q(0)}};
  EXPECT_THROW(cmd_check(in, {}, std::make_optional(bad)), InputError);
  std::vector<std::vector<Q>> diag{{Q(1, 2), Q(0)}, {Q(0), Q(1, 2)}};
  auto r = cmd_check(in, {}, std::make_optional(diag));
  EXPECT_EQ(r.data["plan_source"], "file");
  EXPECT_TRUE(r.all_pass());
}

TEST(CmdCheck, InfiniteCostPlanFailsWithWitness) {
  auto in = raw({"1/2", "1/2"}, {"1/2", "1/2"}, {{"0", "inf"}, {"inf", "0"}});
  in.plan = std::vector<std::vector<Q>>{{Q(0), Q(1, 2)}, {Q(1, 2), Q(0)}};
  auto r = cmd_check(in);
  EXPECT_EQ(verdict(r, "(1)").witness["reason"], "plan has infinite cost");
  EXPECT_FALSE(verdict(r, "(4)").pass);
}

TEST(CmdCheck, AdversarialTrialsAndStorageWeights) {
  CommandOptions<Q> opt;
  opt.trials = 20;
  opt.z_size = 2;
  opt.lambda = {Q(1, 2)};
  auto r = cmd_check(gen_ap<Q>(3, Q(1), Q(2)), opt);
  EXPECT_TRUE(r.all_pass());
  auto w = verdict(r, "(3) robust").witness;
  EXPECT_EQ(w["adversarial"]["trials"], 20);
  EXPECT_EQ(w["lambda"].size(), 2u);
  opt.lambda = {Q(1), Q(1), Q(1)};
  EXPECT_THROW(cmd_check(gen_ap<Q>(3, Q(1), Q(2)), opt), InputError);
}

TEST(CmdImprove, Trajectories) {
  auto in = zero_diagonal_raw();
  in.plan = std::vector<std::vector<Q>>{{Q(0), Q(1, 2)}, {Q(1, 2), Q(0)}};
  auto r = cmd_improve(in);
  EXPECT_EQ(r.data["trajectory"], Json::parse(R"(["1", "0"])"));

  in.plan = std::vector<std::vector<Q>>{{Q(1, 2), Q(0)}, {Q(0), Q(1, 2)}};
  EXPECT_EQ(cmd_improve(in).data["trajectory"], Json::parse(R"(["0"])"));

  auto ap = gen_ap<Q>(3, Q(1), Q(2));
  ap.plan = cyclic_shift_plan<Q>(3);
  auto a = cmd_improve(ap);
  EXPECT_EQ(a.data["trajectory"], Json::parse(R"(["2", "1"])"));
  EXPECT_TRUE(a.all_pass());

  EXPECT_THROW(cmd_improve(zero_diagonal_raw()), InputError);
}

TEST(CmdImprove, BudgetExhaustedIsAFailVerdict) {
  // Reversal plan under squared distance on six points needs three reroutes.
  RawInstance<Q> in;
  in.mu = in.nu = std::vector<Q>(6, Q(1, 6));
  std::vector<std::vector<Q>> reversal(6, std::vector<Q>(6, Q(0)));
  for (int i = 0; i < 6; ++i) {
    in.cost.emplace_back();
    for (int j = 0; j < 6; ++j) in.cost.back().emplace_back(Q((i - j) * (i - j)));
    reversal[i][5 - i] = Q(1, 6);
  }
  in.plan = reversal;
  CommandOptions<Q> opt;
  opt.max_iters = 1;
  auto r = cmd_improve(in, opt);
  EXPECT_EQ(r.exit_code(), 1);
  EXPECT_EQ(r.verdicts[0].witness["reason"], "iteration budget exhausted");
  EXPECT_EQ(r.data["iterations"], 1);

  auto full = cmd_improve(in);
  EXPECT_TRUE(full.all_pass());
  EXPECT_EQ(full.data["trajectory"], Json::parse(R"(["35/3", "10/3", "1/3", "0"])"));
}

TEST(CmdGen, Examples) {
  GenParams p;
  p.name = "ap";
  p.n = 3;
  auto ap = cmd_gen<Q>(p);
  EXPECT_EQ(ap["cost"], Json::parse(R"([["1","2","inf"],["inf","1","2"],["2","inf","1"]])"));

  p.name = "zero-one";
  p.n = 2;
  auto z = instance_from_json<Q>(cmd_gen<Q>(p));
  ASSERT_EQ(z.mu.size(), 3u);
  EXPECT_TRUE(z.cost[0][1].is_infinite());
  EXPECT_NEAR(ScalarTraits<Q>::to_double(z.cost[1][0].value()), 1 - std::sqrt(0.5), 1e-15);

  p.name = "shift";
  p.n = 4;
  auto s = instance_from_json<Q>(cmd_gen<Q>(p));
  for (const auto& row : s.cost)
    for (const auto& c : row) EXPECT_FALSE(c.is_infinite());
  auto v = solve_exact(validate_instance(s)).value.value();
  EXPECT_GT(v, Q(1));

  p.name = "nope";
  EXPECT_THROW(cmd_gen<Q>(p), InputError);
  p.name = "random";
  p.plan = "diagonal";
  EXPECT_THROW(cmd_gen<Q>(p), InputError);  // random marginals are not uniform
}

TEST(CmdGen, OutputValidatesForAllExamples) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    GenParams p;
    p.name = std::vector<std::string>{"ap", "shift", "zero-one", "random", "blocks"}[trial % 5];
    p.n = 2 + rng() % 6;
    p.seed = rng();
    p.rows = 1 + rng() % 5;
    p.cols = 1 + rng() % 5;
    p.inf_density = (rng() % 5) / 10.0;
    p.blocks = 1 + rng() % 3;
    p.plan = "optimal";
    Json j;
    try {
      j = cmd_gen<Q>(p);
    } catch (const InputError&) {
      continue;  // random instance without a finite plan
    }
    auto r = instance_from_json<Q>(j);
    auto inst = validate_instance(r);
    ASSERT_TRUE(r.plan.has_value());
    require_coupling(inst, TransportPlan<Q>::from_rows(*r.plan), Q(0));
  }
}

TEST(CmdKellerer, Examples) {
  auto two = multi_marginal_from_json<Q>(Json::parse(R"({"weights": [["1/2","1/2"],["1/2","1/2"]], "B": [[0,0]]})"));
  auto r = cmd_kellerer(two);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.data["P"], Json("1/2"));
  EXPECT_EQ(r.data["L"], Json("1/2"));
  EXPECT_EQ(verdict(r, "P = L").pass, true);

  auto three = multi_marginal_from_json<Q>(Json::parse(
      R"({"weights": [["1/2","1/2"],["1/2","1/2"],["1/2","1/2"]], "B": [[1,0,0],[0,1,0],[0,0,1]]})"));
  auto t = cmd_kellerer(three);
  EXPECT_TRUE(t.all_pass());
  EXPECT_EQ(t.data["P"], Json("3/4"));
  EXPECT_EQ(t.data["L"], Json("1"));

  auto null = multi_marginal_from_json<Q>(Json::parse(R"({"weights": [[1, 0],[1]], "B": [[1,0]]})"));
  auto n = cmd_kellerer(null);
  EXPECT_EQ(n.data["classification"], "L-shaped null");
  EXPECT_EQ(n.data["L"], Json("0"));
}

TEST(CommandProperties, CheckVerdictsRespectImplications) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    RandomParams rp;
    rp.rows = 2 + rng() % 3;
    rp.cols = 2 + rng() % 3;
    rp.seed = rng();
    rp.inf_density = trial % 2 ? 0.3 : 0.0;
    auto in = gen_random<Q>(rp);
    auto inst = validate_instance(in);
    if (!solve_exact(inst).feasible) continue;
    auto plan = random_vertex_plan(inst, rng);
    std::vector<std::vector<Q>> rows(plan.rows(), std::vector<Q>(plan.cols()));
    for (std::size_t i = 0; i < plan.rows(); ++i)
      for (std::size_t j = 0; j < plan.cols(); ++j) rows[i][j] = plan(i, j);
    auto r = cmd_check(in, {}, std::make_optional(rows));
    for (const char* p : {"(3) <=>", "(3) =>", "(1) <=>"}) EXPECT_TRUE(verdict(r, p).pass) << p << " trial " << trial;
    for (const auto& v : r.verdicts) {
      if (!v.pass) {
        EXPECT_FALSE(v.witness.is_null());
      }
    }
  }
}

TEST(CommandProperties, FloatModeMatchesRational) {
  auto q = cmd_solve(gen_ap<Q>(5, Q(2), Q(1)));
  auto d = cmd_solve(gen_ap<double>(5, 2.0, 1.0));
  EXPECT_NEAR(d.data["value"].get<double>(), 1.0, 1e-9);
  EXPECT_EQ(q.data["value"], Json("1"));
  auto c = cmd_check(gen_ap<double>(5, 1.0, 2.0));
  EXPECT_TRUE(c.all_pass());
}

}  // namespace
}  // namespace otcert
