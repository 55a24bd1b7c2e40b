// The subcommands behind the otcert tool. Each takes parsed input and
// returns a Report, so tests can drive them without a process boundary.
#pragma once

#include "otcert/connectivity.hpp"
#include "otcert/generators.hpp"
#include "otcert/io.hpp"
#include "otcert/kellerer.hpp"
#include "otcert/monotonicity.hpp"
#include "otcert/potentials.hpp"
#include "otcert/report.hpp"
#include "otcert/robustness.hpp"
#include "otcert/solver.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace otcert {

template <class T>
struct CommandOptions {
  T tolerance = ScalarTraits<T>::default_tolerance();
  T threshold = ScalarTraits<T>::default_support_threshold();
  std::size_t max_iters = 0;
  std::size_t z_size = 1;
  std::vector<T> lambda{T(1)};  // a single value is used for every storage point
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  std::vector<T> storage_weights() const {
    if (lambda.size() == z_size) return lambda;
    if (lambda.size() == 1) return std::vector<T>(z_size, lambda.front());
    throw InputError("--lambda needs one value or one per storage point");
  }
};

namespace detail {

template <class T>
Instance<T> load_validated(const RawInstance<T>& raw, const CommandOptions<T>& opt, Report& r) {
  StageTimer t(r, "validate");
  // Validation normalizes marginals within a small absolute tolerance even
  // in exact mode, so hand-written decimals such as 0.333 are accepted.
  const T weight_tol = opt.tolerance == T(0) ? ScalarTraits<T>::parse("1e-9") : opt.tolerance;
  return validate_instance(raw, weight_tol);
}

template <class T>
TransportPlan<T> checked_plan(const Instance<T>& inst, const std::vector<std::vector<T>>& rows,
                              const CommandOptions<T>& opt) {
  auto plan = TransportPlan<T>::from_rows(rows);
  require_coupling(inst, plan, opt.tolerance);
  return plan;
}

template <class T>
Json gap_witness(const OptimalityCheck<T>& c) {
  return {{"gap", scalar_to_json(c.gap)},
          {"plan_cost", scalar_to_json(c.plan_cost)},
          {"optimum", scalar_to_json(c.optimum)}};
}

template <class T>
Json certificate_witness(const StrongCertificate<T>& c) {
  Json w{{"status", to_string(c.status)}};
  if (c.violation) w.update(cycle_to_json(*c.violation));
  if (c.blocking)
    w["blocking"] = {{"pair", pair_to_json(c.blocking->pair)},
                     {"source_class", c.blocking->source_class},
                     {"target_class", c.blocking->target_class},
                     {"bound", scalar_to_json(c.blocking->bound)}};
  if (c.verification && !c.verification->pass) {
    w["inequality_violations"] = pairs_to_json(c.verification->inequality_violations);
    w["equality_violations"] = pairs_to_json(c.verification->equality_violations);
  }
  return w;
}

}  // namespace detail

template <class T>
Report cmd_solve(const RawInstance<T>& raw, const CommandOptions<T>& opt = {}) {
  Report r{"solve"};
  auto inst = detail::load_validated(raw, opt, r);
  OptimalResult<T> best;
  {
    StageTimer t(r, "solve");
    best = solve_exact(inst, opt.tolerance);
  }
  if (!best.feasible) {
    r.add("finite plan exists", false, {{"reason", "no finite plan"}});
    r.data["value"] = "inf";
    return r;
  }
  r.add("finite plan exists", true);
  r.data["value"] = scalar_to_json(best.value.value());
  r.data["plan"] = rows_to_json(best.plan.mass());
  return r;
}

/// Runs the four plan predicates and the implications between them. The
/// plan comes from `plan_rows`, else the instance's own "plan", else the
/// solver.
template <class T>
Report cmd_check(const RawInstance<T>& raw, const CommandOptions<T>& opt = {},
                 const std::optional<std::vector<std::vector<T>>>& plan_rows = std::nullopt) {
  Report r{"check"};
  auto inst = detail::load_validated(raw, opt, r);
  TransportPlan<T> plan;
  if (plan_rows || raw.plan) {
    plan = detail::checked_plan(inst, plan_rows ? *plan_rows : *raw.plan, opt);
    r.data["plan_source"] = plan_rows ? "file" : "inline";
  } else {
    StageTimer t(r, "solve");
    auto best = solve_exact(inst, opt.tolerance);
    if (!best.feasible) {
      r.add("finite plan exists", false, {{"reason", "no finite plan"}});
      return r;
    }
    plan = best.plan;
    r.data["plan_source"] = "solver";
  }
  r.data["support_threshold"] = scalar_to_json(opt.threshold);
  const auto z = opt.z_size;
  const auto lambda = opt.storage_weights();
  const std::string robust_claim = "(3) robustly optimal (defense, z=" + std::to_string(z) + ")";
  auto cost = total_cost(inst, plan);
  if (cost.is_infinite()) {
    Json why{{"reason", "plan has infinite cost"}};
    for (const char* claim : {"(1) optimal", "(2) c-monotone"}) r.add(claim, false, why);
    r.add(robust_claim, false, why);
    r.add("(4) strongly c-monotone", false, why);
    r.add("(3) <=> (4)", true);
    r.add("(3) => (1)", true);
    r.add("(1) <=> (2)", true);
    return r;
  }
  r.data["plan_cost"] = scalar_to_json(cost.value());

  bool p1, p2, p3, p4;
  {
    StageTimer t(r, "optimal");
    auto c = is_optimal(inst, plan, opt.tolerance);
    p1 = c.optimal;
    r.add("(1) optimal", p1, p1 ? Json(nullptr) : detail::gap_witness(c));
  }
  {
    StageTimer t(r, "c-monotone");
    auto m = check_c_monotone(inst, plan, opt.tolerance, opt.threshold);
    p2 = m.ok();
    r.add("(2) c-monotone", p2, p2 ? Json(nullptr) : cycle_to_json(*m.violation));
  }
  {
    StageTimer t(r, "robust");
    auto d = check_robust_defense(inst, plan, z, lambda, opt.tolerance, opt.threshold);
    Json w{{"z_size", z}};
    w["lambda"] = Json::array();
    for (const T& v : lambda) w["lambda"].push_back(scalar_to_json(v));
    if (!d.error.empty()) {
      w["reason"] = d.error;
    } else {
      w["gap"] = scalar_to_json(d.gap);
    }
    p3 = d.defended;
    if (opt.trials > 0) {
      auto adv = adversarial_search(inst, plan, z, lambda, opt.trials, opt.seed, opt.tolerance, opt.threshold);
      w["adversarial"] = {{"trials", adv.trials},
                          {"seed", adv.seed},
                          {"mode", to_string(adv.mode)},
                          {"best_improvement", adv.best_improvement ? scalar_to_json(*adv.best_improvement) : Json(nullptr)}};
      p3 = p3 && !adv.improvement_found(opt.tolerance);
    }
    r.add(robust_claim, p3, w);
  }
  {
    StageTimer t(r, "strong");
    auto cert = certify_strong(inst, plan, opt.tolerance, opt.threshold);
    p4 = cert.certified();
    r.add("(4) strongly c-monotone", p4,
          p4 ? potentials_to_json(*cert.potentials) : detail::certificate_witness(cert));
    if (!cert.decomposition.nodes.empty()) r.data["classes"] = decomposition_to_json(cert.decomposition);
  }
  auto flags = [&] { return Json{{"1", p1}, {"2", p2}, {"3", p3}, {"4", p4}}; };
  r.add("(3) <=> (4)", p3 == p4, p3 == p4 ? Json(nullptr) : flags());
  r.add("(3) => (1)", !p3 || p1, !p3 || p1 ? Json(nullptr) : flags());
  r.add("(1) <=> (2)", p1 == p2, p1 == p2 ? Json(nullptr) : flags());
  return r;
}

template <class T>
Report cmd_improve(const RawInstance<T>& raw, const CommandOptions<T>& opt = {},
                   const std::optional<std::vector<std::vector<T>>>& plan_rows = std::nullopt) {
  Report r{"improve"};
  auto inst = detail::load_validated(raw, opt, r);
  if (!plan_rows && !raw.plan) throw InputError("improve needs a plan (inline \"plan\" or --plan)");
  auto plan = detail::checked_plan(inst, plan_rows ? *plan_rows : *raw.plan, opt);
  ImproveResult<T> res;
  {
    StageTimer t(r, "improve");
    res = improve_to_monotone(inst, plan, opt.max_iters, opt.tolerance, opt.threshold);
  }
  Json trajectory = Json::array();
  for (const T& c : res.cost_trajectory) trajectory.push_back(scalar_to_json(c));
  r.add("reached a c-monotone plan", res.converged,
        res.converged ? Json(nullptr) : Json{{"reason", "iteration budget exhausted"}, {"iterations", res.iterations}});
  r.data["support_threshold"] = scalar_to_json(opt.threshold);
  r.data["iterations"] = res.iterations;
  r.data["trajectory"] = trajectory;
  r.data["plan"] = rows_to_json(res.plan.mass());
  return r;
}

struct GenParams {
  std::string name;
  std::size_t n = 4;
  std::string a = "1";
  std::string b = "2";
  std::uint64_t seed = 0;
  std::size_t rows = 3;
  std::size_t cols = 3;
  double inf_density = 0.0;
  bool uniform = false;
  int max_cost = 9;
  int max_denominator = 1;
  std::size_t blocks = 2;
  std::string plan;  // "", "diagonal", "shift" or "optimal"
};

template <class T>
Json cmd_gen(const GenParams& p) {
  RawInstance<T> raw;
  if (p.name == "ap") {
    raw = gen_ap<T>(p.n, ScalarTraits<T>::parse(p.a), ScalarTraits<T>::parse(p.b));
  } else if (p.name == "shift") {
    raw = gen_shift<T>(p.n);
  } else if (p.name == "zero-one") {
    raw = gen_zero_one<T>(p.n);
  } else if (p.name == "random") {
    raw = gen_random<T>({p.rows, p.cols, p.seed, p.inf_density, p.uniform, p.max_cost, p.max_denominator});
  } else if (p.name == "blocks") {
    raw = gen_blocks<T>(p.blocks, p.seed);
  } else {
    throw InputError("unknown example '" + p.name + "' (ap, shift, zero-one, random, blocks)");
  }
  if (p.plan == "diagonal" || p.plan == "shift") {
    if (raw.mu.size() != raw.nu.size()) throw InputError("--plan " + p.plan + " needs a square instance");
    for (std::size_t i = 1; i < raw.mu.size(); ++i)
      if (raw.mu[i] != raw.mu[0] || raw.nu[i] != raw.mu[0])
        throw InputError("--plan " + p.plan + " needs uniform marginals");
    raw.plan = p.plan == "diagonal" ? diagonal_plan<T>(raw.mu.size()) : cyclic_shift_plan<T>(raw.mu.size());
  } else if (p.plan == "optimal") {
    auto best = solve_exact(validate_instance(raw));
    if (!best.feasible) throw InputError("instance has no finite plan");
    std::vector<std::vector<T>> rows(raw.mu.size(), std::vector<T>(raw.nu.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j) rows[i][j] = best.plan(i, j);
    raw.plan = rows;
  } else if (!p.plan.empty()) {
    throw InputError("unknown plan '" + p.plan + "' (diagonal, shift, optimal)");
  }
  return instance_to_json(raw);
}

template <class T>
Report cmd_kellerer(const MultiMarginalInstance<T>& mmi, const CommandOptions<T>& opt = {}) {
  Report r{"kellerer"};
  DichotomyReport<T> d;
  {
    StageTimer t(r, "dichotomy");
    d = check_dichotomy(mmi, opt.tolerance);
  }
  const std::size_t n = mmi.spaces();
  Json values{{"P", scalar_to_json(d.p)}, {"n", n}};
  if (d.l) values["L"] = scalar_to_json(*d.l);
  else values["rounded_cover"] = scalar_to_json(d.rounded_cover);
  r.add(d.l ? "P >= L / n" : "P >= (rounded cover) / n", d.lower_bound, d.lower_bound ? Json(nullptr) : values);
  r.add(d.l ? "P <= L" : "P <= rounded cover", d.upper_bound, d.upper_bound ? Json(nullptr) : values);
  if (d.two_space_equality)
    r.add("P = L (two spaces)", *d.two_space_equality, *d.two_space_equality ? Json(nullptr) : values);
  r.add("relaxed cover value = P", d.duality,
        d.duality ? Json(nullptr) : Json{{"P", scalar_to_json(d.p)}, {"relaxed", scalar_to_json(d.relaxed)}});

  r.data["P"] = scalar_to_json(d.p);
  r.data["L"] = d.l ? scalar_to_json(*d.l) : Json(nullptr);
  r.data["relaxed_cover"] = scalar_to_json(d.relaxed);
  r.data["rounded_cover"] = scalar_to_json(d.rounded_cover);
  r.data["classification"] = d.l_shaped_null ? "L-shaped null" : "positive coupling mass";
  if (d.cover) r.data["cover"] = d.cover->cover;
  Json coupling = Json::array();
  for (const auto& [tuple, mass] : d.coupling.coupling)
    coupling.push_back({{"tuple", tuple}, {"mass", scalar_to_json(mass)}});
  r.data["coupling"] = coupling;
  return r;
}

/// *.json files of a directory in name order.
inline std::vector<std::filesystem::path> batch_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace otcert
