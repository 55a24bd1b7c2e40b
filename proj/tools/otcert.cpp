// otcert: certify optimality properties of discrete transport plans.
//
// Exit codes: 0 when every verdict passes, 1 when some verdict fails,
// 2 on bad input.

#include "otcert/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using otcert::InputError;
using otcert::Json;
using otcert::Report;

struct Args {
  std::string command;
  std::string input;
  std::string plan_path;
  std::string batch_dir;
  std::string output;
  std::string tolerance;
  bool float_mode = false;
  bool json = false;
  std::uint64_t seed = 0;
  std::size_t max_iters = 0;
  std::size_t z_size = 1;
  std::vector<std::string> lambda{"1"};
  std::size_t trials = 0;
  otcert::GenParams gen;
};

template <class T>
otcert::CommandOptions<T> options_from(const Args& a) {
  otcert::CommandOptions<T> o;
  if (!a.tolerance.empty()) {
    o.tolerance = otcert::ScalarTraits<T>::parse(a.tolerance);
    if (o.tolerance < T(0)) throw InputError("--tolerance must be nonnegative");
  }
  o.seed = a.seed;
  o.max_iters = a.max_iters;
  o.z_size = a.z_size;
  o.trials = a.trials;
  o.lambda.clear();
  for (const auto& s : a.lambda) {
    T v = otcert::ScalarTraits<T>::parse(s);
    if (v < T(0)) throw InputError("--lambda values must be nonnegative");
    o.lambda.push_back(v);
  }
  o.storage_weights();  // rejects a mismatched list early
  return o;
}

template <class T>
Report run_file(const Args& a, const otcert::CommandOptions<T>& opt, const std::string& path) {
  Json j = otcert::read_json_file(path);
  if (a.command == "kellerer")
    return otcert::cmd_kellerer(otcert::multi_marginal_from_json<T>(j), opt);
  auto raw = otcert::instance_from_json<T>(j);
  std::optional<std::vector<std::vector<T>>> plan;
  if (!a.plan_path.empty()) plan = otcert::plan_from_json<T>(otcert::read_json_file(a.plan_path));
  if (a.command == "solve") return otcert::cmd_solve(raw, opt);
  if (a.command == "check") return otcert::cmd_check(raw, opt, plan);
  return otcert::cmd_improve(raw, opt, plan);
}

void emit(const Args& a, const std::string& text) {
  if (a.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(a.output);
  if (!out) throw InputError("cannot write " + a.output);
  out << text;
}

template <class T>
int run(const Args& a) {
  if (a.command == "gen") {
    otcert::GenParams p = a.gen;
    p.seed = a.seed;
    emit(a, otcert::cmd_gen<T>(p).dump(2) + "\n");
    return 0;
  }
  const auto opt = options_from<T>(a);
  if (a.batch_dir.empty()) {
    if (a.input.empty()) throw InputError(a.command + " needs an input file or --batch");
    Report r = run_file<T>(a, opt, a.input);
    emit(a, a.json ? r.to_json().dump(2) + "\n" : r.to_text());
    return r.exit_code();
  }

  // One task per file; a file that fails to load gets an error entry
  // instead of aborting the batch.
  struct Outcome {
    std::string file;
    std::optional<Report> report;
    std::string error;
  };
  auto files = otcert::batch_files(a.batch_dir);
  std::vector<std::future<Outcome>> tasks;
  for (const auto& f : files)
    tasks.push_back(std::async(std::launch::async, [&a, &opt, f] {
      Outcome o{f.filename().string(), std::nullopt, {}};
      try {
        o.report = run_file<T>(a, opt, f.string());
      } catch (const InputError& e) {
        o.error = e.what();
      }
      return o;
    }));
  int code = 0;
  Json all = Json::array();
  std::string text;
  for (auto& t : tasks) {
    Outcome o = t.get();
    if (o.report) {
      code = std::max(code, o.report->exit_code());
      all.push_back({{"file", o.file}, {"report", o.report->to_json()}});
      text += "== " + o.file + "\n" + o.report->to_text();
    } else {
      code = 2;
      all.push_back({{"file", o.file}, {"error", o.error}});
      text += "== " + o.file + "\nerror: " + o.error + "\n";
    }
  }
  emit(a, a.json ? all.dump(2) + "\n" : text);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify optimality, c-cyclical monotonicity, strong c-monotonicity and robust optimality of "
               "discrete transport plans"};
  app.require_subcommand(1);
  app.fallthrough();
  Args a;
  app.add_option("--tolerance", a.tolerance, "Comparison tolerance (default 0 exact, 1e-9 float)");
  auto* rational = app.add_flag("--rational", "Exact rational arithmetic (default)");
  app.add_flag("--float", a.float_mode, "Double precision arithmetic")->excludes(rational);
  app.add_option("--seed", a.seed, "Seed for generators and adversarial search");
  app.add_flag("--json", a.json, "Emit JSON instead of text");
  app.add_option("--max-iters", a.max_iters, "Improvement budget (0 = |support|^3)");
  app.add_option("--z-size", a.z_size, "Number of storage points")->check(CLI::PositiveNumber);
  app.add_option("--lambda", a.lambda, "Storage weights: one value, or one per storage point")->expected(1, -1);
  app.add_option("--trials", a.trials, "Adversarial toll trials for check (0 = defense only)");
  app.add_option("--batch", a.batch_dir, "Run every *.json file of a directory in parallel");
  app.add_option("-o,--output", a.output, "Write the report to a file");

  auto* solve = app.add_subcommand("solve", "Solve an instance exactly");
  auto* check = app.add_subcommand("check", "Check a plan against the four optimality properties");
  auto* improve = app.add_subcommand("improve", "Reroute violating cycles until the plan is c-monotone");
  auto* gen = app.add_subcommand("gen", "Generate an example instance");
  auto* kellerer = app.add_subcommand("kellerer", "Compare coupling mass with cover weight on a multi-marginal set");
  for (auto* sub : {solve, check, improve, kellerer}) sub->add_option("input", a.input, "Instance JSON file");
  for (auto* sub : {check, improve}) sub->add_option("--plan", a.plan_path, "Plan JSON file");

  gen->add_option("example", a.gen.name, "ap, shift, zero-one, random or blocks")
      ->required()
      ->check(CLI::IsMember({"ap", "shift", "zero-one", "random", "blocks"}));
  gen->add_option("-N,--n", a.gen.n, "Grid or group size");
  gen->add_option("--a", a.gen.a, "ap: diagonal cost");
  gen->add_option("--b", a.gen.b, "ap: off-diagonal cost");
  gen->add_option("--rows", a.gen.rows, "random: number of sources");
  gen->add_option("--cols", a.gen.cols, "random: number of targets");
  gen->add_option("--inf-density", a.gen.inf_density, "random: fraction of infinite entries")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_flag("--uniform", a.gen.uniform, "random: uniform marginals");
  gen->add_option("--max-cost", a.gen.max_cost, "random: cost numerators in [0, max]");
  gen->add_option("--max-denominator", a.gen.max_denominator, "random: cost denominators in [1, max]");
  gen->add_option("--blocks", a.gen.blocks, "blocks: number of classes");
  gen->add_option("--plan", a.gen.plan, "Attach a plan: diagonal, shift or optimal")
      ->check(CLI::IsMember({"diagonal", "shift", "optimal"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  a.command = app.get_subcommands().front()->get_name();

  try {
    return a.float_mode ? run<double>(a) : run<otcert::Rational>(a);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
