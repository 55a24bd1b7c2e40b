// Command reports: verdicts with witnesses, per-stage timings, and payload.
#pragma once

#include "otcert/io.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace otcert {

struct Verdict {
  std::string claim;
  bool pass = false;
  Json witness;  // required when pass is false
};

struct Report {
  explicit Report(std::string name) : command(std::move(name)) {}

  std::string command;
  std::vector<Verdict> verdicts;
  std::vector<std::pair<std::string, double>> timings;  // milliseconds
  Json data = Json::object();

  void add(std::string claim, bool pass, Json witness = nullptr) {
    if (!pass && witness.is_null()) witness = Json{{"reason", "failed"}};
    verdicts.push_back({std::move(claim), pass, std::move(witness)});
  }

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }

  int exit_code() const { return all_pass() ? 0 : 1; }

  Json to_json() const {
    Json vs = Json::array();
    for (const auto& v : verdicts) {
      Json e{{"claim", v.claim}, {"pass", v.pass}};
      if (!v.witness.is_null()) e["witness"] = v.witness;
      vs.push_back(std::move(e));
    }
    Json ts = Json::object();
    for (const auto& [stage, ms] : timings) ts[stage] = ms;
    return {{"command", command}, {"pass", all_pass()}, {"verdicts", vs}, {"timings_ms", ts}, {"data", data}};
  }

  std::string to_text() const {
    std::string out = command + ": " + (all_pass() ? "PASS" : "FAIL") + "\n";
    for (const auto& v : verdicts) {
      out += std::string("  [") + (v.pass ? "pass" : "FAIL") + "] " + v.claim;
      if (!v.witness.is_null() && (!v.pass || v.witness.dump().size() <= 100))
        out += "  " + v.witness.dump();
      out += "\n";
    }
    for (const auto& [key, value] : data.items()) out += "  " + key + ": " + value.dump() + "\n";
    if (!timings.empty()) {
      out += "  timings:";
      for (const auto& [stage, ms] : timings) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %s %.3f ms", stage.c_str(), ms);
        out += buf;
      }
      out += "\n";
    }
    return out;
  }
};

/// Records the wall time of a stage into a report.
class StageTimer {
 public:
  StageTimer(Report& report, std::string stage)
      : report_(report), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    std::chrono::duration<double, std::milli> d = std::chrono::steady_clock::now() - start_;
    report_.timings.emplace_back(stage_, d.count());
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  Report& report_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace otcert
