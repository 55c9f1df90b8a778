#include "commands.hpp"

#include "semigraph/checks.hpp"
#include "semigraph/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>

namespace sgapprox {

using namespace semigraph;

namespace {

Rational rational_flag(const std::string& text, const char* flag, bool positive) {
  Rational r;
  try {
    r = parse_rational(text);
  } catch (const ParseError& e) {
    throw CLI::ValidationError(flag, e.what());
  }
  if (positive && !(r > 0)) throw CLI::ValidationError(flag, "must be a positive rational, got '" + text + "'");
  return r;
}

bool write_to(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  out << body;
  return static_cast<bool>(out);
}

}  // namespace

int cmd_approximate(const Common& c, const ApproximateOptions& opt) {
  Rational eps = rational_flag(c.epsilon, "--epsilon", true);
  Rational window = rational_flag(c.window, "--window", false);
  GraphFixture fx = parse_fixture(c.fixture);
  if (fx.has_rays() && !(window > 0)) throw CLI::ValidationError("--window", "the fixture has rays; give R > 0");
  if (opt.outs.size() > 1 && opt.prefix.empty())
    throw CLI::ValidationError("--prefix", "several --out formats need a --prefix for the files");

  Fuel fuel(c.fuel);
  auto rep = approximate_graph(fx, eps, fuel, window);
  if (!rep) {
    nlohmann::ordered_json t;
    t["status"] = "timeout";
    t["fixture"] = fx.name;
    t["stage"] = rep.stage();
    t["fuel"] = fuel.used();
    std::cerr << "TIMEOUT at " << rep.stage() << "\n";
    write_to(opt.prefix.empty() ? "-" : opt.prefix + ".json", t.dump(2) + "\n");
    return 3;
  }
  for (const auto& fmt : opt.outs) {
    std::string body;
    if (fmt == "json") {
      nlohmann::ordered_json j;
      j["status"] = "ok";
      j.update(report_json(*rep, fx, opt.precision));
      body = j.dump(2) + "\n";
    } else if (fmt == "svg") {
      body = report_svg(*rep, fx, opt.precision);
    } else {
      body = report_csv(*rep, opt.precision);
    }
    std::string path = opt.prefix.empty() ? "-" : opt.prefix + "." + fmt;
    if (!write_to(path, body)) {
      std::cerr << "cannot write " << path << "\n";
      return 2;
    }
  }
  return rep->certified ? 0 : 1;
}

int cmd_check(const Common& c, const CheckOptions& opt) {
  semigraph::CheckOptions run;
  run.eps = rational_flag(c.epsilon, "--epsilon", true);
  run.fuel = c.fuel;
  run.stages = opt.stages;
  run.samples = opt.samples;
  run.seed = opt.seed;
  Rational window = rational_flag(c.window, "--window", false);
  if (window > 0) run.window = window;
  if (std::find(suite_names().begin(), suite_names().end(), opt.suite) == suite_names().end())
    throw CLI::ValidationError("--suite", "unknown suite '" + opt.suite + "' (formal, chains, sets, approx, all)");
  GraphFixture fx = parse_fixture(c.fixture);
  auto results = run_suite(fx, opt.suite, run);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed;
  if (opt.json) {
    nlohmann::ordered_json j;
    j["fixture"] = fx.name;
    j["suite"] = opt.suite;
    j["passed"] = ok;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : results)
      arr.push_back({{"suite", r.suite}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    j["checks"] = arr;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << format_results(results);
    std::cout << (ok ? "ALL PASSED" : "FAILURES") << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace sgapprox
