// sgapprox: approximate a fixture graph by a computable subgraph, or run the
// property suites against it.
//
// Exit codes: 0 success, 1 failed check or certificate, 2 usage error,
// 3 TIMEOUT, 4 invalid fixture.

#include "commands.hpp"

#include "semigraph/chains.hpp"
#include "semigraph/fixture.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace sgapprox;
  CLI::App app{"Approximate semicomputable graphs by computable subgraphs"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--fixture", common.fixture, "fixture json")->required()->check(CLI::ExistingFile);
    sub->add_option("--epsilon", common.epsilon, "closeness bound, a positive rational p/q")->capture_default_str();
    sub->add_option("--fuel", common.fuel, "fuel budget")->capture_default_str();
    sub->add_option("--window", common.window, "half-width R of the window [-R, R]^n for rays")->capture_default_str();
  };

  auto* approx = app.add_subcommand("approximate", "run the graph approximation");
  add_common(approx);
  ApproximateOptions aopt;
  approx->add_option("--precision", aopt.precision, "endpoint precision K (approximations within 2^-K)")
      ->capture_default_str();
  approx->add_option("--out", aopt.outs, "output formats")
      ->check(CLI::IsMember({"json", "svg", "csv"}))
      ->capture_default_str();
  approx->add_option("--prefix", aopt.prefix, "write PREFIX.<format> instead of stdout");

  auto* check = app.add_subcommand("check", "run property suites against the fixture");
  add_common(check);
  CheckOptions copt;
  std::string check_out = "text";
  check->add_option("--suite", copt.suite, "formal, chains, sets, approx or all")->capture_default_str();
  check->add_option("--stages", copt.stages, "chain stages examined")->capture_default_str();
  check->add_option("--samples", copt.samples, "random queries per property")->capture_default_str();
  check->add_option("--seed", copt.seed, "random seed")->capture_default_str();
  check->add_option("--out", check_out, "text or json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

  try {
    app.parse(argc, argv);
    if (approx->parsed()) return cmd_approximate(common, aopt);
    copt.json = check_out == "json";
    return cmd_check(common, copt);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const semigraph::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const semigraph::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
