#pragma once

// Subcommands of sgapprox. Each returns the process exit code:
// 0 success, 1 failed check or certificate, 2 usage error, 3 TIMEOUT,
// 4 invalid fixture. Usage errors are thrown as CLI::ValidationError.

#include <cstdint>
#include <string>
#include <vector>

namespace sgapprox {

struct Common {
  std::string fixture;
  std::string epsilon = "1/16";
  std::uint64_t fuel = 20'000'000'000ull;
  std::string window = "0";
};

struct ApproximateOptions {
  unsigned precision = 10;
  std::vector<std::string> outs{"json"};
  std::string prefix;
};

struct CheckOptions {
  std::string suite = "all";
  unsigned stages = 4;
  unsigned samples = 200;
  std::uint64_t seed = 20240601;
  bool json = false;
};

int cmd_approximate(const Common& c, const ApproximateOptions& opt);
int cmd_check(const Common& c, const CheckOptions& opt);

}  // namespace sgapprox
