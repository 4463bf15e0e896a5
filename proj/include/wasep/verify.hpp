#pragma once

// Identity and invariant checks of the deterministic modules, grouped in
// suites for the command line driver.

#include <string>
#include <vector>

namespace wasep::verify {

struct Check {
  std::string id;
  double computed = 0;
  double target = 0;  // exact value, or 0 for pure bounds
  double error = 0;   // |computed - target|, or the quantity that is bounded
  double bound = 0;   // pass iff error <= bound
  bool pass = false;
};

struct Report {
  std::string suite;
  std::vector<Check> checks;
  bool pass() const;
};

// Suite names accepted by run().
const std::vector<std::string>& suite_names();

// Throws std::invalid_argument for an unknown suite. n is the lattice size
// for the renormalisation identities (0 means the default set 2, 12, 62, 312).
Report run(const std::string& suite, int n = 0);

Report kernels();
Report renorm(int n = 0);
Report regstruct();
Report extension();

}  // namespace wasep::verify
