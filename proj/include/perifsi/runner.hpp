#ifndef PERIFSI_RUNNER_HPP
#define PERIFSI_RUNNER_HPP

#include <string>
#include <vector>

#include "perifsi/scenarios.hpp"

namespace perifsi {

struct RunOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::string level;                   // optional level override
  long max_steps = -1;                 // >= 0 caps the step count
  bool seed_check = false;             // run twice, compare probe bytes
  std::vector<std::string> overrides;  // dotted key=value config edits
};

// Exit codes the CLI maps errors onto.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

// Loads the config (with level/--set edits applied), runs the scenario to its
// end time, and writes probes, field snapshots, and the manifest. Errors are
// reported on stderr and mapped to the exit codes above.
int run(const RunOptions& opts);

// The effective spec after overrides, exposed for tests.
ProblemSpec effective_spec(const RunOptions& opts);

}  // namespace perifsi

#endif
