#pragma once

#include "canhmm/config.hpp"

namespace canhmm {

// Exit codes shared by the commands and the CLI:
//   0  success (for detect: no alerts; for evaluate: every row as expected)
//   1  runtime failure
//   2  configuration error
//   3  detect only: alerts were emitted
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAlerts = 3;

int cmd_train(const RunConfig& config);
int cmd_detect(const RunConfig& config);
int cmd_evaluate(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_inject(const RunConfig& config);
int cmd_inspect_model(const RunConfig& config);

}  // namespace canhmm
