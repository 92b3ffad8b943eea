#pragma once

namespace locorank {

// Exit codes: 0 success, 1 validation failure, 2 pipeline or usage error.
int run_cli(int argc, char** argv);

}  // namespace locorank
