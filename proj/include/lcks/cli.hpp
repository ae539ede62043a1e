#pragma once

#include <string>
#include <vector>

namespace lcks {

// Command-line entry point.  Exit codes: 0 all checks pass, 1 a check
// failed, 2 input error (bad flags, unreadable problem file, parse errors,
// non-closed Lee form).
int run_cli(const std::vector<std::string>& args);

}  // namespace lcks
