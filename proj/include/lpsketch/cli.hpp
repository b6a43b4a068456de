#pragma once

#include <iosfwd>

namespace lpsketch {

/// Entry point of the `lpsketch` tool. Returns the process exit status:
/// 0 success, 2 usage error, 3 data error, 4 incompatibility error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lpsketch
