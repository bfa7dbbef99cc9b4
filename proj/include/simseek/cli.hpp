#pragma once

#include <iosfwd>

namespace simseek {

/// Entry point of the simseek command line. Returns 0 on success, 1 on
/// runtime or I/O failure and 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace simseek
