#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace corefmeter {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on usage or input errors and 2 on internal invariant violations.
/// Reports go to `out` unless written to a file; logs go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace corefmeter
