#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gexp::cli {

/// Exit codes: 0 success, 1 internal failure (or a failed check), 2 bad configuration.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gexp::cli
