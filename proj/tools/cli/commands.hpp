#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cola::cli {

/// Entry point behind `cola`. Returns 0 on success, 1 on a runtime failure
/// and 2 on a usage error. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cola::cli
