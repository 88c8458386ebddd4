#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pags::cli {

/// Runs one `pags` invocation. `args` excludes the program name. Returns the
/// process exit code: 0 holds/related/feasible, 1 fails/unrelated/infeasible,
/// 2 unknown/deferred, 3 usage or model error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pags::cli
