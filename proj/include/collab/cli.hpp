#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace collab::cli {

/// Exit codes: 0 success, 1 internal error, 2 usage or configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Column order of `sweep` output.
const std::vector<std::string>& sweep_columns();

}  // namespace collab::cli
