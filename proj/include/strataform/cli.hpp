#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace strataform {
namespace io {

// Dispatches one CLI invocation. Exit status: 0 success, 1 verification
// failure (failed identities, flagged residuals), 2 input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace io
}  // namespace strataform
