#ifndef BITEXT_CLI_HPP
#define BITEXT_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace bitext::cli {

// Parses and executes one command line (program name excluded; e.g.
// {"train", "--src", ...}). All normal output goes to `out`, diagnostics to
// `err`. Returns the process exit code: 0 success, 1 runtime failure,
// 2 usage or configuration error.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace bitext::cli

#endif  // BITEXT_CLI_HPP
