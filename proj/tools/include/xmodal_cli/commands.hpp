#ifndef XMODAL_CLI_COMMANDS_HPP
#define XMODAL_CLI_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace xmodal::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsageError = 2,
  kNumericalError = 3,
};

/// Entry point behind the `xmodal` binary. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xmodal::cli

#endif  // XMODAL_CLI_COMMANDS_HPP
