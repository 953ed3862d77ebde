#ifndef OCD_CLI_H_
#define OCD_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace ocd {

// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;   // bad flags or configuration
inline constexpr int kExitIo = 3;      // unreadable / malformed / empty input
inline constexpr int kExitDomain = 4;  // parameter outside its valid range

// Runs one invocation: args[0] is the program name, args[1] the subcommand
// (bounds, synth, train, threshold, score, experiment, cv, sweep).
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace ocd

#endif  // OCD_CLI_H_
