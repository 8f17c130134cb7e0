#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdloss {

// Runs one `fdloss` subcommand and returns the process exit code:
// 0 success, 1 usage error, 2 data or format error, 3 numerical or I/O failure.
// `args` excludes the program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace fdloss
