#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace parakin {

// Exit codes: 0 ok/feasible, 1 usage, 2 config or file parsing, 3 infeasible
// verdict, 4 internal failure.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace parakin
