#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ecobounds/json_io.hpp"

namespace ecobounds::cli {

// Entry point shared by the executable and the tests. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a of the command, the canonical config and the tool version, as hex.
std::string fingerprint(const std::string& command, const Json& config);

}  // namespace ecobounds::cli
