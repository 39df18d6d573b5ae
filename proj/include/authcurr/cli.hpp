#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace authcurr {

// Flat `key = value` file. '#' starts a comment; blank lines are skipped.
// Keys may use '_' or '-'; they are returned with '-'.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Runs one subcommand (args exclude the program name). Returns 0 on success,
// 1 on a usage or configuration error, 2 on a data error.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace authcurr
