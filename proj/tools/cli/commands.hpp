#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scoreconf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1; // inputs were valid but the command failed
inline constexpr int kExitUsage = 2;   // bad arguments, missing or malformed input files

// Entry point shared by the executable and the tests; args excludes the
// program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// Molecule id as written to and matched in XYZ comment lines: whitespace,
// quotes and '=' become '_', and an empty id becomes "mol<index>".
std::string frame_id(const std::string &id, std::size_t index);

} // namespace scoreconf::cli
