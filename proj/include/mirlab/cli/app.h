#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mirlab::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Runs one subcommand (gen-data | train | eval-reachability | eval-imitate |
// report). Progress goes to `out`; failures print a single line to `err`.
// Returns 0 when every requested output was written, 2 for usage errors and
// 1 for runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a of a file's bytes, as 16 hex digits (recorded in manifests).
std::string file_digest(const std::string& path);

}  // namespace mirlab::cli
