#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lhr::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kNotConverged = 2 };

/// Runs one subcommand. args excludes the program name. Messages go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string &bytes);

} // namespace lhr::cli
