#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "degenlap/error.hpp"

namespace degenlap::cli {

/// Exit statuses of the command-line tool.
enum Exit : int { kSuccess = 0, kUsage = 1, kSolverFailure = 2, kCertificateFailure = 3 };

/// Status for a module error: configuration problems are usage errors,
/// numerical breakdowns solver failures, and violated hypotheses or
/// certificates certificate failures.
int exit_code(ErrorCode code);

/// Runs one subcommand: validate, psi, resolvent, barriers, solve, sweep
/// or verify. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// Hex SHA-256 of a file.
std::string file_digest(const std::string& path);

/// Scientific notation with 17 significant digits.
std::string format_number(double v);

}  // namespace degenlap::cli
