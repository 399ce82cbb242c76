#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace starmap::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name); returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/**
 * Label columns of a CSV file when the user did not name them: any column
 * whose header starts with "label", "level", "class" or "anchor", plus any
 * column whose first data cell is not a number.
 */
std::vector<std::string> detect_label_columns(const std::filesystem::path& path);

}  // namespace starmap::cli
