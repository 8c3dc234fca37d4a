#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flashadc::cli {

/// Stable exit codes.
enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3, kMeasurementError = 4 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "FLASHADC_OUT_DIR";

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flashadc::cli
