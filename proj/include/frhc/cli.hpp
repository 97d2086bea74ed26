#pragma once

// Command-line front-end, callable in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace frhc::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInfeasible = 2,
    kConfigError = 3,
    kNumericalFailure = 4,
};

/// Flag values that override the config document or reproduction defaults.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> gridPoints;
    std::optional<double> h;
    std::optional<double> horizon;
    std::optional<std::string> memoryPolicy;
    bool strictDf = false;
};

/// `design|simulate|stability|df <config>` or `reproduce example1|2|3`.
/// Artifacts go to outDir; the return value is the process exit status.
int runConfig(const std::string& command, const std::string& configPath, const std::string& outDir,
              const Overrides& overrides, std::ostream& out, std::ostream& err);
int reproduce(const std::string& target, const std::string& outDir, const Overrides& overrides, std::ostream& out,
              std::ostream& err);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace frhc::cli
