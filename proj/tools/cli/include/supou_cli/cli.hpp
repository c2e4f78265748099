#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace supou::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNotConverged = 3 };

/// Environment variable holding the default study worker count.
inline constexpr const char* kWorkersEnv = "SUPOU_WORKERS";

/// Bad input file contents or unusable arguments; maps to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One observation per line, `value` or `date,value`; a non-numeric first line is a header.
struct Series {
    std::vector<std::string> dates;  ///< empty when the file has no date column
    std::vector<double> values;
};

[[nodiscard]] Series parse_series(std::istream& in, const std::string& source = "<stream>");
[[nodiscard]] Series read_series(const std::filesystem::path& path);

/// Differences of logs; throws InputError for non-positive or non-finite prices.
[[nodiscard]] std::vector<double> log_returns(const std::vector<double>& prices);

/// Worker count from the environment, falling back to the hardware concurrency.
[[nodiscard]] unsigned default_workers();

/// Runs the command line `supou <args...>` (args exclude the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace supou::cli
