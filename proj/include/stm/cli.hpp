#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stm::cli {

enum ExitCode : int {
    kOk = 0,
    kOtherError = 1,
    kConfigError = 2,
    kNotConverged = 3,
    kOverflow = 4,
};

struct RunConfig {
    std::string command;

    // domain
    std::string domain = "disk"; // disk | square | polygon
    double radius = 1.0;
    double center_x = 0.0;
    double center_y = 0.0;
    double half_width = 1.0;
    std::string vertices;        // "x,y;x,y;..."

    // mesh
    std::string h = "1/32";
    double core_size = 0.0;
    double core_ratio = 1.1;
    std::vector<double> snap;

    // functional
    double beta = 0.5;
    double alpha = 0.0;
    double alpha_fraction = -1.0; // negative: use alpha as given
    int ell = 0;
    double eps = 0.1;
    std::vector<double> eps_list;

    // solvers
    double tolerance = 1e-6;
    int max_iterations = 10000;
    int starts = 1;
    std::uint64_t seed = 20170101;
    int count = 6;

    // bubble and diagnostics
    std::string R = "inf";
    double delta = 0.1;
    double profile_R = 5.0;
    double gamma = 0.5;

    // run
    std::string out = "out";
    int jobs = 1;
    std::string simd = "auto";
};

// Parses "1/32", "0.5", "inf".
double parse_number(std::string_view text);

// Resolved configuration as ordered key/value pairs.
std::vector<std::pair<std::string, std::string>> entries(const RunConfig& config);
// Canonical "key=value\n" text of the resolved configuration.
std::string manifest_text(const RunConfig& config);
std::uint64_t fnv1a(std::string_view data);
// 16 hex digits of the FNV-1a hash of the manifest text.
std::string manifest_hash(const RunConfig& config);

// Re-validates every parameter invariant; throws ConfigError.
void validate(const RunConfig& config);

// Executes a subcommand; artifacts go to config.out. Returns an ExitCode.
int execute(const RunConfig& config);

// Full command-line entry point.
int run(int argc, const char* const* argv);

} // namespace stm::cli
