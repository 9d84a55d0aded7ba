#include "stm/cli.hpp"

#include "stm/error.hpp"
#include "stm/functional.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace stm::cli {

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt_list(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

double parse_plain(std::string_view t)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    STM_REQUIRE(ec == std::errc() && ptr == t.data() + t.size(), ConfigError,
                "not a number: '" + std::string(t) + "'");
    return v;
}

} // namespace

double parse_number(std::string_view text)
{
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const double num = parse_plain(text.substr(0, slash));
        const double den = parse_plain(text.substr(slash + 1));
        STM_REQUIRE(den != 0.0, ConfigError, "zero denominator in '" + std::string(text) + "'");
        return num / den;
    }
    return parse_plain(text);
}

std::vector<std::pair<std::string, std::string>> entries(const RunConfig& c)
{
    std::vector<std::pair<std::string, std::string>> e = {
        {"command", c.command},
        {"domain", c.domain},
    };
    if (c.domain == "disk") {
        e.emplace_back("radius", fmt(c.radius));
        e.emplace_back("center", fmt(c.center_x) + "," + fmt(c.center_y));
    } else if (c.domain == "square") {
        e.emplace_back("half_width", fmt(c.half_width));
    } else {
        e.emplace_back("vertices", c.vertices);
    }
    e.insert(e.end(), {
                          {"h", fmt(parse_number(c.h))},
                          {"core_size", fmt(c.core_size)},
                          {"core_ratio", fmt(c.core_ratio)},
                          {"snap", fmt_list(c.snap)},
                          {"beta", fmt(c.beta)},
                          {"alpha", fmt(c.alpha)},
                          {"alpha_fraction", fmt(c.alpha_fraction)},
                          {"ell", std::to_string(c.ell)},
                          {"eps", fmt(c.eps)},
                          {"eps_list", fmt_list(c.eps_list)},
                          {"tolerance", fmt(c.tolerance)},
                          {"max_iterations", std::to_string(c.max_iterations)},
                          {"starts", std::to_string(c.starts)},
                          {"seed", std::to_string(c.seed)},
                          {"count", std::to_string(c.count)},
                          {"R", fmt(parse_number(c.R))},
                          {"delta", fmt(c.delta)},
                          {"profile_R", fmt(c.profile_R)},
                          {"gamma", fmt(c.gamma)},
                          {"simd", c.simd},
                      });
    return e;
}

std::string manifest_text(const RunConfig& config)
{
    std::string s;
    for (const auto& [k, v] : entries(config)) s += k + "=" + v + "\n";
    return s;
}

std::uint64_t fnv1a(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string manifest_hash(const RunConfig& config)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(manifest_text(config));
    return os.str();
}

void validate(const RunConfig& c)
{
    STM_REQUIRE(c.domain == "disk" || c.domain == "square" || c.domain == "polygon", ConfigError,
                "domain must be disk, square or polygon");
    STM_REQUIRE(c.domain != "polygon" || !c.vertices.empty(), ConfigError, "polygon domain needs --polygon vertices");
    const double h = parse_number(c.h);
    STM_REQUIRE(h > 0.0 && std::isfinite(h), ConfigError, "mesh size h must be positive");
    STM_REQUIRE(c.core_size >= 0.0, ConfigError, "core size must be nonnegative");
    STM_REQUIRE(c.core_ratio > 1.0, ConfigError, "core ratio must exceed 1");
    STM_REQUIRE(c.ell >= 0, ConfigError, "ell must be nonnegative");
    STM_REQUIRE(c.tolerance > 0.0, ConfigError, "tolerance must be positive");
    STM_REQUIRE(c.max_iterations > 0, ConfigError, "max iterations must be positive");
    STM_REQUIRE(c.starts >= 1, ConfigError, "starts must be at least 1");
    STM_REQUIRE(c.count >= 1, ConfigError, "count must be at least 1");
    STM_REQUIRE(c.jobs >= 1, ConfigError, "jobs must be at least 1");
    STM_REQUIRE(c.delta > 0.0 && c.profile_R > 0.0, ConfigError, "delta and profile radius must be positive");
    STM_REQUIRE(c.gamma > 0.0 && c.gamma <= 1.0, ConfigError, "gamma must lie in (0, 1]");
    STM_REQUIRE(c.simd == "auto" || c.simd == "scalar" || c.simd == "avx2", ConfigError,
                "simd must be auto, scalar or avx2");
    STM_REQUIRE(parse_number(c.R) > 0.0, ConfigError, "R must be positive");
    TMParams p;
    p.beta = c.beta;
    p.alpha = c.alpha;
    p.eps = c.eps;
    p.validate();
    for (double e : c.eps_list) {
        p.eps = e;
        p.validate();
    }
}

} // namespace stm::cli
