#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace stm::simd {

// Moments of the nodal exponential e^{gamma u_i^2} against weights m_i:
//   sum_exp   = sum m_i e^{gamma u_i^2}
//   sum_u2exp = sum m_i u_i^2 e^{gamma u_i^2}
// Exponents above `cap` are clamped to `cap` and counted. When `load` is
// non-empty it receives m_i u_i e^{gamma u_i^2}.
struct ExpMoments {
    double sum_exp = 0.0;
    double sum_u2exp = 0.0;
    std::size_t capped = 0;
};

enum class Isa { scalar, avx2 };

namespace scalar {
ExpMoments exp_moments(std::span<const double> m, std::span<const double> u, double gamma, double cap,
                       std::span<double> load);
double dot(std::span<const double> a, std::span<const double> b);
} // namespace scalar

namespace avx2 {
ExpMoments exp_moments(std::span<const double> m, std::span<const double> u, double gamma, double cap,
                       std::span<double> load);
double dot(std::span<const double> a, std::span<const double> b);
} // namespace avx2

// Runtime-dispatched entry points.
ExpMoments exp_moments(std::span<const double> m, std::span<const double> u, double gamma, double cap,
                       std::span<double> load = {});
double dot(std::span<const double> a, std::span<const double> b);

bool cpu_has_avx2();
// Selected on first use: AVX2 when available unless STM_SIMD=scalar.
Isa active_isa();
// Overrides the selection; returns the previous one. Requesting avx2 on a
// CPU without it throws.
Isa set_isa(Isa isa);
std::string_view isa_name(Isa isa);

} // namespace stm::simd
