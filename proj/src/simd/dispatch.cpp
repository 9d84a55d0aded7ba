#include "stm/simd/kernels.hpp"

#include "stm/error.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace stm::simd {

namespace {

Isa detect()
{
    const char* env = std::getenv("STM_SIMD");
    if (env && std::string(env) == "scalar") return Isa::scalar;
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current()
{
    static std::atomic<Isa> isa{detect()};
    return isa;
}

} // namespace

bool cpu_has_avx2()
{
#if defined(STM_HAVE_AVX2_KERNELS)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa set_isa(Isa isa)
{
    STM_REQUIRE(isa != Isa::avx2 || cpu_has_avx2(), ConfigError, "AVX2 requested but not supported by this CPU");
    return current().exchange(isa);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

ExpMoments exp_moments(std::span<const double> m, std::span<const double> u, double gamma, double cap,
                       std::span<double> load)
{
    STM_REQUIRE(m.size() == u.size() && (load.empty() || load.size() == u.size()), ConfigError,
                "exp_moments: size mismatch");
#if defined(STM_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::avx2) return avx2::exp_moments(m, u, gamma, cap, load);
#endif
    return scalar::exp_moments(m, u, gamma, cap, load);
}

double dot(std::span<const double> a, std::span<const double> b)
{
    STM_REQUIRE(a.size() == b.size(), ConfigError, "dot: size mismatch");
#if defined(STM_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::avx2) return avx2::dot(a, b);
#endif
    return scalar::dot(a, b);
}

} // namespace stm::simd
