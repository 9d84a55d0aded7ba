#include "doctest.h"

#include "stm/simd/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace stm::simd;

namespace {

struct Data {
    std::vector<double> m, u;
};

Data make(std::size_t n, double spread, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> w(0.0, 1e-2), v(-spread, spread);
    Data d{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        d.m[i] = w(rng);
        d.u[i] = v(rng);
    }
    return d;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("scalar exp_moments matches a direct evaluation")
{
    const std::vector<double> m{1.0, 2.0, 0.5}, u{0.0, 1.0, -2.0};
    std::vector<double> load(3);
    const ExpMoments r = scalar::exp_moments(m, u, 0.5, 700.0, load);
    CHECK(r.sum_exp == doctest::Approx(1.0 + 2.0 * std::exp(0.5) + 0.5 * std::exp(2.0)));
    CHECK(r.sum_u2exp == doctest::Approx(2.0 * std::exp(0.5) + 2.0 * std::exp(2.0)));
    CHECK(load[2] == doctest::Approx(-std::exp(2.0)));
    CHECK(r.capped == 0);
}

TEST_CASE("cap clamps exponents and counts them")
{
    const std::vector<double> m{1.0, 1.0, 1.0, 1.0, 1.0}, u{0.0, 10.0, -30.0, 1.0, 40.0};
    for (Isa isa : {Isa::scalar, Isa::avx2}) {
        if (isa == Isa::avx2 && !cpu_has_avx2()) continue;
        const Isa prev = set_isa(isa);
        const ExpMoments r = exp_moments(m, u, 1.0, 700.0);
        set_isa(prev);
        CHECK(r.capped == 2);
        CHECK(std::isfinite(r.sum_exp));
        CHECK(rel(r.sum_exp, 1.0 + std::exp(100.0) + 2 * std::exp(700.0) + std::exp(1.0)) < 1e-14);
    }
}

TEST_CASE("avx2 kernels agree with the scalar reference")
{
    if (!cpu_has_avx2()) {
        MESSAGE("AVX2 not available; equivalence test skipped");
        return;
    }
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 40001u}) {
        for (double spread : {0.1, 2.0, 7.0}) {
            const Data d = make(n, spread, static_cast<unsigned>(n * 31 + 7));
            std::vector<double> ls(n), lv(n);
            const ExpMoments s = scalar::exp_moments(d.m, d.u, 12.566, 700.0, ls);
            const ExpMoments v = avx2::exp_moments(d.m, d.u, 12.566, 700.0, lv);
            CHECK(s.capped == v.capped);
            if (n == 0) {
                CHECK(v.sum_exp == 0.0);
                continue;
            }
            CHECK(rel(v.sum_exp, s.sum_exp) < 1e-13);
            CHECK(rel(v.sum_u2exp, s.sum_u2exp) < 1e-13);
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (ls[i] != 0.0) worst = std::max(worst, rel(lv[i], ls[i]));
            CHECK(worst < 1e-14);
            CHECK(rel(avx2::dot(d.m, d.u), scalar::dot(d.m, d.u)) < 1e-12);
        }
    }
}

TEST_CASE("vector exponential is accurate over the whole capped range")
{
    if (!cpu_has_avx2()) return;
    std::vector<double> m(1), u(1), l(1);
    double worst = 0.0;
    for (double x = 0.0; x <= 700.0; x += 0.37) {
        m[0] = 1.0;
        u[0] = std::sqrt(x);
        worst = std::max(worst, rel(avx2::exp_moments(m, u, 1.0, 700.0, l).sum_exp, std::exp(u[0] * u[0])));
    }
    CHECK(worst < 4e-16 * 4);
}

TEST_CASE("dispatch honours overrides")
{
    const Isa prev = set_isa(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    CHECK(isa_name(Isa::scalar) == "scalar");
    set_isa(prev);
    CHECK(active_isa() == prev);
}
