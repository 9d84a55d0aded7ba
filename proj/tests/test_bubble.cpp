#include "doctest.h"

#include "stm/bubble.hpp"
#include "stm/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

using namespace stm;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double kPi = std::numbers::pi;
const double kBetas[] = {0.1, 0.25, 0.5, 0.75};

// Integral over [0, R] of a radial integrand in the variable t = log r, on
// unit-length pieces; the piece below e^{-40} is negligible for every
// integrand used here.
template <class F>
double radial_integral(F f, double R)
{
    const auto g = [&](double t) {
        const double r = std::exp(t);
        return f(r) * r;
    };
    double total = 0.0;
    for (double t = -40.0; t < std::log(R); t += 1.0)
        total += gauss_kronrod<double, 31>::integrate(g, t, std::min(t + 1.0, std::log(R)), 5, 1e-14);
    return total;
}

} // namespace

TEST_CASE("phi0 values and shape")
{
    for (double beta : kBetas) {
        CHECK(phi0(0.0, beta) == 0.0);
        double prev = 0.0;
        for (double r = 0.1; r < 50; r *= 1.7) {
            const double v = phi0(r, beta);
            CHECK(v < prev);
            prev = v;
        }
    }
    CHECK(phi0(1.0, 0.5) == doctest::Approx(-std::log(1.0 + 2.0 * kPi) / (2.0 * kPi)).epsilon(1e-15));
    const BubbleProfile b(0.3);
    for (double r : {0.01, 0.5, 3.0}) {
        const double fd = (b.phi0(r * (1 + 1e-6)) - b.phi0(r * (1 - 1e-6))) / (2e-6 * r);
        CHECK(b.phi0_derivative(r) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("bubble mass closed form")
{
    for (double beta : kBetas) {
        CHECK(bubble_mass(kInfinity, beta) == 1.0);
        CHECK(bubble_mass(1e-40, beta) < 1e-12);
        double prev = 0.0;
        for (double R = 0.01; R < 1e4; R *= 3.0) {
            CHECK(bubble_mass(R, beta) > prev);
            prev = bubble_mass(R, beta);
        }
    }
    CHECK(bubble_mass(1.0, 0.5) == doctest::Approx(1.0 - 1.0 / (1.0 + 2.0 * kPi)).epsilon(1e-15));
    CHECK(bubble_mass(1.0, 0.5) == doctest::Approx(0.8627).epsilon(1e-4));
}

TEST_CASE("bubble mass against radial quadrature on B_{1e6}")
{
    for (double beta : kBetas) {
        const BubbleProfile b(beta);
        const auto density = [&](double r) {
            return 2.0 * kPi * std::pow(r, 1.0 - 2.0 * beta) * std::exp(8.0 * kPi * (1.0 - beta) * b.phi0(r));
        };
        CHECK(std::abs(radial_integral(density, 1e6) - b.mass(1e6)) <= 1e-6);
    }
}

TEST_CASE("bubble energy against radial quadrature")
{
    for (double beta : kBetas) {
        const BubbleProfile b(beta);
        const auto density = [&](double r) {
            const double d = b.phi0_derivative(r);
            return 2.0 * kPi * r * d * d;
        };
        for (double R : {1.0, 10.0, 100.0}) CHECK(std::abs(radial_integral(density, R) - b.energy(R)) <= 1e-8);
        CHECK(b.energy(1e-40) >= 0.0);
        CHECK(b.energy(1e-40) < 1e-20);
    }
}

TEST_CASE("bubble energy matches its asymptotic expansion")
{
    for (double beta : kBetas) {
        const BubbleProfile b(beta);
        double cmin = 1e300, cmax = 0.0;
        for (double R : {1.0, 10.0, 100.0, 1000.0}) {
            const double C = std::abs(b.energy(R) - b.energy_asymptotic(R)) * std::pow(R, 2.0 - 2.0 * beta);
            cmin = std::min(cmin, C);
            cmax = std::max(cmax, C);
        }
        CHECK(cmax <= 2.0 * cmin);
    }
}

TEST_CASE("scale identity: mass and energy depend on R only through T")
{
    // T = a R^{2-2beta}; pick R2 for beta2 giving the same T as (R1, beta1).
    const BubbleProfile b1(0.2), b2(0.6);
    const double R1 = 3.0;
    const double R2 = std::pow(b1.T(R1) / b2.a(), 1.0 / (2.0 - 2.0 * 0.6));
    CHECK(b2.T(R2) == doctest::Approx(b1.T(R1)).epsilon(1e-14));
    CHECK(b2.mass(R2) == doctest::Approx(b1.mass(R1)).epsilon(1e-14));
    CHECK(b2.energy(R2) / b2.k() == doctest::Approx(b1.energy(R1) / b1.k()).epsilon(1e-13));
}

TEST_CASE("Liouville mass excludes the first blow-up case")
{
    CHECK(liouville_mass(0.5) == 2.0);
    CHECK(liouville_mass(1e-12) == doctest::Approx(1.0));
    for (double beta = 0.01; beta < 1.0; beta += 0.07) CHECK(liouville_mass(beta) > 1.0);
    for (double beta : kBetas) {
        const double c = 8.0 * kPi * (1.0 - beta);
        const auto density = [&](double r) { return 2.0 * kPi * r * std::exp(c * liouville_solution(r, beta)); };
        // tail beyond 1e6 is 1/(1-beta) / (1 + 1e12)
        const double total = radial_integral(density, 1e6) + liouville_mass(beta) / (1.0 + 1e12);
        CHECK(std::abs(total - liouville_mass(beta)) <= 1e-6);
    }
    CHECK_THROWS_AS(liouville_mass(1.0), ConfigError);
}
