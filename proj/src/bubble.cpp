#include "stm/bubble.hpp"

#include "stm/error.hpp"

#include <cmath>
#include <numbers>

namespace stm {

namespace {

void check_beta(double beta)
{
    STM_REQUIRE(beta >= 0.0 && beta < 1.0, ConfigError, "beta must lie in [0, 1)");
}

} // namespace

BubbleProfile::BubbleProfile(double beta) : beta_(beta)
{
    check_beta(beta);
    a_ = std::numbers::pi / (1.0 - beta);
    k_ = 1.0 / (4.0 * std::numbers::pi * (1.0 - beta));
}

double BubbleProfile::T(double R) const
{
    STM_REQUIRE(R >= 0.0, ConfigError, "radius must be nonnegative");
    if (std::isinf(R)) return kInfinity;
    return a_ * std::pow(R, 2.0 - 2.0 * beta_);
}

double BubbleProfile::phi0(double r) const { return -k_ * std::log1p(T(r)); }

double BubbleProfile::phi0_derivative(double r) const
{
    if (r == 0.0) return beta_ < 0.5 ? 0.0 : (beta_ == 0.5 ? -k_ * a_ : -kInfinity);
    const double t = T(r);
    return -k_ * (2.0 - 2.0 * beta_) * t / (r * (1.0 + t));
}

double BubbleProfile::mass(double R) const
{
    const double t = T(R);
    if (std::isinf(t)) return 1.0;
    return t / (1.0 + t);
}

double BubbleProfile::energy(double R) const
{
    STM_REQUIRE(std::isfinite(R), ConfigError, "bubble energy is infinite on the whole plane");
    const double t = T(R);
    if (t < 1e-4) {
        // log(1+t) - t/(1+t) = t^2/2 - 2t^3/3 + 3t^4/4 - ...
        return k_ * t * t * (0.5 - t * (2.0 / 3.0 - 0.75 * t));
    }
    return k_ * (std::log1p(t) - t / (1.0 + t));
}

double BubbleProfile::energy_asymptotic(double R) const
{
    return std::log(R) / (2.0 * std::numbers::pi) + k_ * std::log(a_) - k_;
}

double phi0(double r, double beta) { return BubbleProfile(beta).phi0(r); }
double bubble_mass(double R, double beta) { return BubbleProfile(beta).mass(R); }
double bubble_energy(double R, double beta) { return BubbleProfile(beta).energy(R); }

double liouville_mass(double beta)
{
    check_beta(beta);
    return 1.0 / (1.0 - beta);
}

double liouville_solution(double r, double beta, double mu)
{
    check_beta(beta);
    const double c = 8.0 * std::numbers::pi * (1.0 - beta);
    const double q = 1.0 + mu * mu * r * r;
    return std::log(8.0 * mu * mu / (c * q * q)) / c;
}

} // namespace stm
