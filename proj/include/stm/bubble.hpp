#pragma once

#include <limits>

namespace stm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Limiting profile of the rescaled maximizers,
//   phi0(r) = -(1/(4 pi (1-beta))) log(1 + a r^{2(1-beta)}),  a = pi/(1-beta),
// and exact integrals over balls B_R. All quantities depend on R only through
// T = a R^{2-2beta}.
class BubbleProfile {
public:
    explicit BubbleProfile(double beta);

    double beta() const { return beta_; }
    double a() const { return a_; }
    // 1 / (4 pi (1 - beta))
    double k() const { return k_; }
    double T(double R) const;

    double phi0(double r) const;
    double phi0_derivative(double r) const;
    // Integral of |x|^{-2beta} e^{8 pi (1-beta) phi0} over B_R; 1 at R = infinity.
    double mass(double R) const;
    // Integral of |grad phi0|^2 over B_R.
    double energy(double R) const;
    // (1/2pi) log R + k log a - k, the large-R expansion of energy(R).
    double energy_asymptotic(double R) const;

private:
    double beta_;
    double a_;
    double k_;
};

double phi0(double r, double beta);
double bubble_mass(double R, double beta);
double bubble_energy(double R, double beta);

// Total mass 1/(1-beta) of the radial solutions of -Lap v = e^{8 pi (1-beta) v}.
double liouville_mass(double beta);
// v(r) = (1/(8 pi (1-beta))) log(8 mu^2 / (8 pi (1-beta) (1 + mu^2 r^2)^2)).
double liouville_solution(double r, double beta, double mu = 1.0);

} // namespace stm
