#pragma once

#include "stm/quadrature.hpp"
#include "stm/spectral.hpp"

#include <memory>
#include <optional>

namespace stm {

inline constexpr double kExponentCap = 700.0;

struct TMParams {
    double beta = 0.5;
    double alpha = 0.0;
    double eps = 0.0;
    std::optional<double> gamma; // defaults to 4 pi (1 - beta - eps)

    double exponent() const;
    // Checks 0 <= beta < 1 and 0 <= eps < 1 - beta; alpha is checked against
    // the spectrum by the functional itself.
    void validate() const;
};

// Result of one nodal evaluation of the nonlinearity.
struct TMEvaluation {
    double value = 0.0;  // integral of |x|^{-2beta} e^{gamma u^2}
    double lambda = 0.0; // integral of |x|^{-2beta} u^2 e^{gamma u^2}
    Vector load;         // m_i u_i e^{gamma u_i^2} on interior DOFs
    std::size_t capped = 0;
};

// Discrete singular Trudinger-Moser functional. e^{gamma u^2} is evaluated at
// the nodes and integrated against the weighted P1 basis, so that
//   value(u) = sum_i m_i e^{gamma u_i^2},  m_i = integral |x|^{-2beta} phi_i,
// and load(u) = grad value / (2 gamma) exactly.
class TMFunctional {
public:
    TMFunctional(std::shared_ptr<const Discretization> disc, TMParams params, const QuadratureOptions& quad = {});

    const TMParams& params() const { return params_; }
    const Discretization& discretization() const { return *state_->disc; }
    const Operators& ops() const { return state_->disc->ops; }
    double gamma() const { return params_.exponent(); }
    // Integral of |x|^{-2beta} over the domain.
    double weighted_volume() const { return state_->volume; }
    const std::vector<double>& node_weights() const { return state_->node_weights; }

    TMEvaluation evaluate(const Vector& u) const;
    double value(const Vector& u) const { return evaluate(u).value; }
    double lambda(const Vector& u) const { return evaluate(u).lambda; }
    // Value for an arbitrary all-node vector (used for truncated fields).
    double value_nodal(std::span<const double> nodal, std::size_t* capped = nullptr) const;

    // Integral of |x|^{-2beta} e^{gamma u_h(x)^2} with the exponential taken
    // at quadrature points rather than nodes. The gap to value() is the
    // discretization error indicator reported alongside functional values.
    double value_consistent(const Vector& u) const;

    // (K - alpha M) d = load(u) / lambda(u); zero for u = 0.
    Vector ascent_direction(const Vector& u) const;
    Vector ascent_direction(const TMEvaluation& e) const;

    // Dual-norm residual of the discrete Euler-Lagrange system. With a basis
    // the multipliers gamma_i = (load, psi_i) are removed first.
    double el_residual(const Vector& u, const SpectralData* basis = nullptr) const;
    double el_residual(const Vector& u, const Vector& load, double lambda, const SpectralData* basis = nullptr) const;

    double norm(const Vector& u) const { return norm_1alpha(ops(), u, params_.alpha); }

    // Same mesh, quadrature and factorizations with another epsilon.
    TMFunctional with_eps(double eps) const;
    TMFunctional with_gamma(double gamma) const;

private:
    struct State {
        std::shared_ptr<const Discretization> disc;
        std::unique_ptr<SingularQuadrature> quadrature;
        std::vector<double> node_weights;
        std::vector<double> dof_weights;
        double boundary_weight = 0.0;
        double volume = 0.0;
        std::unique_ptr<ShiftedSolver> shifted;
        std::unique_ptr<ShiftedSolver> dirichlet;
    };
    TMFunctional(std::shared_ptr<const State> state, TMParams params);

    std::shared_ptr<const State> state_;
    TMParams params_;
};

// One-shot conveniences.
double tm_value(const Field& u, const TMParams& params, const QuadratureOptions& quad = {});
double lambda_eps(const Field& u, const TMParams& params, const QuadratureOptions& quad = {});

} // namespace stm
