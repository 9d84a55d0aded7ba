#include "stm/functional.hpp"

#include "stm/error.hpp"
#include "stm/simd/kernels.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace stm {

double TMParams::exponent() const
{
    return gamma.value_or(4.0 * std::numbers::pi * (1.0 - beta - eps));
}

void TMParams::validate() const
{
    STM_REQUIRE(beta >= 0.0 && beta < 1.0, ConfigError, "beta must lie in [0, 1)");
    STM_REQUIRE(eps >= 0.0 && eps < 1.0 - beta, ConfigError, "eps must lie in [0, 1 - beta)");
    STM_REQUIRE(std::isfinite(alpha), ConfigError, "alpha must be finite");
    STM_REQUIRE(exponent() >= 0.0, ConfigError, "exponent must be nonnegative");
}

TMFunctional::TMFunctional(std::shared_ptr<const Discretization> disc, TMParams params, const QuadratureOptions& quad)
    : params_(params)
{
    params_.validate();
    STM_REQUIRE(disc != nullptr, ConfigError, "functional requires a discretization");
    auto state = std::make_shared<State>();
    state->disc = std::move(disc);
    const Mesh& mesh = *state->disc->mesh;
    state->quadrature = std::make_unique<SingularQuadrature>(mesh, params_.beta, quad);
    state->node_weights = state->quadrature->node_weights();
    state->volume = std::accumulate(state->node_weights.begin(), state->node_weights.end(), 0.0);
    state->dof_weights.resize(mesh.dof_count());
    for (std::size_t d = 0; d < mesh.dof_count(); ++d)
        state->dof_weights[d] = state->node_weights[static_cast<std::size_t>(mesh.node_of(static_cast<int>(d)))];
    state->boundary_weight = state->volume - std::accumulate(state->dof_weights.begin(), state->dof_weights.end(), 0.0);
    state->shifted = std::make_unique<ShiftedSolver>(state->disc->ops, params_.alpha);
    state->dirichlet = std::make_unique<ShiftedSolver>(state->disc->ops, 0.0);
    state_ = std::move(state);
}

TMFunctional::TMFunctional(std::shared_ptr<const State> state, TMParams params) : state_(std::move(state)), params_(params)
{
    params_.validate();
}

TMFunctional TMFunctional::with_eps(double eps) const
{
    TMParams p = params_;
    p.eps = eps;
    return TMFunctional(state_, p);
}

TMFunctional TMFunctional::with_gamma(double gamma) const
{
    TMParams p = params_;
    p.gamma = gamma;
    return TMFunctional(state_, p);
}

TMEvaluation TMFunctional::evaluate(const Vector& u) const
{
    STM_REQUIRE(static_cast<std::size_t>(u.size()) == state_->dof_weights.size(), ConfigError,
                "field length does not match the mesh");
    TMEvaluation e;
    e.load.resize(u.size());
    const auto m = simd::exp_moments(state_->dof_weights, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
                                     gamma(), kExponentCap, std::span<double>(e.load.data(), static_cast<std::size_t>(u.size())));
    e.value = state_->boundary_weight + m.sum_exp;
    e.lambda = m.sum_u2exp;
    e.capped = m.capped;
    return e;
}

double TMFunctional::value_nodal(std::span<const double> nodal, std::size_t* capped) const
{
    STM_REQUIRE(nodal.size() == state_->node_weights.size(), ConfigError, "nodal vector length does not match the mesh");
    const auto m = simd::exp_moments(state_->node_weights, nodal, gamma(), kExponentCap);
    if (capped) *capped = m.capped;
    return m.sum_exp;
}

double TMFunctional::value_consistent(const Vector& u) const
{
    const Mesh& mesh = *state_->disc->mesh;
    const std::vector<double> nodal = mesh.expand(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
    const double g = gamma();
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        for (const auto& p : state_->quadrature->points(t)) {
            double v = 0.0;
            for (int k = 0; k < 3; ++k) v += p.bary[static_cast<std::size_t>(k)] * nodal[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
            total += p.weight * std::exp(std::min(g * v * v, kExponentCap));
        }
    }
    return total;
}

Vector TMFunctional::ascent_direction(const TMEvaluation& e) const
{
    if (e.lambda <= 0.0) return Vector::Zero(e.load.size());
    return state_->shifted->solve(e.load / e.lambda);
}

Vector TMFunctional::ascent_direction(const Vector& u) const { return ascent_direction(evaluate(u)); }

double TMFunctional::el_residual(const Vector& u, const Vector& load, double lambda, const SpectralData* basis) const
{
    const Operators& o = ops();
    Vector rhs = load;
    if (basis) {
        for (Eigen::Index i = 0; i < basis->vectors.cols(); ++i) {
            const double gi = basis->vectors.col(i).dot(load);
            rhs -= gi * (o.mass * basis->vectors.col(i));
        }
    }
    Vector r = state_->shifted->matrix() * u;
    if (lambda > 0.0) r -= rhs / lambda;
    // H^{-1} norm of the residual functional.
    const Vector z = state_->dirichlet->solve(r);
    return std::sqrt(std::abs(r.dot(z)));
}

double TMFunctional::el_residual(const Vector& u, const SpectralData* basis) const
{
    const TMEvaluation e = evaluate(u);
    return el_residual(u, e.load, e.lambda, basis);
}

double tm_value(const Field& u, const TMParams& params, const QuadratureOptions& quad)
{
    params.validate();
    const SingularQuadrature q(u.mesh(), params.beta, quad);
    const std::vector<double> nodal = u.nodal();
    return simd::exp_moments(q.node_weights(), nodal, params.exponent(), kExponentCap).sum_exp;
}

double lambda_eps(const Field& u, const TMParams& params, const QuadratureOptions& quad)
{
    params.validate();
    const SingularQuadrature q(u.mesh(), params.beta, quad);
    const std::vector<double> nodal = u.nodal();
    return simd::exp_moments(q.node_weights(), nodal, params.exponent(), kExponentCap).sum_u2exp;
}

} // namespace stm
