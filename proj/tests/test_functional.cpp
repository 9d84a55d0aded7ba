#include "doctest.h"

#include "stm/error.hpp"
#include "stm/functional.hpp"
#include "stm/simd/kernels.hpp"

#include <cmath>
#include <numbers>
#include <map>
#include <random>

using namespace stm;

namespace {

std::shared_ptr<const Discretization> disk_disc(double h)
{
    static std::map<double, std::shared_ptr<const Discretization>> cache;
    auto& d = cache[h];
    if (!d) d = Discretization::create(build_mesh(DomainSpec::disk(1.0), h));
    return d;
}

// Smooth random field vanishing on the unit circle.
Vector random_field(const Mesh& mesh, std::mt19937& rng, double scale)
{
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    const double a = c(rng), b = c(rng), d = c(rng), e = c(rng);
    Vector u(static_cast<Eigen::Index>(mesh.dof_count()));
    for (std::size_t k = 0; k < mesh.dof_count(); ++k) {
        const Vec2 p = mesh.node(mesh.node_of(static_cast<int>(k)));
        const double bubble = 1.0 - dot(p, p);
        u[static_cast<Eigen::Index>(k)] = scale * bubble * (a + b * p.x + d * p.y + e * std::sin(3 * p.x * p.y));
    }
    return u;
}

} // namespace

TEST_CASE("functional at zero")
{
    const auto disc = disk_disc(1.0 / 16);
    const TMFunctional f(disc, {.beta = 0.5, .alpha = 0.0, .eps = 0.1});
    const Vector zero = Vector::Zero(static_cast<Eigen::Index>(disc->mesh->dof_count()));
    const TMEvaluation e = f.evaluate(zero);
    CHECK(e.value == doctest::Approx(2.0 * std::numbers::pi).epsilon(2e-3));
    CHECK(e.value == doctest::Approx(f.weighted_volume()).epsilon(1e-14));
    CHECK(e.lambda == 0.0);
    CHECK(f.ascent_direction(zero).norm() == 0.0);

    const TMFunctional flat(disc, {.beta = 0.0, .alpha = 0.0, .eps = 0.1});
    CHECK(flat.value(zero) == doctest::Approx(disc->mesh->area()).epsilon(1e-13));
}

TEST_CASE("parameter validation")
{
    CHECK_THROWS_AS((TMParams{.beta = 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS((TMParams{.beta = 0.5, .eps = 0.5}).validate(), ConfigError);
    CHECK_THROWS_AS((TMParams{.beta = 0.5, .eps = -0.1}).validate(), ConfigError);
    CHECK((TMParams{.beta = 0.5, .eps = 0.1}).exponent() == doctest::Approx(4 * std::numbers::pi * 0.4));
}

TEST_CASE("pointwise inequalities and symmetries on random fields")
{
    const auto disc = disk_disc(1.0 / 16);
    const TMFunctional f(disc, {.beta = 0.5, .alpha = 0.0, .eps = 0.05});
    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector u = random_field(*disc->mesh, rng, 0.6);
        const TMEvaluation e = f.evaluate(u);
        CHECK(e.value >= f.weighted_volume());
        CHECK(e.lambda > 0.0);
        CHECK(e.value <= f.weighted_volume() + f.gamma() * e.lambda);
        CHECK(f.value(-u) == e.value);
        CHECK(f.value(u.cwiseAbs()) == e.value);
        // exponent shrinks with eps
        CHECK(f.with_eps(0.1).value(u) <= e.value);
        CHECK(f.with_eps(0.0).value(u) >= e.value);
    }
}

TEST_CASE("ascent direction is the gradient representative")
{
    const auto disc = disk_disc(1.0 / 16);
    for (double alpha : {0.0, 2.5}) {
        const TMFunctional f(disc, {.beta = 0.5, .alpha = alpha, .eps = 0.05});
        const SparseMatrix a = disc->ops.stiffness - alpha * disc->ops.mass;
        std::mt19937 rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            const Vector u = random_field(*disc->mesh, rng, 0.8);
            const Vector v = random_field(*disc->mesh, rng, 1.0);
            const TMEvaluation e = f.evaluate(u);
            const Vector d = f.ascent_direction(e);
            const double lhs = v.dot(a * d);
            const double t = 1e-6;
            const double derivative = (f.value(u + t * v) - f.value(u - t * v)) / (2 * t);
            const double rhs = derivative / (2.0 * f.gamma() * e.lambda);
            CHECK(std::abs(lhs - rhs) <= 1e-4 * std::abs(rhs));
        }
    }
}

TEST_CASE("Euler-Lagrange residual")
{
    const auto disc = disk_disc(1.0 / 16);
    const TMFunctional f(disc, {.beta = 0.5, .alpha = 0.0, .eps = 0.05});
    std::mt19937 rng(2);
    Vector u = random_field(*disc->mesh, rng, 1.0);
    u /= f.norm(u);
    CHECK(f.el_residual(u) > 1e-3);

    // u := ascent direction of something else is not a fixed point, but the
    // residual of d against its own load vanishes by construction.
    const TMEvaluation e = f.evaluate(u);
    const Vector d = f.ascent_direction(e);
    CHECK(f.el_residual(d, e.load, e.lambda) <= 1e-10 * d.norm());
}

TEST_CASE("subspace residual ignores load components in the eigenspace")
{
    const auto disc = disk_disc(1.0 / 16);
    const SpectralData basis = eigenspaces(disc->ops, 1);
    const double alpha = 0.5 * (basis.eigenvalues[0] + 14.7);
    const TMFunctional f(disc, {.beta = 0.5, .alpha = alpha, .eps = 0.05});
    std::mt19937 rng(9);
    Vector u = project_perp(disc->ops, basis, random_field(*disc->mesh, rng, 1.0));
    u /= f.norm(u);
    const TMEvaluation e = f.evaluate(u);
    const double r0 = f.el_residual(u, e.load, e.lambda, &basis);
    CHECK(r0 > 0.0);
    for (double t : {-3.0, 0.5, 10.0}) {
        const Vector shifted = e.load + t * (disc->ops.mass * basis.function(0));
        CHECK(f.el_residual(u, shifted, e.lambda, &basis) == doctest::Approx(r0).epsilon(1e-9));
    }
}

TEST_CASE("overflow is flagged instead of producing infinity")
{
    const auto disc = disk_disc(1.0 / 8);
    const TMFunctional f(disc, {.beta = 0.5, .alpha = 0.0, .eps = 0.0});
    const Vector u = Vector::Constant(static_cast<Eigen::Index>(disc->mesh->dof_count()), 20.0);
    const TMEvaluation e = f.evaluate(u);
    CHECK(e.capped == disc->mesh->dof_count());
    CHECK(std::isfinite(e.value));
}

TEST_CASE("functional agrees between kernel variants")
{
    if (!simd::cpu_has_avx2()) return;
    const auto disc = disk_disc(1.0 / 16);
    const TMFunctional f(disc, {.beta = 0.25, .alpha = 1.0, .eps = 0.01});
    std::mt19937 rng(4);
    const Vector u = random_field(*disc->mesh, rng, 1.5);
    const simd::Isa prev = simd::set_isa(simd::Isa::scalar);
    const TMEvaluation s = f.evaluate(u);
    simd::set_isa(simd::Isa::avx2);
    const TMEvaluation v = f.evaluate(u);
    simd::set_isa(prev);
    CHECK(v.value == doctest::Approx(s.value).epsilon(1e-13));
    CHECK(v.lambda == doctest::Approx(s.lambda).epsilon(1e-13));
    CHECK((v.load - s.load).norm() <= 1e-14 * s.load.norm());
}

TEST_CASE("one-shot helpers agree with the class")
{
    const auto disc = disk_disc(1.0 / 8);
    const TMParams p{.beta = 0.5, .alpha = 0.0, .eps = 0.1};
    const TMFunctional f(disc, p);
    std::mt19937 rng(1);
    const Field u(disc->mesh, random_field(*disc->mesh, rng, 1.0));
    CHECK(tm_value(u, p) == doctest::Approx(f.value(u.values())).epsilon(1e-13));
    CHECK(lambda_eps(u, p) == doctest::Approx(f.lambda(u.values())).epsilon(1e-13));
}
