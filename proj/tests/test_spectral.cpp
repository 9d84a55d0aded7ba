#include "doctest.h"

#include "stm/error.hpp"
#include "stm/spectral.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <random>

using namespace stm;

namespace {

double j01_sq() { const double j = boost::math::cyl_bessel_j_zero(0.0, 1); return j * j; }
double j11_sq() { const double j = boost::math::cyl_bessel_j_zero(1.0, 1); return j * j; }

Vector random_vector(Eigen::Index n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

} // namespace

TEST_CASE("stiffness and mass reproduce exact integrals of linear functions")
{
    const Mesh mesh = build_mesh(DomainSpec::square(1.0), 0.25);
    const Operators ops = assemble(mesh);
    // u = 2x - 3y + 1 on all nodes: |grad u|^2 = 13, integral over [-1,1]^2 = 52
    Vector u(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t i = 0; i < mesh.node_count(); ++i) u[static_cast<Eigen::Index>(i)] = 2 * mesh.nodes()[i].x - 3 * mesh.nodes()[i].y + 1;
    CHECK(u.dot(ops.stiffness_full * u) == doctest::Approx(52.0).epsilon(1e-12));
    // integral of (2x - 3y + 1)^2 = 4*4/3 + 9*4/3 + 4 = 64/3
    CHECK(u.dot(ops.mass_full * u) == doctest::Approx(64.0 / 3.0).epsilon(1e-12));

    const SparseMatrix kt = ops.stiffness.transpose();
    CHECK((ops.stiffness - kt).norm() == doctest::Approx(0.0));
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(mesh.dof_count()));
    CHECK(ones.dot(ops.stiffness * ones) > 0.0);
    CHECK(ones.dot(ops.mass * ones) > 0.0);
}

TEST_CASE("unit disk eigenvalues against Bessel zeros")
{
    const Operators ops = assemble(build_mesh(DomainSpec::disk(1.0), 1.0 / 32));
    const SpectralData data = eigenspaces(ops, 2);
    REQUIRE(data.group_count() >= 2);
    CHECK(std::abs(data.group_value(0) - j01_sq()) / j01_sq() < 0.01);
    CHECK(std::abs(data.group_value(1) - j11_sq()) / j11_sq() < 0.01);
    CHECK(data.group_value(0) > j01_sq());
    CHECK(data.multiplicity(0) == 1);
    CHECK(data.multiplicity(1) == 2);

    for (std::size_t i = 0; i < data.size(); ++i) {
        const Vector psi = data.function(i);
        CHECK(std::abs(rayleigh_quotient(ops, psi) - data.eigenvalues[i]) <= 1e-10 * data.eigenvalues[i]);
        CHECK(data.residuals[i] <= 1e-8);
        for (std::size_t j = 0; j < data.size(); ++j) {
            const double mij = psi.dot(ops.mass * data.function(j));
            CHECK(std::abs(mij - (i == j ? 1.0 : 0.0)) <= 1e-8);
        }
    }
}

TEST_CASE("first eigenvalue decreases monotonically under refinement")
{
    double previous = 1e300;
    for (double h : {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const double l1 = eigenpairs(assemble(build_mesh(DomainSpec::disk(1.0), h)), 1).eigenvalues[0];
        CHECK(l1 < previous);
        CHECK(l1 > j01_sq());
        previous = l1;
    }
}

TEST_CASE("norm_1alpha properties")
{
    const Operators ops = assemble(build_mesh(DomainSpec::disk(1.0), 1.0 / 8));
    const SpectralData data = eigenpairs(ops, 1);
    const double l1 = data.eigenvalues[0];
    const Vector u = random_vector(ops.stiffness.rows(), 7);
    const double energy = u.dot(ops.stiffness * u);
    CHECK(norm_1alpha(ops, u, 0.0) == doctest::Approx(std::sqrt(energy)).epsilon(1e-14));
    CHECK(norm_1alpha(ops, -2.5 * u, 0.3) == doctest::Approx(2.5 * norm_1alpha(ops, u, 0.3)).epsilon(1e-13));

    for (double alpha : {0.0, 0.5 * l1, 0.99 * l1}) {
        const double n2 = std::pow(norm_1alpha(ops, u, alpha), 2);
        CHECK(n2 <= energy * (1 + 1e-14));
        CHECK(n2 >= (1.0 - alpha / l1) * energy * (1 - 1e-12));
    }
    const Vector psi = data.function(0);
    for (double alpha : {0.9 * l1, 0.999 * l1, 0.999999 * l1})
        CHECK(std::pow(norm_1alpha(ops, psi, alpha), 2) == doctest::Approx(l1 - alpha).epsilon(1e-6));
    CHECK_THROWS_AS(norm_1alpha(ops, psi, 2.0 * l1), ConfigError);
}

TEST_CASE("project_perp is an orthogonal projector")
{
    const Operators ops = assemble(build_mesh(DomainSpec::disk(1.0), 1.0 / 8));
    const SpectralData basis = eigenspaces(ops, 2);
    CHECK(project_perp(ops, basis, basis.function(0)).norm() <= 1e-10);
    const Vector u = random_vector(ops.stiffness.rows(), 3);
    const Vector p = project_perp(ops, basis, u);
    for (std::size_t i = 0; i < basis.size(); ++i) CHECK(std::abs(p.dot(ops.mass * basis.function(i))) <= 1e-12);
    CHECK((project_perp(ops, basis, p) - p).norm() <= 1e-12 * p.norm());
}

TEST_CASE("leading basis keeps whole eigenspaces")
{
    const Operators ops = assemble(build_mesh(DomainSpec::disk(1.0), 1.0 / 8));
    const SpectralData data = eigenspaces(ops, 3);
    CHECK(data.leading(1).size() == 1);
    CHECK(data.leading(2).size() == 3);
}
