#include "stm/green.hpp"

#include "stm/error.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace stm {

double log_singularity(Vec2 x) { return -std::log(norm(x)) / (2.0 * std::numbers::pi); }

GreenFunction::GreenFunction(std::shared_ptr<const Discretization> disc, std::vector<double> w, double alpha,
                             std::optional<SpectralData> basis)
    : disc_(std::move(disc)), w_(std::move(w)), alpha_(alpha), basis_(std::move(basis))
{
    STM_REQUIRE(w_.size() == disc_->mesh->node_count(), ConfigError, "regular part has wrong length");
    locator_ = std::make_shared<MeshLocator>(disc_->mesh);
}

std::vector<double> GreenFunction::sink_values() const
{
    std::vector<double> out;
    if (!basis_) return out;
    const int d0 = mesh().dof_of(mesh().origin_node());
    for (std::size_t i = 0; i < basis_->size(); ++i)
        out.push_back(basis_->vectors(d0, static_cast<Eigen::Index>(i)));
    return out;
}

std::optional<double> GreenFunction::operator()(Vec2 x) const
{
    const auto w = locator_->interpolate(w_, x);
    if (!w) return std::nullopt;
    if (x == Vec2{}) return std::numeric_limits<double>::infinity();
    return log_singularity(x) + *w;
}

double GreenFunction::at_node(int i) const
{
    if (i == mesh().origin_node()) return std::numeric_limits<double>::infinity();
    return log_singularity(mesh().node(i)) + w_[static_cast<std::size_t>(i)];
}

namespace {

// Integral of s * f_h over the domain for a nodal P1 field f_h.
double integrate_s_times(const SingularQuadrature& q, const std::vector<double>& nodal)
{
    const Mesh& mesh = q.mesh();
    return q.integrate([&](const SingularQuadrature::Point& p, std::size_t t) {
        const auto& tri = mesh.triangles()[t];
        double f = 0.0;
        for (std::size_t k = 0; k < 3; ++k) f += p.bary[k] * nodal[static_cast<std::size_t>(tri[k])];
        return log_singularity(p.x) * f;
    });
}

Vector full_vector(const std::vector<double>& v)
{
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

double GreenFunction::pair_with(const Vector& psi) const
{
    const Mesh& m = mesh();
    const std::vector<double> nodal = m.expand(std::span<const double>(psi.data(), static_cast<std::size_t>(psi.size())));
    const SingularQuadrature q(m, 0.0);
    const double singular = integrate_s_times(q, nodal);
    const double regular = full_vector(w_).dot(disc_->ops.mass_full * full_vector(nodal));
    return singular + regular;
}

GreenFunction solve_green(std::shared_ptr<const Discretization> disc, double alpha, const Subspace* subspace,
                          const GreenOptions& options)
{
    STM_REQUIRE(disc != nullptr, ConfigError, "green solve requires a discretization");
    const Mesh& mesh = *disc->mesh;
    const Operators& ops = disc->ops;

    // Resonance / admissibility.
    std::vector<double> spectrum;
    double limit = 0.0;
    if (subspace) {
        spectrum = subspace->basis.eigenvalues;
        spectrum.push_back(subspace->next_eigenvalue);
        limit = subspace->next_eigenvalue;
    } else {
        const double l1 = options.lambda1 ? *options.lambda1 : eigenpairs(ops, 1).eigenvalues[0];
        spectrum = {l1};
        limit = l1;
    }
    for (double lam : spectrum)
        if (std::abs(alpha - lam) <= options.resonance_gap * std::abs(lam))
            throw SolverError("alpha resonates with eigenvalue " + std::to_string(lam));
    STM_REQUIRE(alpha < limit, ConfigError, "alpha must lie below the first admissible eigenvalue");

    const SingularQuadrature q(mesh, 0.0, options.quadrature);
    const std::size_t n = mesh.node_count();

    // Right-hand side alpha * integral s phi_j on all nodes.
    std::vector<double> rhs_full(n, 0.0);
    if (alpha != 0.0) {
        rhs_full = q.load_vector([&](const SingularQuadrature::Point& p, std::size_t) { return alpha * log_singularity(p.x); });
    }
    Vector rhs = Eigen::Map<const Vector>(mesh.restrict_to_dofs(rhs_full).data(), static_cast<Eigen::Index>(mesh.dof_count()));

    std::vector<double> sinks;
    if (subspace) {
        const int d0 = mesh.dof_of(mesh.origin_node());
        for (std::size_t i = 0; i < subspace->basis.size(); ++i) {
            const Vector psi = subspace->basis.function(i);
            sinks.push_back(psi[d0]);
            rhs -= psi[d0] * (ops.mass * psi);
        }
    }

    // Lifting of the boundary data w = -s.
    std::vector<double> lift(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (mesh.is_boundary(static_cast<int>(i))) lift[i] = -log_singularity(mesh.node(static_cast<int>(i)));
    const SparseMatrix a_full = ops.stiffness_full - alpha * ops.mass_full;
    const Vector lift_rhs = a_full * full_vector(lift);
    for (std::size_t d = 0; d < mesh.dof_count(); ++d)
        rhs[static_cast<Eigen::Index>(d)] -= lift_rhs[mesh.node_of(static_cast<int>(d))];

    const ShiftedSolver solver(ops, alpha);
    const Vector w0 = solver.solve(rhs);
    std::vector<double> w = lift;
    for (std::size_t d = 0; d < mesh.dof_count(); ++d)
        w[static_cast<std::size_t>(mesh.node_of(static_cast<int>(d)))] = w0[static_cast<Eigen::Index>(d)];

    std::optional<SpectralData> basis;
    if (subspace) basis = subspace->basis;
    GreenFunction g(disc, w, alpha, basis);

    if (subspace) {
        // Weak equation tested with psi_i: a(w, psi_i) - alpha (w + s, psi_i) + psi_i(0).
        const Vector w_full = full_vector(w);
        double worst = 0.0, correction = 0.0;
        std::vector<double> coeffs;
        for (std::size_t i = 0; i < subspace->basis.size(); ++i) {
            const Vector psi = subspace->basis.function(i);
            const std::vector<double> psi_nodal = mesh.expand(std::span<const double>(psi.data(), static_cast<std::size_t>(psi.size())));
            const Vector pf = full_vector(psi_nodal);
            const double s_psi = integrate_s_times(q, psi_nodal);
            const double res = pf.dot(a_full * w_full) - alpha * s_psi + sinks[i];
            worst = std::max(worst, std::abs(res));
            coeffs.push_back(g.pair_with(psi));
        }
        // Remove the E_ell component so that integral G psi_i = 0.
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            const Vector psi = subspace->basis.function(i);
            for (std::size_t d = 0; d < mesh.dof_count(); ++d)
                w[static_cast<std::size_t>(mesh.node_of(static_cast<int>(d)))] -= coeffs[i] * psi[static_cast<Eigen::Index>(d)];
            correction = std::max(correction, std::abs(coeffs[i]));
        }
        g = GreenFunction(disc, std::move(w), alpha, basis);
        g.sink_pairing_residual = worst;
        g.orthogonality_correction = correction;
    }
    return g;
}

double weighted_g_squared(const GreenFunction& g, double beta, const QuadratureOptions& quad)
{
    const Mesh& mesh = g.mesh();
    const SingularQuadrature q(mesh, beta, quad);
    const auto& w = g.regular_part();
    return q.integrate([&](const SingularQuadrature::Point& p, std::size_t t) {
        const auto& tri = mesh.triangles()[t];
        double wv = 0.0;
        for (std::size_t k = 0; k < 3; ++k) wv += p.bary[k] * w[static_cast<std::size_t>(tri[k])];
        const double G = log_singularity(p.x) + wv;
        return G * G;
    });
}

void write_green(std::ostream& out, const GreenFunction& g)
{
    out << "# green A0 " << std::setprecision(17) << g.a0() << " alpha " << g.alpha() << '\n';
    const NamedField f{"w", g.regular_part()};
    write_mesh(out, g.mesh(), std::span(&f, 1));
}

} // namespace stm
