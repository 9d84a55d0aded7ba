#include "stm/spectral.hpp"

#include "stm/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

namespace stm {

Field::Field(std::shared_ptr<const Mesh> mesh, Vector values) : mesh_(std::move(mesh)), values_(std::move(values))
{
    STM_REQUIRE(mesh_ != nullptr, ConfigError, "field requires a mesh");
    STM_REQUIRE(static_cast<std::size_t>(values_.size()) == mesh_->dof_count(), ConfigError,
                "field length must equal the interior DOF count");
}

Field Field::zeros(std::shared_ptr<const Mesh> mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh->dof_count());
    return Field(std::move(mesh), Vector::Zero(n));
}

Field Field::from_nodal(std::shared_ptr<const Mesh> mesh, std::span<const double> nodal)
{
    const auto interior = mesh->restrict_to_dofs(nodal);
    return Field(std::move(mesh), Eigen::Map<const Vector>(interior.data(), static_cast<Eigen::Index>(interior.size())));
}

std::vector<double> Field::nodal() const
{
    return mesh_->expand({values_.data(), static_cast<std::size_t>(values_.size())});
}

double Field::at_node(int node) const
{
    const int d = mesh_->dof_of(node);
    return d < 0 ? 0.0 : values_(d);
}

Operators assemble(const Mesh& mesh)
{
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> k_full, m_full, k_in, m_in;
    k_full.reserve(9 * mesh.triangle_count());
    m_full.reserve(9 * mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const Vec2 p[3] = {mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])};
        const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
        STM_REQUIRE(area > 0.0, GeometryError, "mesh contains a non-positive triangle");
        // grad lambda_i = perp(p_{i+2} - p_{i+1}) / (2 area)
        Vec2 g[3];
        for (int i = 0; i < 3; ++i) {
            const Vec2 e = p[(i + 2) % 3] - p[(i + 1) % 3];
            g[i] = {-e.y / (2.0 * area), e.x / (2.0 * area)};
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double kij = area * dot(g[i], g[j]);
                const double mij = area / 12.0 * (i == j ? 2.0 : 1.0);
                k_full.emplace_back(tri[i], tri[j], kij);
                m_full.emplace_back(tri[i], tri[j], mij);
                const int di = mesh.dof_of(tri[i]);
                const int dj = mesh.dof_of(tri[j]);
                if (di >= 0 && dj >= 0) {
                    k_in.emplace_back(di, dj, kij);
                    m_in.emplace_back(di, dj, mij);
                }
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    const auto nd = static_cast<Eigen::Index>(mesh.dof_count());
    Operators ops;
    ops.stiffness_full.resize(n, n);
    ops.mass_full.resize(n, n);
    ops.stiffness.resize(nd, nd);
    ops.mass.resize(nd, nd);
    ops.stiffness_full.setFromTriplets(k_full.begin(), k_full.end());
    ops.mass_full.setFromTriplets(m_full.begin(), m_full.end());
    ops.stiffness.setFromTriplets(k_in.begin(), k_in.end());
    ops.mass.setFromTriplets(m_in.begin(), m_in.end());
    return ops;
}

std::shared_ptr<const Discretization> Discretization::create(Mesh mesh)
{
    auto d = std::make_shared<Discretization>();
    d->mesh = std::make_shared<const Mesh>(std::move(mesh));
    d->ops = assemble(*d->mesh);
    return d;
}

int SpectralData::multiplicity(int g) const
{
    return static_cast<int>(std::count(group.begin(), group.end(), g));
}

double SpectralData::group_value(int g) const
{
    for (std::size_t i = 0; i < group.size(); ++i)
        if (group[i] == g) return eigenvalues[i];
    throw ConfigError("eigenspace index out of range");
}

SpectralData SpectralData::leading(int ell) const
{
    STM_REQUIRE(ell >= 0, ConfigError, "ell must be nonnegative");
    STM_REQUIRE(ell < group_count() || (ell == group_count() && ell == 0), ConfigError,
                "not enough eigenspaces computed for the requested ell");
    SpectralData out;
    std::size_t m = 0;
    while (m < size() && group[m] < ell) ++m;
    out.eigenvalues.assign(eigenvalues.begin(), eigenvalues.begin() + static_cast<std::ptrdiff_t>(m));
    out.group.assign(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(m));
    out.residuals.assign(residuals.begin(), residuals.begin() + static_cast<std::ptrdiff_t>(m));
    out.vectors = vectors.leftCols(static_cast<Eigen::Index>(m));
    out.iterations = iterations;
    return out;
}

SpectralData eigenpairs(const Operators& ops, int count, const EigenOptions& options)
{
    const Eigen::Index n = ops.stiffness.rows();
    STM_REQUIRE(count >= 1, ConfigError, "eigenpair count must be at least 1");
    STM_REQUIRE(count <= n, ConfigError, "more eigenpairs requested than DOFs");
    const Eigen::Index p = std::min<Eigen::Index>(n, std::max<Eigen::Index>(count + 8, 2 * count));

    Eigen::SimplicialLDLT<SparseMatrix> solver(ops.stiffness);
    if (solver.info() != Eigen::Success) throw SolverError("stiffness factorization failed");

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = dist(rng);

    SpectralData out;
    Eigen::VectorXd theta;
    Eigen::Index target = count;
    std::vector<double> res;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const Eigen::MatrixXd Y = solver.solve(ops.mass * X);
        const Eigen::MatrixXd KY = ops.stiffness * Y;
        const Eigen::MatrixXd MY = ops.mass * Y;
        Eigen::MatrixXd Kr = Y.transpose() * KY;
        Eigen::MatrixXd Mr = Y.transpose() * MY;
        Kr = 0.5 * (Kr + Kr.transpose()).eval();
        Mr = 0.5 * (Mr + Mr.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Kr, Mr);
        if (ritz.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz step failed");
        theta = ritz.eigenvalues();
        X = Y * ritz.eigenvectors();

        target = count;
        while (target < p - 1 &&
               theta(target) - theta(target - 1) <= options.group_gap * std::abs(theta(target)))
            ++target;

        res.assign(static_cast<std::size_t>(target), 0.0);
        bool converged = target < p;
        for (Eigen::Index i = 0; i < target; ++i) {
            const Eigen::VectorXd kx = ops.stiffness * X.col(i);
            const Eigen::VectorXd r = kx - theta(i) * (ops.mass * X.col(i));
            res[static_cast<std::size_t>(i)] = r.norm() / X.col(i).norm();
            if (r.norm() > options.tolerance * kx.norm()) converged = false;
        }
        out.iterations = it;
        if (converged) break;
        if (it == options.max_iterations) {
            double worst = *std::max_element(res.begin(), res.end());
            throw SolverError("eigensolver did not converge; worst residual " + std::to_string(worst));
        }
    }

    out.vectors = X.leftCols(target);
    for (Eigen::Index i = 0; i < target; ++i) {
        auto col = out.vectors.col(i);
        Eigen::Index imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        if (col(imax) < 0.0) col = -col;
        out.eigenvalues.push_back(theta(i));
    }
    out.residuals = res;
    int g = 0;
    for (Eigen::Index i = 0; i < target; ++i) {
        if (i > 0 && theta(i) - theta(i - 1) > options.group_gap * std::abs(theta(i))) ++g;
        out.group.push_back(g);
    }
    return out;
}

SpectralData eigenspaces(const Operators& ops, int groups, const EigenOptions& options)
{
    STM_REQUIRE(groups >= 1, ConfigError, "need at least one eigenspace");
    int count = groups;
    for (;;) {
        SpectralData d = eigenpairs(ops, count, options);
        if (d.group_count() >= groups) {
            // trim trailing eigenspaces beyond the request
            std::size_t m = 0;
            while (m < d.size() && d.group[m] < groups) ++m;
            if (m < d.size()) {
                d.eigenvalues.resize(m);
                d.group.resize(m);
                d.residuals.resize(m);
                d.vectors = d.vectors.leftCols(static_cast<Eigen::Index>(m)).eval();
            }
            return d;
        }
        count = static_cast<int>(d.size()) + (groups - d.group_count());
    }
}

double rayleigh_quotient(const Operators& ops, const Vector& u)
{
    return u.dot(ops.stiffness * u) / u.dot(ops.mass * u);
}

double norm_1alpha(const Operators& ops, const Vector& u, double alpha)
{
    const double energy = u.dot(ops.stiffness * u);
    const double q = energy - alpha * u.dot(ops.mass * u);
    if (q < 0.0) {
        if (q >= -1e-12 * energy) return 0.0;
        throw ConfigError("norm_1alpha: negative radicand (alpha exceeds the Rayleigh quotient)");
    }
    return std::sqrt(q);
}

Field normalize_1alpha(const Operators& ops, const Field& u, double alpha)
{
    const double n = norm_1alpha(ops, u.values(), alpha);
    STM_REQUIRE(n > 0.0, ConfigError, "cannot normalize a field of zero (1,alpha)-norm");
    return Field(u.mesh_ptr(), u.values() / n);
}

Vector project_perp(const Operators& ops, const SpectralData& basis, const Vector& u)
{
    Vector out = u;
    const Vector mu = ops.mass * u;
    for (Eigen::Index i = 0; i < basis.vectors.cols(); ++i) out -= basis.vectors.col(i).dot(mu) * basis.vectors.col(i);
    return out;
}

Field project_perp(const Operators& ops, const SpectralData& basis, const Field& u)
{
    return Field(u.mesh_ptr(), project_perp(ops, basis, u.values()));
}

void write_eigen_csv(std::ostream& out, const SpectralData& data, const std::string& header_comment)
{
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << "index,lambda,group,residual\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < data.size(); ++i)
        out << i + 1 << ',' << data.eigenvalues[i] << ',' << data.group[i] << ',' << data.residuals[i] << '\n';
}


struct ShiftedSolver::Impl {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu;
};

ShiftedSolver::ShiftedSolver(const Operators& ops, double alpha)
    : alpha_(alpha), matrix_(ops.stiffness - alpha * ops.mass), impl_(std::make_unique<Impl>())
{
    impl_->ldlt.compute(matrix_);
    bool accurate = impl_->ldlt.info() == Eigen::Success;
    if (accurate) {
        // Probe the factorization on a smooth right-hand side.
        const Vector b = ops.mass * Vector::Ones(matrix_.rows());
        const Vector x = impl_->ldlt.solve(b);
        accurate = x.allFinite() && (matrix_ * x - b).norm() <= 1e-9 * b.norm();
    }
    if (!accurate) {
        impl_->lu = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
        impl_->lu->analyzePattern(matrix_);
        impl_->lu->factorize(matrix_);
        if (impl_->lu->info() != Eigen::Success)
            throw SolverError("K - alpha M is singular for alpha = " + std::to_string(alpha));
    }
}

ShiftedSolver::~ShiftedSolver() = default;

Vector ShiftedSolver::solve(const Vector& rhs) const
{
    Vector x = impl_->lu ? Vector(impl_->lu->solve(rhs)) : Vector(impl_->ldlt.solve(rhs));
    if (!x.allFinite()) throw SolverError("shifted solve produced non-finite values");
    return x;
}

} // namespace stm
