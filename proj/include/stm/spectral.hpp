#pragma once

#include "stm/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>
#include <vector>

namespace stm {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Function in the discrete H^1_0 space: coefficients over interior DOFs.
class Field {
public:
    Field(std::shared_ptr<const Mesh> mesh, Vector values);
    static Field zeros(std::shared_ptr<const Mesh> mesh);
    static Field from_nodal(std::shared_ptr<const Mesh> mesh, std::span<const double> nodal);

    const Vector& values() const { return values_; }
    Vector& values() { return values_; }
    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    // All-node vector, zero on the boundary.
    std::vector<double> nodal() const;
    double at_node(int node) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    Vector values_;
};

// P1 stiffness and mass, both on the interior DOFs and on all nodes.
struct Operators {
    SparseMatrix stiffness;
    SparseMatrix mass;
    SparseMatrix stiffness_full;
    SparseMatrix mass_full;
};

Operators assemble(const Mesh& mesh);

// Mesh plus its assembled operators; shared read-only by the solvers.
struct Discretization {
    std::shared_ptr<const Mesh> mesh;
    Operators ops;

    static std::shared_ptr<const Discretization> create(Mesh mesh);
};

struct EigenOptions {
    double tolerance = 1e-10; // on ||K psi - lambda M psi|| / ||K psi||
    int max_iterations = 1000;
    double group_gap = 1e-6;  // relative gap separating distinct eigenvalues
    unsigned seed = 20170101;
};

// Generalized Dirichlet eigenpairs K psi = lambda M psi, ascending and
// M-orthonormal, with eigenvalues grouped into numerically distinct eigenspaces.
struct SpectralData {
    std::vector<double> eigenvalues;
    Eigen::MatrixXd vectors; // dof x count
    std::vector<int> group;  // eigenspace id per eigenpair
    std::vector<double> residuals;
    int iterations = 0;

    std::size_t size() const { return eigenvalues.size(); }
    int group_count() const { return group.empty() ? 0 : group.back() + 1; }
    int multiplicity(int g) const;
    double group_value(int g) const;
    // Basis of E_ell: the eigenfunctions of the first `ell` eigenspaces.
    SpectralData leading(int ell) const;
    Vector function(std::size_t i) const { return vectors.col(static_cast<Eigen::Index>(i)); }
};

// At least `count` eigenpairs; the result is extended so that the last
// eigenspace is complete.
SpectralData eigenpairs(const Operators& ops, int count, const EigenOptions& options = {});
// Enough eigenpairs to cover the first `groups` distinct eigenvalues.
SpectralData eigenspaces(const Operators& ops, int groups, const EigenOptions& options = {});

double rayleigh_quotient(const Operators& ops, const Vector& u);
// (u^T K u - alpha u^T M u)^{1/2}; throws when the radicand is negative.
double norm_1alpha(const Operators& ops, const Vector& u, double alpha);
Field normalize_1alpha(const Operators& ops, const Field& u, double alpha);
// u - sum_i (u, psi_i)_{L2} psi_i.
Vector project_perp(const Operators& ops, const SpectralData& basis, const Vector& u);
Field project_perp(const Operators& ops, const SpectralData& basis, const Field& u);

// Factorization of K - alpha M on the interior DOFs. Uses LDL^T and falls
// back to sparse LU when the shifted matrix is indefinite and LDL^T is not
// accurate enough.
class ShiftedSolver {
public:
    ShiftedSolver(const Operators& ops, double alpha);
    ~ShiftedSolver();
    ShiftedSolver(const ShiftedSolver&) = delete;
    ShiftedSolver& operator=(const ShiftedSolver&) = delete;

    Vector solve(const Vector& rhs) const;
    double alpha() const { return alpha_; }
    const SparseMatrix& matrix() const { return matrix_; }

private:
    struct Impl;
    double alpha_;
    SparseMatrix matrix_;
    std::unique_ptr<Impl> impl_;
};

// CSV: index, lambda, group, residual.
void write_eigen_csv(std::ostream& out, const SpectralData& data, const std::string& header_comment = {});

} // namespace stm
