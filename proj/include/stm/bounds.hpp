#pragma once

#include "stm/functional.hpp"
#include "stm/green.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace stm {

// weighted_volume + (pi/(1-beta)) e^{1 + 4 pi (1-beta) A0}
double upper_bound(double beta, double a0, double weighted_volume);

// 2 pi (s - i)^2 / (log delta - log(R r_eps^{1/(1-beta)})): Dirichlet energy of
// the radial harmonic function equal to s on |x| = R r_eps^{1/(1-beta)} and
// to i on |x| = delta.
double capacity_energy(double s, double i, double delta, double R, double r_eps, double beta);
// Same, with the radii given by their logarithms (r_eps may underflow).
double capacity_energy_log(double s, double i, double log_delta, double log_R, double log_r_eps, double beta);

// Three-piece test function: bubble profile on B_{R eps}, G/c outside
// B_{2 R eps}, with the regular part of G cut off in between.
struct TestFunction {
    double beta = 0.5;
    double alpha = 0.0;
    double eps = 0.0;
    double R = 0.0;
    double c2 = 0.0;
    double c = 0.0;
    double b = 0.0;
    double a0 = 0.0;
    double inner_radius = 0.0; // R eps
    double outer_radius = 0.0; // 2 R eps
    Field phi;
    std::shared_ptr<const Discretization> disc;
    double norm2 = 0.0;       // ||phi||_{1,alpha}^2 of the assembled field
    double mismatch = 0.0;    // jump between the pieces at R eps
    double peak = 0.0;        // c + b/c

    // (b - 1/(4 pi (1-beta))) R^{2-2beta}
    double b_remainder_ratio() const;
};

TestFunction build_test_function(const GreenFunction& g, double beta, double eps);

// Pieces of the test function at radius r (for diagnostics and tests).
double test_function_inner(const TestFunction& t, double r);

struct ProjectedTestFunction {
    Field phi;                       // unit (1,alpha) norm, orthogonal to E_ell
    std::vector<double> pairings;    // (phi_eps, psi_i) before projection
    double projected_norm2 = 0.0;    // ||phi_eps - sum (phi_eps, psi_i) psi_i||^2_{1,alpha}
    double max_residual_pairing = 0.0; // max |(phi*, psi_i)|
    double norm = 0.0;               // ||phi*||_{1,alpha}
};

ProjectedTestFunction project_test_function(const TestFunction& t, const SpectralData& basis);

struct BoundRow {
    double eps = 0.0;
    double R = 0.0;
    double c2 = 0.0;
    double b = 0.0;
    double norm = 0.0;          // ||phi_eps||_{1,alpha}
    double value = 0.0;         // functional at phi/||phi|| with gamma = 4 pi (1-beta)
    double value_raw = 0.0;     // functional at phi without normalization
    double value_consistent = 0.0;
    double gap_term = 0.0;      // (4 pi (1-beta)/c^2) integral |x|^{-2beta} G^2
    double excess = 0.0;        // value - bound
    double ratio = 0.0;         // excess / gap_term
    double mismatch = 0.0;
    double max_pairing = 0.0;   // subspace mode: max |(phi_eps, psi_i)|
    double pairing_log2 = 0.0;  // max |(phi_eps, psi_i)| log^2 eps
};

struct BoundReport {
    double beta = 0.5;
    double alpha = 0.0;
    double a0 = 0.0;
    double weighted_volume = 0.0;
    double bound = 0.0;
    double weighted_g2 = 0.0;
    bool subspace = false;
    std::vector<BoundRow> rows;
};

// Evaluates the test-function family against the upper bound. In subspace
// mode (the Green function carries a basis) the projected family is used.
// Rows are computed on up to `jobs` threads and returned in input order.
BoundReport verify_exceeds(const GreenFunction& g, double beta, const std::vector<double>& eps_list, int jobs = 1,
                           const QuadratureOptions& quad = {});

// Mesh options resolving every test-function scale for the given epsilons.
MeshOptions test_function_mesh_options(double beta, const std::vector<double>& eps_list);

void write_bound_csv(std::ostream& out, const BoundReport& report, const std::string& header_comment = {});
std::string bound_report_json(const BoundReport& report);

} // namespace stm
