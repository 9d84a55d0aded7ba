#pragma once

#include "stm/functional.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stm {

// E_ell together with the first eigenpair outside it, for constrained runs
// on the orthogonal complement.
struct Subspace {
    int ell = 0;
    SpectralData basis;          // eigenfunctions spanning E_ell
    double next_eigenvalue = 0.0; // lambda_{ell+1}
    Vector next_function;         // psi_{ell+1}, symmetric representative of its eigenspace

    static Subspace compute(const Discretization& disc, int ell, const EigenOptions& options = {});
};

struct MaximizerOptions {
    double tolerance = 1e-6;      // EL residual at convergence
    int max_iterations = 10000;
    // Stop when the relative change of the functional stays below this for
    // `stall_window` consecutive iterations.
    double stall_tolerance = 1e-14;
    int stall_window = 20;
    double min_step = 1.0 / 1024;
    double max_step = 1.0;
    int anderson_depth = 5;       // 0: plain damped iteration
    bool keep_log = true;
    std::optional<Vector> initial; // warm start (interior coefficients)
};

struct IterationRecord {
    int iteration = 0;
    double value = 0.0;
    double residual = 0.0;
    double step = 0.0;
};

struct MaximizerResult {
    Field u;
    TMParams params;
    double value = 0.0;   // Lambda_{beta,eps}
    double c = 0.0;       // max of u
    Vec2 x{};             // argmax node position
    int x_node = 0;
    double lambda = 0.0;
    double norm = 0.0;    // ||u||_{1,alpha}
    double residual = 0.0;
    double max_projection = 0.0; // max_i |(u, psi_i)| in subspace mode
    int iterations = 0;
    bool converged = false;
    bool overflow = false;
    bool stalled = false;
    std::vector<IterationRecord> log;
};

// Damped normalized fixed point
//   u <- N((1 - tau) u + tau d / ||d||),  d = ascent direction,
// where N takes |u| (full space) or projects onto E_ell^perp and fixes the
// sign (subspace), then normalizes in the (1, alpha) norm.
MaximizerResult maximize_subcritical(const TMFunctional& functional, const Subspace* subspace = nullptr,
                                     const MaximizerOptions& options = {});

// Warm-started maximizers along a strictly decreasing epsilon schedule.
// Stops after the first overflow-flagged step.
struct SweepResult {
    std::vector<MaximizerResult> steps;
    bool stopped_on_overflow = false;
};
SweepResult continuation_sweep(const TMFunctional& functional, const std::vector<double>& eps_schedule,
                               const Subspace* subspace = nullptr, const MaximizerOptions& options = {});

// Best of `starts` runs from randomly perturbed initial fields (seeded).
MaximizerResult maximize_multistart(const TMFunctional& functional, const Subspace* subspace, int starts,
                                    unsigned long long seed, const MaximizerOptions& options = {});

// JSON record of parameters, scalars and flags (no field data).
std::string maximizer_result_json(const MaximizerResult& result);
// Mesh text format with the nodal field "u".
void write_maximizer_field(std::ostream& out, const MaximizerResult& result);
// One row per sweep step: eps, value, c, x, y, lambda, norm, residual, iterations, converged, overflow.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::string& header_comment = {});

// Lowest-index node attaining the maximum of a nodal vector.
int argmax_node(std::span<const double> nodal);

} // namespace stm
