#pragma once

#include "stm/functional.hpp"
#include "stm/green.hpp"
#include "stm/maximizer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace stm {

// r_eps = sqrt(lambda) c^{-1} e^{-2 pi (1-beta-eps) c^2}, and its logarithm.
double blowup_scale(double c, double lambda, double beta, double eps);
double log_blowup_scale(double c, double lambda, double beta, double eps);

struct ConcentrationReport {
    int x_node = 0;
    Vec2 x{};
    double c = 0.0;
    double ball_energy = 0.0;  // integral of |grad u|^2 over B_delta(x)
    double total_energy = 0.0;
    double energy_fraction = 0.0;
};

// Elements cut by the circle are resolved on 64 congruent sub-triangles.
ConcentrationReport concentration_report(const Field& u, double delta);

struct ProfileSample {
    double radius = 0.0; // |y|
    double angle = 0.0;
    double phi = 0.0;    // c (u(x + s y) - c), s = r_eps^{1/(1-beta)}
    double phi0 = 0.0;
};

struct RescaledProfile {
    double scale = 0.0; // r_eps^{1/(1-beta)}
    double R = 0.0;
    std::vector<ProfileSample> samples;
    double sup_deviation = 0.0;
    double value_at_origin = 0.0;
    // Same deviation for the exact bubble transplanted onto the mesh at this
    // scale: an estimate of the interpolation error alone.
    double interpolation_error = 0.0;
};

// Samples on `radial` x `angular` polar points of B_R (plus the center).
// Throws GeometryError when the rescaled ball leaves the mesh.
RescaledProfile rescaled_profile(const Field& u, Vec2 x, double c, double log_r_eps, double beta, double R,
                                 int radial = 41, int angular = 16);

struct TruncationReport {
    double gamma = 0.0;
    double total_energy = 0.0;
    double min_energy = 0.0;      // energy of min(u, gamma c)
    double plus_energy = 0.0;     // energy of (u - gamma c)^+
    double fraction = 0.0;        // min_energy / total_energy
    double identity_error = 0.0;  // on elements not crossing gamma c
    double crossing_defect = 0.0; // total - min - plus on crossing elements
    double plateau_deviation = 0.0; // max |(u - gamma c)^+ / ((1-gamma) c) - 1| at nodes within `plateau_radius`
};

TruncationReport truncation_energy(const Field& u, double gamma, double c, Vec2 x = {}, double plateau_radius = 0.0);

// Nodal P1 fields for the truncations.
std::vector<double> truncate_min(const Field& u, double level);
std::vector<double> truncate_plus(const Field& u, double level);

struct WeakLimitReport {
    double sup_deviation = 0.0; // over annulus nodes
    double l2_deviation = 0.0;  // over annulus elements
    double lambda_over_c2 = 0.0;
    double lambda_over_c_theta = 0.0;
    double theta = 1.5;
};

// Compares c u with G on r_in <= |x| <= r_out.
WeakLimitReport weak_limit_compare(const Field& u, double c, double lambda, const GreenFunction& g, double r_in,
                                   double r_out, double theta = 1.5);

// Both sides of tm(u) <= tm(min(u, gamma c)) + lambda / (gamma^2 c^2).
struct TruncationInequality {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};
TruncationInequality truncation_inequality(const TMFunctional& f, const Field& u, double gamma, double c, double lambda);

// One CSV row per sweep step.
struct BlowupRow {
    double eps = 0.0;
    double c = 0.0;
    double lambda = 0.0;
    double value = 0.0;
    double value_consistent = 0.0; // functional with the exponential at quadrature points
    double log_r_eps = 0.0;
    double x_norm = 0.0;
    double case_ratio = 0.0; // |x|^{1-beta} / r_eps
    double energy_fraction = 0.0;
    double profile_deviation = 0.0;
    double profile_interp_error = 0.0;
    double truncation_fraction = 0.0;
    double truncation_plus_fraction = 0.0;
    double identity_error = 0.0;
    double crossing_defect = 0.0;
    double lambda_over_c2 = 0.0;
    double inequality_lhs = 0.0;
    double inequality_rhs = 0.0;
    double residual = 0.0;
    bool converged = false;
};

struct DiagnoseOptions {
    double delta = 0.1;     // concentration radius
    double profile_R = 5.0; // rescaled ball radius
    double gamma = 0.5;     // truncation level
};

// Full diagnostic row for one computed maximizer; `functional` supplies the
// mesh and beta, its epsilon is replaced by the result's. A rescaled ball
// that leaves the domain yields NaN profile entries.
BlowupRow diagnose_step(const TMFunctional& functional, const MaximizerResult& result,
                        const DiagnoseOptions& options = {});

void write_blowup_csv(std::ostream& out, const std::vector<BlowupRow>& rows, const std::string& header_comment = {});

} // namespace stm
