#include "stm/blowup.hpp"

#include "stm/bubble.hpp"
#include "stm/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace stm {

namespace {

constexpr double kPi = std::numbers::pi;

struct Gradient {
    double gx, gy;
};

Gradient element_gradient(const Mesh& mesh, std::size_t t, const std::vector<double>& v)
{
    const auto& tri = mesh.triangles()[t];
    const Vec2 p0 = mesh.node(tri[0]), p1 = mesh.node(tri[1]), p2 = mesh.node(tri[2]);
    const double v0 = v[static_cast<std::size_t>(tri[0])];
    const double v1 = v[static_cast<std::size_t>(tri[1])];
    const double v2 = v[static_cast<std::size_t>(tri[2])];
    const double det = cross(p1 - p0, p2 - p0);
    const Vec2 e1 = p1 - p0, e2 = p2 - p0;
    const double d1 = v1 - v0, d2 = v2 - v0;
    return {(d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det};
}

double element_energy(const Mesh& mesh, std::size_t t, const std::vector<double>& v)
{
    const Gradient g = element_gradient(mesh, t, v);
    return (g.gx * g.gx + g.gy * g.gy) * mesh.triangle_area(t);
}

// Area of the part of triangle t inside B_delta(x), from 64 sub-triangles.
double area_inside(const Mesh& mesh, std::size_t t, Vec2 x, double delta)
{
    const auto& tri = mesh.triangles()[t];
    const Vec2 p0 = mesh.node(tri[0]), p1 = mesh.node(tri[1]), p2 = mesh.node(tri[2]);
    constexpr int n = 8; // 8^2 = 64 sub-triangles
    int inside = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; i + j < n; ++j) {
            // upward sub-triangle
            const double a = (i + 1.0 / 3.0) / n, b = (j + 1.0 / 3.0) / n;
            if (norm(p0 + a * (p1 - p0) + b * (p2 - p0) - x) <= delta) ++inside;
            if (i + j < n - 1) {
                const double a2 = (i + 2.0 / 3.0) / n, b2 = (j + 2.0 / 3.0) / n;
                if (norm(p0 + a2 * (p1 - p0) + b2 * (p2 - p0) - x) <= delta) ++inside;
            }
        }
    return mesh.triangle_area(t) * inside / (n * n);
}

double boundary_distance(const Mesh& mesh, Vec2 x)
{
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
        if (mesh.is_boundary(static_cast<int>(i))) d = std::min(d, norm(mesh.node(static_cast<int>(i)) - x));
    return d;
}

} // namespace

double log_blowup_scale(double c, double lambda, double beta, double eps)
{
    STM_REQUIRE(c > 0.0 && lambda > 0.0, ConfigError, "blow-up scale needs c > 0 and lambda > 0");
    return 0.5 * std::log(lambda) - std::log(c) - 2.0 * kPi * (1.0 - beta - eps) * c * c;
}

double blowup_scale(double c, double lambda, double beta, double eps)
{
    return std::exp(log_blowup_scale(c, lambda, beta, eps));
}

ConcentrationReport concentration_report(const Field& u, double delta)
{
    const Mesh& mesh = u.mesh();
    const std::vector<double> v = u.nodal();
    ConcentrationReport r;
    r.x_node = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[static_cast<std::size_t>(r.x_node)]) r.x_node = static_cast<int>(i);
    r.x = mesh.node(r.x_node);
    r.c = v[static_cast<std::size_t>(r.x_node)];
    STM_REQUIRE(delta > 0.0, ConfigError, "concentration radius must be positive");

    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const double e = element_energy(mesh, t, v);
        r.total_energy += e;
        const auto& tri = mesh.triangles()[t];
        int in = 0;
        double dmin = std::numeric_limits<double>::infinity();
        for (int k : tri) {
            const double d = norm(mesh.node(k) - r.x);
            dmin = std::min(dmin, d);
            if (d <= delta) ++in;
        }
        if (in == 3) {
            r.ball_energy += e;
        } else if (in > 0 || dmin <= delta + std::sqrt(mesh.triangle_area(t)) * 2.0) {
            r.ball_energy += e * area_inside(mesh, t, r.x, delta) / mesh.triangle_area(t);
        }
    }
    r.energy_fraction = r.total_energy > 0.0 ? r.ball_energy / r.total_energy : 0.0;
    return r;
}

RescaledProfile rescaled_profile(const Field& u, Vec2 x, double c, double log_r_eps, double beta, double R, int radial,
                                 int angular)
{
    STM_REQUIRE(R > 0.0 && radial >= 2 && angular >= 1, ConfigError, "invalid profile sampling");
    const Mesh& mesh = u.mesh();
    RescaledProfile p;
    p.R = R;
    p.scale = std::exp(log_r_eps / (1.0 - beta));
    if (!(p.scale * R < boundary_distance(mesh, x)))
        throw GeometryError("rescaled ball leaves the domain");

    const MeshLocator loc(u.mesh_ptr());
    const BubbleProfile bubble(beta);
    const std::vector<double> v = u.nodal();
    // Exact bubble transplanted onto the nodes at the same scale.
    std::vector<double> transplant(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
        transplant[i] = c + bubble.phi0(norm(mesh.node(static_cast<int>(i)) - x) / p.scale) / c;

    auto sample = [&](double radius, double angle) {
        const Vec2 y{radius * std::cos(angle), radius * std::sin(angle)};
        const Vec2 z = x + p.scale * y;
        const auto uz = loc.interpolate(v, z);
        const auto tz = loc.interpolate(transplant, z);
        if (!uz || !tz) throw GeometryError("rescaled ball leaves the mesh");
        ProfileSample s{radius, angle, c * (*uz - c), bubble.phi0(radius)};
        p.sup_deviation = std::max(p.sup_deviation, std::abs(s.phi - s.phi0));
        p.interpolation_error = std::max(p.interpolation_error, std::abs(c * (*tz - c) - s.phi0));
        p.samples.push_back(s);
    };
    sample(0.0, 0.0);
    p.value_at_origin = p.samples.front().phi;
    for (int i = 1; i < radial; ++i)
        for (int j = 0; j < angular; ++j) sample(R * i / (radial - 1), 2.0 * kPi * j / angular);
    return p;
}

std::vector<double> truncate_min(const Field& u, double level)
{
    std::vector<double> v = u.nodal();
    for (double& x : v) x = std::min(x, level);
    return v;
}

std::vector<double> truncate_plus(const Field& u, double level)
{
    std::vector<double> v = u.nodal();
    for (double& x : v) x = std::max(x - level, 0.0);
    return v;
}

TruncationReport truncation_energy(const Field& u, double gamma, double c, Vec2 x, double plateau_radius)
{
    STM_REQUIRE(gamma > 0.0 && gamma <= 1.0, ConfigError, "truncation level gamma must lie in (0, 1]");
    const Mesh& mesh = u.mesh();
    const double level = gamma * c;
    const std::vector<double> v = u.nodal();
    const std::vector<double> lo = truncate_min(u, level);
    const std::vector<double> hi = truncate_plus(u, level);
    TruncationReport r;
    r.gamma = gamma;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const double e = element_energy(mesh, t, v);
        const double em = element_energy(mesh, t, lo);
        const double ep = element_energy(mesh, t, hi);
        r.total_energy += e;
        r.min_energy += em;
        r.plus_energy += ep;
        const auto& tri = mesh.triangles()[t];
        int above = 0;
        for (int k : tri) above += v[static_cast<std::size_t>(k)] > level ? 1 : 0;
        if (above == 0 || above == 3)
            r.identity_error = std::max(r.identity_error, std::abs(e - em - ep));
        else
            r.crossing_defect += e - em - ep;
    }
    r.fraction = r.total_energy > 0.0 ? r.min_energy / r.total_energy : 0.0;
    if (plateau_radius > 0.0 && gamma < 1.0) {
        for (std::size_t i = 0; i < mesh.node_count(); ++i)
            if (norm(mesh.node(static_cast<int>(i)) - x) <= plateau_radius)
                r.plateau_deviation = std::max(r.plateau_deviation, std::abs(hi[i] / ((1.0 - gamma) * c) - 1.0));
    }
    return r;
}

WeakLimitReport weak_limit_compare(const Field& u, double c, double lambda, const GreenFunction& g, double r_in,
                                   double r_out, double theta)
{
    STM_REQUIRE(r_in > 0.0 && r_out > r_in, ConfigError, "annulus radii must satisfy 0 < r_in < r_out");
    const Mesh& mesh = u.mesh();
    STM_REQUIRE(&mesh == &g.mesh() || mesh.node_count() == g.mesh().node_count(), ConfigError,
                "field and Green function must share a mesh");
    const std::vector<double> v = u.nodal();
    WeakLimitReport r;
    r.theta = theta;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const double rr = norm(mesh.node(static_cast<int>(i)));
        if (rr >= r_in && rr <= r_out)
            r.sup_deviation = std::max(r.sup_deviation, std::abs(c * v[i] - g.at_node(static_cast<int>(i))));
    }
    const auto rule = triangle_rule(4);
    const auto& w = g.regular_part();
    double l2 = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const Vec2 p0 = mesh.node(tri[0]), p1 = mesh.node(tri[1]), p2 = mesh.node(tri[2]);
        const double rc = norm((1.0 / 3.0) * (p0 + p1 + p2));
        if (rc < r_in || rc > r_out) continue;
        for (const auto& q : rule) {
            const Vec2 pt = q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2;
            double uh = 0.0, wh = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                uh += q.bary[k] * v[static_cast<std::size_t>(tri[k])];
                wh += q.bary[k] * w[static_cast<std::size_t>(tri[k])];
            }
            const double d = c * uh - (log_singularity(pt) + wh);
            l2 += q.weight * mesh.triangle_area(t) * d * d;
        }
    }
    r.l2_deviation = std::sqrt(l2);
    r.lambda_over_c2 = lambda / (c * c);
    r.lambda_over_c_theta = lambda / std::pow(c, theta);
    return r;
}

TruncationInequality truncation_inequality(const TMFunctional& f, const Field& u, double gamma, double c, double lambda)
{
    TruncationInequality r;
    r.lhs = f.value(u.values());
    r.rhs = f.value_nodal(truncate_min(u, gamma * c)) + lambda / (gamma * gamma * c * c);
    r.holds = r.lhs <= r.rhs * (1.0 + 1e-13);
    return r;
}

BlowupRow diagnose_step(const TMFunctional& functional, const MaximizerResult& result, const DiagnoseOptions& options)
{
    const double beta = result.params.beta;
    const double eps = result.params.eps;
    BlowupRow row;
    row.eps = eps;
    row.c = result.c;
    row.lambda = result.lambda;
    row.value = result.value;
    row.value_consistent = functional.with_eps(eps).value_consistent(result.u.values());
    row.residual = result.residual;
    row.converged = result.converged;
    row.log_r_eps = log_blowup_scale(result.c, result.lambda, beta, eps);
    row.x_norm = norm(result.x);
    row.case_ratio = row.x_norm > 0.0 ? std::exp((1.0 - beta) * std::log(row.x_norm) - row.log_r_eps) : 0.0;

    row.energy_fraction = concentration_report(result.u, options.delta).energy_fraction;
    try {
        const RescaledProfile p =
            rescaled_profile(result.u, result.x, result.c, row.log_r_eps, beta, options.profile_R);
        row.profile_deviation = p.sup_deviation;
        row.profile_interp_error = p.interpolation_error;
    } catch (const GeometryError&) {
        row.profile_deviation = std::numeric_limits<double>::quiet_NaN();
        row.profile_interp_error = std::numeric_limits<double>::quiet_NaN();
    }
    const TruncationReport t = truncation_energy(result.u, options.gamma, result.c);
    row.truncation_fraction = t.fraction;
    row.truncation_plus_fraction = t.total_energy > 0.0 ? t.plus_energy / t.total_energy : 0.0;
    row.identity_error = t.identity_error;
    row.crossing_defect = t.crossing_defect;
    row.lambda_over_c2 = result.lambda / (result.c * result.c);
    const TruncationInequality l =
        truncation_inequality(functional.with_eps(eps), result.u, options.gamma, result.c, result.lambda);
    row.inequality_lhs = l.lhs;
    row.inequality_rhs = l.rhs;
    return row;
}

void write_blowup_csv(std::ostream& out, const std::vector<BlowupRow>& rows, const std::string& header_comment)
{
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << std::setprecision(12);
    out << "eps,c,lambda,value,value_consistent,log_r_eps,x_norm,case_ratio,energy_fraction,profile_deviation,profile_interp_error,"
           "truncation_fraction,truncation_plus_fraction,identity_error,crossing_defect,lambda_over_c2,inequality_lhs,inequality_rhs,residual,converged\n";
    for (const auto& r : rows) {
        out << r.eps << ',' << r.c << ',' << r.lambda << ',' << r.value << ',' << r.value_consistent << ',' << r.log_r_eps << ',' << r.x_norm << ','
            << r.case_ratio << ',' << r.energy_fraction << ',' << r.profile_deviation << ',' << r.profile_interp_error
            << ',' << r.truncation_fraction << ',' << r.truncation_plus_fraction << ',' << r.identity_error << ','
            << r.crossing_defect << ',' << r.lambda_over_c2 << ',' << r.inequality_lhs << ',' << r.inequality_rhs << ',' << r.residual << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

} // namespace stm
