#include "stm/bounds.hpp"

#include "stm/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <thread>

namespace stm {

namespace {

constexpr double kPi = std::numbers::pi;

double k_of(double beta) { return 1.0 / (4.0 * kPi * (1.0 - beta)); }

void check_beta(double beta)
{
    STM_REQUIRE(beta >= 0.0 && beta < 1.0, ConfigError, "beta must lie in [0, 1)");
}

} // namespace

double upper_bound(double beta, double a0, double weighted_volume)
{
    check_beta(beta);
    return weighted_volume + kPi / (1.0 - beta) * std::exp(1.0 + 4.0 * kPi * (1.0 - beta) * a0);
}

double capacity_energy_log(double s, double i, double log_delta, double log_R, double log_r_eps, double beta)
{
    check_beta(beta);
    const double denom = log_delta - (log_R + log_r_eps / (1.0 - beta));
    STM_REQUIRE(denom > 0.0, ConfigError, "capacity annulus is empty");
    return 2.0 * kPi * (s - i) * (s - i) / denom;
}

double capacity_energy(double s, double i, double delta, double R, double r_eps, double beta)
{
    STM_REQUIRE(delta > 0.0 && R > 0.0 && r_eps > 0.0, ConfigError, "capacity radii must be positive");
    return capacity_energy_log(s, i, std::log(delta), std::log(R), std::log(r_eps), beta);
}

double TestFunction::b_remainder_ratio() const
{
    return (b - k_of(beta)) * std::pow(R, 2.0 - 2.0 * beta);
}

double test_function_inner(const TestFunction& t, double r)
{
    const double a = kPi / (1.0 - t.beta);
    return t.c + (-k_of(t.beta) * std::log1p(a * std::pow(r / t.eps, 2.0 - 2.0 * t.beta)) + t.b) / t.c;
}

TestFunction build_test_function(const GreenFunction& g, double beta, double eps)
{
    check_beta(beta);
    STM_REQUIRE(eps > 0.0 && eps < 1.0, ConfigError, "test-function scale must lie in (0, 1)");
    const Mesh& mesh = g.mesh();
    const double k = k_of(beta);
    const double a = kPi / (1.0 - beta);

    TestFunction t{.phi = Field::zeros(g.discretization()->mesh), .disc = g.discretization()};
    t.beta = beta;
    t.alpha = g.alpha();
    t.eps = eps;
    t.a0 = g.a0();
    t.R = std::pow(-std::log(eps), 1.0 / (1.0 - beta));
    t.inner_radius = t.R * eps;
    t.outer_radius = 2.0 * t.inner_radius;

    double inradius = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
        if (mesh.is_boundary(static_cast<int>(i))) inradius = std::min(inradius, norm(mesh.node(static_cast<int>(i))));
    STM_REQUIRE(t.outer_radius < inradius, ConfigError, "B_{2 R eps} does not fit inside the domain");

    // Leading-order normalization constant; b then follows from continuity at R eps.
    t.c2 = -std::log(eps) / (2.0 * kPi) + t.a0 - k + k * std::log(a);
    STM_REQUIRE(t.c2 > 0.0, ConfigError, "c^2 <= 0: epsilon too large for this domain");
    t.c = std::sqrt(t.c2);
    t.b = -t.c2 - std::log(t.inner_radius) / (2.0 * kPi) + t.a0 + k * std::log1p(a * std::pow(t.R, 2.0 - 2.0 * beta));
    t.peak = t.c + t.b / t.c;

    const double outer_at_inner = (-std::log(t.inner_radius) / (2.0 * kPi) + t.a0) / t.c;
    t.mismatch = std::abs(test_function_inner(t, t.inner_radius) - outer_at_inner);

    Vector& phi = t.phi.values();
    for (std::size_t d = 0; d < mesh.dof_count(); ++d) {
        const int node = mesh.node_of(static_cast<int>(d));
        const double r = norm(mesh.node(node));
        double v;
        if (r <= t.inner_radius) {
            v = test_function_inner(t, r);
        } else if (r < t.outer_radius) {
            const double eta = std::clamp((t.outer_radius - r) / t.inner_radius, 0.0, 1.0);
            v = (g.at_node(node) - eta * g.remainder_at_node(node)) / t.c;
        } else {
            v = g.at_node(node) / t.c;
        }
        phi[static_cast<Eigen::Index>(d)] = v;
    }
    const Operators& ops = g.discretization()->ops;
    t.norm2 = phi.dot(ops.stiffness * phi) - t.alpha * phi.dot(ops.mass * phi);
    return t;
}

ProjectedTestFunction project_test_function(const TestFunction& t, const SpectralData& basis)
{
    const Mesh& mesh = t.phi.mesh();
    STM_REQUIRE(static_cast<std::size_t>(basis.vectors.rows()) == mesh.dof_count(), ConfigError,
                "basis does not match the test-function mesh");
    const Operators& ops = t.disc->ops;
    ProjectedTestFunction out{.phi = Field::zeros(t.phi.mesh_ptr()), .pairings = {}};
    const Vector mphi = ops.mass * t.phi.values();
    for (std::size_t i = 0; i < basis.size(); ++i) out.pairings.push_back(basis.function(i).dot(mphi));
    Vector tilde = project_perp(ops, basis, t.phi.values());
    tilde = project_perp(ops, basis, tilde);
    out.projected_norm2 = tilde.dot(ops.stiffness * tilde) - t.alpha * tilde.dot(ops.mass * tilde);
    STM_REQUIRE(out.projected_norm2 > 0.0, SolverError, "projected test function has zero (1,alpha) norm");
    out.phi.values() = tilde / std::sqrt(out.projected_norm2);
    out.norm = norm_1alpha(ops, out.phi.values(), t.alpha);
    const Vector mstar = ops.mass * out.phi.values();
    for (std::size_t i = 0; i < basis.size(); ++i)
        out.max_residual_pairing = std::max(out.max_residual_pairing, std::abs(basis.function(i).dot(mstar)));
    return out;
}

MeshOptions test_function_mesh_options(double beta, const std::vector<double>& eps_list)
{
    STM_REQUIRE(!eps_list.empty(), ConfigError, "empty epsilon list");
    MeshOptions opt;
    const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
    opt.core_size = eps_min / 64.0;
    opt.core_ratio = 1.05;
    for (double eps : eps_list) {
        const double R = std::pow(-std::log(eps), 1.0 / (1.0 - beta));
        opt.snap_radii.push_back(R * eps);
        opt.snap_radii.push_back(2.0 * R * eps);
    }
    return opt;
}

BoundReport verify_exceeds(const GreenFunction& g, double beta, const std::vector<double>& eps_list, int jobs,
                           const QuadratureOptions& quad)
{
    check_beta(beta);
    STM_REQUIRE(!eps_list.empty(), ConfigError, "empty epsilon list");
    BoundReport rep;
    rep.beta = beta;
    rep.alpha = g.alpha();
    rep.a0 = g.a0();
    rep.subspace = g.basis().has_value();

    const TMFunctional f(g.discretization(), {.beta = beta, .alpha = g.alpha(), .eps = 0.0, .gamma = 4.0 * kPi * (1.0 - beta)},
                         quad);
    rep.weighted_volume = f.weighted_volume();
    rep.bound = upper_bound(beta, rep.a0, rep.weighted_volume);
    rep.weighted_g2 = weighted_g_squared(g, beta, quad);

    rep.rows.resize(eps_list.size());
    auto work = [&](std::size_t idx) {
        const double eps = eps_list[idx];
        const TestFunction t = build_test_function(g, beta, eps);
        BoundRow& row = rep.rows[idx];
        row.eps = eps;
        row.R = t.R;
        row.c2 = t.c2;
        row.b = t.b;
        row.mismatch = t.mismatch;
        Vector u;
        if (rep.subspace) {
            const ProjectedTestFunction p = project_test_function(t, *g.basis());
            for (double v : p.pairings) row.max_pairing = std::max(row.max_pairing, std::abs(v));
            row.pairing_log2 = row.max_pairing * std::log(eps) * std::log(eps);
            row.norm = std::sqrt(p.projected_norm2);
            u = p.phi.values();
            row.value_raw = f.value(t.phi.values());
        } else {
            STM_REQUIRE(t.norm2 > 0.0, SolverError, "test function has nonpositive (1,alpha) norm");
            row.norm = std::sqrt(t.norm2);
            row.value_raw = f.value(t.phi.values());
            u = t.phi.values() / row.norm;
        }
        row.value = f.value(u);
        row.value_consistent = f.value_consistent(u);
        row.gap_term = 4.0 * kPi * (1.0 - beta) / t.c2 * rep.weighted_g2;
        row.excess = row.value - rep.bound;
        row.ratio = row.excess / row.gap_term;
    };

    const std::size_t n = eps_list.size();
    const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, n);
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += threads) work(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return rep;
}

void write_bound_csv(std::ostream& out, const BoundReport& r, const std::string& header_comment)
{
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << std::setprecision(12);
    out << "# beta=" << r.beta << " alpha=" << r.alpha << " A0=" << r.a0 << " weighted_volume=" << r.weighted_volume
        << " bound=" << r.bound << " weighted_g2=" << r.weighted_g2 << " subspace=" << (r.subspace ? 1 : 0) << '\n';
    out << "eps,R,c2,b,norm,value,value_raw,value_consistent,gap_term,excess,ratio,mismatch,max_pairing,pairing_log2\n";
    for (const auto& row : r.rows) {
        out << row.eps << ',' << row.R << ',' << row.c2 << ',' << row.b << ',' << row.norm << ',' << row.value << ','
            << row.value_raw << ',' << row.value_consistent << ',' << row.gap_term << ',' << row.excess << ','
            << row.ratio << ',' << row.mismatch << ',' << row.max_pairing << ',' << row.pairing_log2 << '\n';
    }
}

std::string bound_report_json(const BoundReport& r)
{
    nlohmann::json j;
    j["beta"] = r.beta;
    j["alpha"] = r.alpha;
    j["A0"] = r.a0;
    j["weighted_volume"] = r.weighted_volume;
    j["bound"] = r.bound;
    j["weighted_g2"] = r.weighted_g2;
    j["subspace"] = r.subspace;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"eps", row.eps},
                             {"R", row.R},
                             {"c2", row.c2},
                             {"b", row.b},
                             {"norm", row.norm},
                             {"value", row.value},
                             {"value_raw", row.value_raw},
                             {"value_consistent", row.value_consistent},
                             {"gap_term", row.gap_term},
                             {"excess", row.excess},
                             {"ratio", row.ratio},
                             {"mismatch", row.mismatch},
                             {"max_pairing", row.max_pairing},
                             {"pairing_log2", row.pairing_log2}});
    }
    return j.dump(2);
}

} // namespace stm
