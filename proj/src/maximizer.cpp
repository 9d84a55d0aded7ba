#include "stm/maximizer.hpp"

#include "stm/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "json.hpp"

namespace stm {

Subspace Subspace::compute(const Discretization& disc, int ell, const EigenOptions& options)
{
    STM_REQUIRE(ell >= 1, ConfigError, "subspace mode requires ell >= 1");
    const SpectralData all = eigenspaces(disc.ops, ell + 1, options);
    Subspace s;
    s.ell = ell;
    s.basis = all.leading(ell);
    const std::size_t next = s.basis.size();
    s.next_eigenvalue = all.eigenvalues[next];

    // Within a degenerate next eigenspace, take the combination peaking on
    // the positive x-axis (a mesh symmetry axis when there is one), else at
    // the global maximum of the eigenspace envelope.
    std::vector<std::size_t> cols;
    for (std::size_t i = next; i < all.size() && all.group[i] == all.group[next]; ++i) cols.push_back(i);
    const Mesh& mesh = *disc.mesh;
    int best = -1, best_axis = -1;
    double env_best = -1.0, env_axis = -1.0;
    for (std::size_t k = 0; k < mesh.dof_count(); ++k) {
        double env = 0.0;
        for (std::size_t c : cols) env += all.vectors(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) *
                                          all.vectors(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
        const Vec2 p = mesh.node(mesh.node_of(static_cast<int>(k)));
        if (env > env_best * (1.0 + 1e-12)) {
            env_best = env;
            best = static_cast<int>(k);
        }
        if (std::abs(p.y) <= 1e-12 && p.x > 0.0 && env > env_axis * (1.0 + 1e-12)) {
            env_axis = env;
            best_axis = static_cast<int>(k);
        }
    }
    // Prefer the axis node unless the envelope there is clearly below its maximum.
    const int pick = best_axis >= 0 && env_axis >= 0.5 * env_best ? best_axis : best;
    Vector v = Vector::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
    for (std::size_t c : cols) v += all.vectors(pick, static_cast<Eigen::Index>(c)) * all.function(c);
    s.next_function = v / std::sqrt(v.dot(disc.ops.mass * v));
    return s;
}

int argmax_node(std::span<const double> nodal)
{
    int best = 0;
    for (std::size_t i = 1; i < nodal.size(); ++i)
        if (nodal[i] > nodal[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    return best;
}

namespace {

class Feasible {
public:
    Feasible(const TMFunctional& f, const Subspace* s) : f_(f), s_(s) {}

    Vector operator()(Vector v) const
    {
        if (s_) {
            // Two passes keep the projection at round-off level.
            v = project_perp(f_.ops(), s_->basis, v);
            v = project_perp(f_.ops(), s_->basis, v);
            Eigen::Index imax = 0;
            v.cwiseAbs().maxCoeff(&imax);
            if (v[imax] < 0.0) v = -v;
        } else {
            v = v.cwiseAbs();
        }
        const double n = f_.norm(v);
        STM_REQUIRE(n > 0.0, SolverError, "iterate collapsed to zero");
        return v / n;
    }

private:
    const TMFunctional& f_;
    const Subspace* s_;
};

// Anderson mixing of the fixed-point map u -> T(u) from the last `depth`
// differences of iterates and residuals f = T(u) - u.
class Anderson {
public:
    explicit Anderson(int depth) : depth_(std::max(depth, 0)) {}

    bool enabled() const { return depth_ > 0; }
    std::size_t size() const { return x_.size(); }

    void push(const Vector& x, Vector f)
    {
        x_.push_back(x);
        f_.push_back(std::move(f));
        if (x_.size() > static_cast<std::size_t>(depth_) + 1) {
            x_.erase(x_.begin());
            f_.erase(f_.begin());
        }
    }

    Vector extrapolate() const
    {
        const std::size_t m = x_.size() - 1;
        const Eigen::Index n = x_.back().size();
        Eigen::MatrixXd dF(n, static_cast<Eigen::Index>(m)), dX(n, static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) {
            dF.col(static_cast<Eigen::Index>(j)) = f_[j + 1] - f_[j];
            dX.col(static_cast<Eigen::Index>(j)) = x_[j + 1] - x_[j];
        }
        const Vector g = dF.colPivHouseholderQr().solve(f_.back());
        return x_.back() + f_.back() - (dX + dF) * g;
    }

private:
    int depth_;
    std::vector<Vector> x_, f_;
};

void check_preconditions(const TMFunctional& f, const Subspace* subspace)
{
    const TMParams& p = f.params();
    STM_REQUIRE(p.eps > 0.0 || p.gamma.has_value(), ConfigError, "maximizer requires eps > 0");
    if (subspace) {
        STM_REQUIRE(p.alpha < subspace->next_eigenvalue, ConfigError,
                    "alpha must be below the first eigenvalue outside E_ell");
    } else {
        const double l1 = eigenpairs(f.ops(), 1).eigenvalues[0];
        STM_REQUIRE(p.alpha < l1, ConfigError, "alpha must be below the first eigenvalue");
    }
}

Vector default_start(const TMFunctional& f, const Subspace* subspace)
{
    if (subspace) return subspace->next_function;
    return eigenpairs(f.ops(), 1).function(0);
}

MaximizerResult run(const TMFunctional& f, const Subspace* subspace, const MaximizerOptions& opt, Vector start)
{
    const Feasible feasible(f, subspace);
    const SpectralData* basis = subspace ? &subspace->basis : nullptr;
    Vector u = feasible(std::move(start));
    TMEvaluation e = f.evaluate(u);

    MaximizerResult r{.u = Field::zeros(f.discretization().mesh), .params = f.params(), .log = {}};
    double step = 1.0;
    Anderson anderson(opt.anderson_depth);
    int quiet = 0;
    int it = 0;
    for (;; ++it) {
        if (e.capped > 0) {
            r.overflow = true;
            r.residual = f.el_residual(u, e.load, e.lambda, basis);
            break;
        }
        r.residual = f.el_residual(u, e.load, e.lambda, basis);
        if (opt.keep_log) r.log.push_back({it, e.value, r.residual, step});
        if (r.residual <= opt.tolerance) {
            r.converged = true;
            break;
        }
        if (it >= opt.max_iterations) break;

        Vector d = f.ascent_direction(e);
        if (subspace) {
            d = project_perp(f.ops(), subspace->basis, d);
            d = project_perp(f.ops(), subspace->basis, d);
        }
        const double dn = f.norm(d);
        if (!(dn > 0.0)) {
            r.stalled = true;
            break;
        }
        d /= dn;

        bool accepted = false;
        Vector candidate;
        TMEvaluation ce;
        if (anderson.enabled()) {
            anderson.push(u, feasible(d) - u);
            if (anderson.size() >= 2) {
                candidate = feasible(anderson.extrapolate());
                ce = f.evaluate(candidate);
                accepted = ce.capped > 0 || ce.value >= e.value * (1.0 - 1e-15);
            }
        }
        for (double tau = step; !accepted && tau >= opt.min_step; tau *= 0.5) {
            candidate = feasible((1.0 - tau) * u + tau * d);
            ce = f.evaluate(candidate);
            if (ce.capped > 0 || ce.value >= e.value * (1.0 - 1e-15)) {
                accepted = true;
                step = std::min(opt.max_step, 2.0 * tau);
            }
        }
        if (!accepted) {
            r.stalled = true;
            break;
        }
        const double change = std::abs(ce.value - e.value) / e.value;
        u = std::move(candidate);
        e = std::move(ce);
        quiet = change < opt.stall_tolerance ? quiet + 1 : 0;
        if (quiet >= opt.stall_window) {
            r.residual = f.el_residual(u, e.load, e.lambda, basis);
            r.converged = r.residual <= opt.tolerance;
            r.stalled = !r.converged;
            ++it;
            break;
        }
    }

    r.iterations = it;
    r.value = e.value;
    r.lambda = e.lambda;
    r.norm = f.norm(u);
    if (basis) {
        const Vector mu = f.ops().mass * u;
        for (std::size_t i = 0; i < basis->size(); ++i)
            r.max_projection = std::max(r.max_projection, std::abs(basis->function(i).dot(mu)));
    }
    r.u = Field(f.discretization().mesh, u);
    const std::vector<double> nodal = r.u.nodal();
    r.x_node = argmax_node(nodal);
    r.c = nodal[static_cast<std::size_t>(r.x_node)];
    r.x = r.u.mesh().node(r.x_node);
    return r;
}

} // namespace

MaximizerResult maximize_subcritical(const TMFunctional& functional, const Subspace* subspace,
                                     const MaximizerOptions& options)
{
    check_preconditions(functional, subspace);
    Vector start = options.initial ? *options.initial : default_start(functional, subspace);
    return run(functional, subspace, options, std::move(start));
}

SweepResult continuation_sweep(const TMFunctional& functional, const std::vector<double>& eps_schedule,
                               const Subspace* subspace, const MaximizerOptions& options)
{
    STM_REQUIRE(!eps_schedule.empty(), ConfigError, "empty epsilon schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        STM_REQUIRE(eps_schedule[i] > 0.0, ConfigError, "epsilon schedule must be positive");
        STM_REQUIRE(i == 0 || eps_schedule[i] < eps_schedule[i - 1], ConfigError,
                    "epsilon schedule must be strictly decreasing");
    }
    const TMFunctional first = functional.with_eps(eps_schedule.front());
    check_preconditions(first, subspace);

    SweepResult out;
    Vector warm = options.initial ? *options.initial : default_start(first, subspace);
    for (double eps : eps_schedule) {
        const TMFunctional f = functional.with_eps(eps);
        MaximizerOptions o = options;
        o.initial.reset();
        Vector start = warm;
        out.steps.push_back(run(f, subspace, o, std::move(start)));
        warm = out.steps.back().u.values();
        if (out.steps.back().overflow) {
            out.stopped_on_overflow = true;
            break;
        }
    }
    return out;
}

MaximizerResult maximize_multistart(const TMFunctional& functional, const Subspace* subspace, int starts,
                                    unsigned long long seed, const MaximizerOptions& options)
{
    STM_REQUIRE(starts >= 1, ConfigError, "multistart needs at least one start");
    check_preconditions(functional, subspace);
    const Vector base = options.initial ? *options.initial : default_start(functional, subspace);
    const Mesh& mesh = *functional.discretization().mesh;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> coef(0.0, 1.0);

    std::optional<MaximizerResult> best;
    for (int s = 0; s < starts; ++s) {
        Vector start = base;
        if (s > 0) {
            // Low-frequency perturbation: a few random Fourier modes times the base profile.
            const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
            for (Eigen::Index k = 0; k < start.size(); ++k) {
                const Vec2 p = mesh.node(mesh.node_of(static_cast<int>(k)));
                start[k] *= 1.0 + 0.5 * (a * p.x + b * p.y + c * std::cos(2.0 * p.x) * std::sin(2.0 * p.y) + d * p.x * p.y);
            }
        }
        MaximizerResult r = run(functional, subspace, options, std::move(start));
        if (!best || r.value > best->value) best = std::move(r);
    }
    return std::move(*best);
}

} // namespace stm

namespace stm {

std::string maximizer_result_json(const MaximizerResult& r)
{
    nlohmann::json j;
    j["beta"] = r.params.beta;
    j["alpha"] = r.params.alpha;
    j["eps"] = r.params.eps;
    j["gamma"] = r.params.exponent();
    j["value"] = r.value;
    j["c"] = r.c;
    j["x"] = {r.x.x, r.x.y};
    j["x_node"] = r.x_node;
    j["lambda"] = r.lambda;
    j["norm"] = r.norm;
    j["residual"] = r.residual;
    j["max_projection"] = r.max_projection;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["overflow"] = r.overflow;
    j["stalled"] = r.stalled;
    return j.dump(2);
}

void write_maximizer_field(std::ostream& out, const MaximizerResult& r)
{
    const NamedField f{"u", r.u.nodal()};
    write_mesh(out, r.u.mesh(), std::span<const NamedField>(&f, 1));
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::string& header_comment)
{
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << std::setprecision(15);
    out << "eps,value,c,x,y,lambda,norm,residual,iterations,converged,overflow\n";
    for (const auto& r : sweep.steps)
        out << r.params.eps << ',' << r.value << ',' << r.c << ',' << r.x.x << ',' << r.x.y << ',' << r.lambda << ','
            << r.norm << ',' << r.residual << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
            << (r.overflow ? 1 : 0) << '\n';
}

} // namespace stm
