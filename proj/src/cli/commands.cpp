#include "stm/cli.hpp"

#include "stm/blowup.hpp"
#include "stm/bounds.hpp"
#include "stm/bubble.hpp"
#include "stm/error.hpp"
#include "stm/maximizer.hpp"
#include "stm/simd/kernels.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace stm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

TMParams params_of(double beta, double alpha, double eps)
{
    TMParams p;
    p.beta = beta;
    p.alpha = alpha;
    p.eps = eps;
    return p;
}

std::vector<double> default_sweep_schedule()
{
    std::vector<double> s;
    for (double e = 0.2; e > 0.0015; e *= 0.6) s.push_back(e);
    return s;
}

std::vector<Vec2> parse_vertices(const std::string& text)
{
    std::vector<Vec2> v;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
        const auto comma = item.find(',');
        STM_REQUIRE(comma != std::string::npos, ConfigError, "polygon vertex '" + item + "' is not x,y");
        v.push_back({parse_number(item.substr(0, comma)), parse_number(item.substr(comma + 1))});
    }
    return v;
}

DomainSpec domain_of(const RunConfig& c)
{
    if (c.domain == "square") return DomainSpec::square(c.half_width);
    if (c.domain == "polygon") return DomainSpec::polygon(parse_vertices(c.vertices));
    return DomainSpec::disk(c.radius, {c.center_x, c.center_y});
}

MeshOptions mesh_options_of(const RunConfig& c)
{
    MeshOptions m;
    m.core_size = c.core_size;
    m.core_ratio = c.core_ratio;
    m.snap_radii = c.snap;
    return m;
}

class Context {
public:
    explicit Context(RunConfig config) : cfg(std::move(config)), hash(manifest_hash(cfg))
    {
        fs::create_directories(cfg.out);
        json m;
        m["hash"] = hash;
        m["command"] = cfg.command;
        json conf = json::object();
        for (const auto& [k, v] : entries(cfg)) conf[k] = v;
        m["config"] = conf;
        m["jobs"] = cfg.jobs;
        m["out"] = cfg.out;
        write("manifest.json", m.dump(2) + "\n");
    }

    std::ofstream open(const std::string& name) const
    {
        std::ofstream f(fs::path(cfg.out) / name);
        STM_REQUIRE(f.good(), Error, "cannot write " + (fs::path(cfg.out) / name).string());
        return f;
    }

    void write(const std::string& name, const std::string& content) const { open(name) << content; }

    void write_json(const std::string& name, json j) const
    {
        j["manifest_hash"] = hash;
        write(name, j.dump(2) + "\n");
    }

    std::string comment() const { return "manifest " + hash; }

    std::shared_ptr<const Discretization> discretization(const MeshOptions& options) const
    {
        return Discretization::create(build_mesh(domain_of(cfg), parse_number(cfg.h), options));
    }
    std::shared_ptr<const Discretization> discretization() const { return discretization(mesh_options_of(cfg)); }

    // Optional subspace and the resolved shift alpha.
    std::pair<std::optional<Subspace>, double> resolve_alpha(const Discretization& d) const
    {
        std::optional<Subspace> sub;
        if (cfg.ell > 0) sub = Subspace::compute(d, cfg.ell);
        double alpha = cfg.alpha;
        if (cfg.alpha_fraction >= 0.0) {
            if (sub) {
                const double lo = sub->basis.eigenvalues.back();
                alpha = lo + cfg.alpha_fraction * (sub->next_eigenvalue - lo);
            } else {
                alpha = cfg.alpha_fraction * eigenpairs(d.ops, 1).eigenvalues[0];
            }
        }
        return {std::move(sub), alpha};
    }

    MaximizerOptions maximizer_options() const
    {
        MaximizerOptions o;
        o.tolerance = cfg.tolerance;
        o.max_iterations = cfg.max_iterations;
        o.keep_log = false;
        return o;
    }

    RunConfig cfg;
    std::string hash;
};

json result_json(const MaximizerResult& r) { return json::parse(maximizer_result_json(r)); }

int status_of(const MaximizerResult& r)
{
    if (r.overflow) return kOverflow;
    return r.converged ? kOk : kNotConverged;
}

int status_of(const SweepResult& s)
{
    if (s.stopped_on_overflow) return kOverflow;
    for (const auto& r : s.steps)
        if (!r.converged) return kNotConverged;
    return kOk;
}

void print_result(const MaximizerResult& r)
{
    std::cout << std::setprecision(10) << "eps " << r.params.eps << "  value " << r.value << "  c " << r.c
              << "  lambda " << r.lambda << "  residual " << r.residual << "  iterations " << r.iterations
              << (r.converged ? "" : "  NOT CONVERGED") << (r.overflow ? "  OVERFLOW" : "") << '\n';
}

int cmd_mesh(const Context& ctx)
{
    const auto d = ctx.discretization();
    auto f = ctx.open("mesh.txt");
    f << "# " << ctx.comment() << '\n';
    write_mesh(f, *d->mesh);
    std::cout << "nodes " << d->mesh->node_count() << "  triangles " << d->mesh->triangle_count() << "  dofs "
              << d->mesh->dof_count() << "  max_edge " << d->mesh->max_edge() << '\n';
    return kOk;
}

int cmd_eigs(const Context& ctx)
{
    const auto d = ctx.discretization();
    const SpectralData s = eigenpairs(d->ops, ctx.cfg.count);
    auto f = ctx.open("eigs.csv");
    write_eigen_csv(f, s, ctx.comment());
    std::cout << std::setprecision(10);
    for (std::size_t i = 0; i < s.size(); ++i)
        std::cout << i + 1 << "  " << s.eigenvalues[i] << "  group " << s.group[i] << '\n';
    return kOk;
}

int cmd_maximize(const Context& ctx)
{
    const auto d = ctx.discretization();
    const auto [sub, alpha] = ctx.resolve_alpha(*d);
    const TMFunctional f(d, params_of(ctx.cfg.beta, alpha, ctx.cfg.eps));
    const Subspace* sp = sub ? &*sub : nullptr;
    const MaximizerResult r = ctx.cfg.starts > 1
                                  ? maximize_multistart(f, sp, ctx.cfg.starts, ctx.cfg.seed, ctx.maximizer_options())
                                  : maximize_subcritical(f, sp, ctx.maximizer_options());
    ctx.write_json("maximize.json", result_json(r));
    auto field = ctx.open("u.txt");
    field << "# " << ctx.comment() << '\n';
    write_maximizer_field(field, r);
    print_result(r);
    return status_of(r);
}

SweepResult run_sweep(const Context& ctx, const TMFunctional& f, const Subspace* sp)
{
    const std::vector<double> schedule = ctx.cfg.eps_list.empty() ? default_sweep_schedule() : ctx.cfg.eps_list;
    return continuation_sweep(f, schedule, sp, ctx.maximizer_options());
}

int cmd_sweep(const Context& ctx)
{
    const auto d = ctx.discretization();
    const auto [sub, alpha] = ctx.resolve_alpha(*d);
    const TMFunctional f(d, params_of(ctx.cfg.beta, alpha, ctx.cfg.eps));
    const SweepResult s = run_sweep(ctx, f, sub ? &*sub : nullptr);
    auto csv = ctx.open("sweep.csv");
    write_sweep_csv(csv, s, ctx.comment());
    json j;
    j["steps"] = json::array();
    for (const auto& r : s.steps) j["steps"].push_back(result_json(r));
    j["stopped_on_overflow"] = s.stopped_on_overflow;
    ctx.write_json("sweep.json", j);
    for (const auto& r : s.steps) print_result(r);
    return status_of(s);
}

int cmd_green(const Context& ctx)
{
    const auto d = ctx.discretization();
    const auto [sub, alpha] = ctx.resolve_alpha(*d);
    const GreenFunction g = solve_green(d, alpha, sub ? &*sub : nullptr);
    auto f = ctx.open("green.txt");
    f << "# " << ctx.comment() << '\n';
    write_green(f, g);
    json j;
    j["A0"] = g.a0();
    j["alpha"] = alpha;
    j["weighted_g2"] = weighted_g_squared(g, ctx.cfg.beta);
    j["sink_pairing_residual"] = g.sink_pairing_residual;
    j["orthogonality_correction"] = g.orthogonality_correction;
    ctx.write_json("green.json", j);
    std::cout << std::setprecision(12) << "A0 " << g.a0() << "  alpha " << alpha << '\n';
    return kOk;
}

int cmd_bubble(const Context& ctx)
{
    const double R = parse_number(ctx.cfg.R);
    const BubbleProfile b(ctx.cfg.beta);
    json j;
    j["beta"] = ctx.cfg.beta;
    j["R"] = std::isinf(R) ? json("inf") : json(R);
    j["a"] = b.a();
    j["k"] = b.k();
    j["mass"] = b.mass(R);
    j["liouville_mass"] = liouville_mass(ctx.cfg.beta);
    if (std::isfinite(R)) {
        j["energy"] = b.energy(R);
        j["energy_asymptotic"] = b.energy_asymptotic(R);
        j["phi0"] = b.phi0(R);
    }
    ctx.write_json("bubble.json", j);
    std::cout << std::setprecision(15) << "mass " << b.mass(R);
    if (std::isfinite(R)) std::cout << "  energy " << b.energy(R);
    std::cout << '\n';
    return kOk;
}

int cmd_bound(const Context& ctx)
{
    const auto d = ctx.discretization();
    const auto [sub, alpha] = ctx.resolve_alpha(*d);
    const GreenFunction g = solve_green(d, alpha, sub ? &*sub : nullptr);
    const TMFunctional f(d, params_of(ctx.cfg.beta, alpha, 0.0));
    const double bound = upper_bound(ctx.cfg.beta, g.a0(), f.weighted_volume());
    json j;
    j["beta"] = ctx.cfg.beta;
    j["alpha"] = alpha;
    j["A0"] = g.a0();
    j["weighted_volume"] = f.weighted_volume();
    j["bound"] = bound;
    ctx.write_json("bound.json", j);
    std::cout << std::setprecision(12) << "bound " << bound << "  A0 " << g.a0() << "  weighted_volume "
              << f.weighted_volume() << '\n';
    return kOk;
}

constexpr const char* kPlotScript = R"(#!/usr/bin/env python3
# Plots the verify excess against epsilon on log axes.
import csv, sys
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "verify.csv"
rows = list(csv.DictReader(line for line in open(path) if not line.startswith("#")))
eps = [float(r["eps"]) for r in rows]
fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
ax[0].semilogx(eps, [float(r["excess"]) for r in rows], "o-")
ax[0].set_xlabel("eps"); ax[0].set_ylabel("excess over bound")
ax[1].semilogx(eps, [float(r["ratio"]) for r in rows], "o-")
ax[1].axhline(1.0, color="gray", lw=0.5)
ax[1].set_xlabel("eps"); ax[1].set_ylabel("excess / gap term")
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
)";

int cmd_verify(const Context& ctx)
{
    const std::vector<double> eps = ctx.cfg.eps_list.empty() ? std::vector<double>{1e-2, 1e-3, 1e-4} : ctx.cfg.eps_list;
    MeshOptions opt = test_function_mesh_options(ctx.cfg.beta, eps);
    if (ctx.cfg.core_size > 0.0) opt.core_size = std::min(opt.core_size, ctx.cfg.core_size);
    opt.snap_radii.insert(opt.snap_radii.end(), ctx.cfg.snap.begin(), ctx.cfg.snap.end());
    const auto d = ctx.discretization(opt);
    const auto [sub, alpha] = ctx.resolve_alpha(*d);
    const GreenFunction g = solve_green(d, alpha, sub ? &*sub : nullptr);
    const BoundReport rep = verify_exceeds(g, ctx.cfg.beta, eps, ctx.cfg.jobs);
    auto csv = ctx.open("verify.csv");
    write_bound_csv(csv, rep, ctx.comment());
    ctx.write_json("verify.json", json::parse(bound_report_json(rep)));
    ctx.write("plot_verify.py", kPlotScript);
    std::cout << std::setprecision(8) << "bound " << rep.bound << "  A0 " << rep.a0 << '\n';
    for (const auto& r : rep.rows)
        std::cout << "eps " << r.eps << "  value " << r.value << "  excess " << r.excess << "  ratio " << r.ratio
                  << '\n';
    return kOk;
}

int cmd_diagnose(const Context& ctx)
{
    const auto d = ctx.discretization();
    const auto [sub, alpha] = ctx.resolve_alpha(*d);
    const TMFunctional f(d, params_of(ctx.cfg.beta, alpha, ctx.cfg.eps));
    const SweepResult s = run_sweep(ctx, f, sub ? &*sub : nullptr);
    const DiagnoseOptions dopt{.delta = ctx.cfg.delta, .profile_R = ctx.cfg.profile_R, .gamma = ctx.cfg.gamma};
    std::vector<BlowupRow> rows;
    for (const auto& r : s.steps) rows.push_back(diagnose_step(f, r, dopt));
    auto csv = ctx.open("diagnostics.csv");
    write_blowup_csv(csv, rows, ctx.comment());
    auto sc = ctx.open("sweep.csv");
    write_sweep_csv(sc, s, ctx.comment());
    std::cout << std::setprecision(6);
    for (const auto& r : rows)
        std::cout << "eps " << r.eps << "  c " << r.c << "  energy_fraction " << r.energy_fraction
                  << "  profile_dev " << r.profile_deviation << "  truncation " << r.truncation_fraction << '\n';
    return status_of(s);
}

} // namespace

int execute(const RunConfig& config)
{
    validate(config);
    if (config.simd == "scalar") simd::set_isa(simd::Isa::scalar);
    else if (config.simd == "avx2") {
        STM_REQUIRE(simd::cpu_has_avx2(), ConfigError, "AVX2 requested but not available");
        simd::set_isa(simd::Isa::avx2);
    }
    const Context ctx(config);
    const std::string& c = config.command;
    if (c == "mesh") return cmd_mesh(ctx);
    if (c == "eigs") return cmd_eigs(ctx);
    if (c == "maximize") return cmd_maximize(ctx);
    if (c == "sweep") return cmd_sweep(ctx);
    if (c == "green") return cmd_green(ctx);
    if (c == "bubble") return cmd_bubble(ctx);
    if (c == "bound") return cmd_bound(ctx);
    if (c == "verify") return cmd_verify(ctx);
    if (c == "diagnose") return cmd_diagnose(ctx);
    throw ConfigError("unknown command '" + c + "'");
}

} // namespace stm::cli
