#include "stm/cli.hpp"

#include "stm/error.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace stm::cli {

int run(int argc, const char* const* argv)
{
    RunConfig cfg;
    CLI::App app{"Numerical experiments for the singular Trudinger-Moser functional", "stm"};
    app.set_config("--config", "", "Flat key=value configuration file; command-line flags override it");
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.fallthrough();

    std::string h = cfg.h, R = cfg.R;
    app.add_option_function<double>(
           "--disk", [&](double r) { cfg.domain = "disk"; cfg.radius = r; }, "Disk domain of the given radius (default 1)")
        ->group("Domain");
    app.add_option_function<std::vector<double>>(
           "--center", [&](const std::vector<double>& c) { cfg.center_x = c.at(0); cfg.center_y = c.at(1); },
           "Disk center x,y")
        ->expected(2)
        ->delimiter(',')
        ->group("Domain");
    app.add_option_function<double>(
           "--square", [&](double a) { cfg.domain = "square"; cfg.half_width = a; }, "Square [-a,a]^2")
        ->group("Domain");
    app.add_option_function<std::string>(
           "--polygon", [&](const std::string& v) { cfg.domain = "polygon"; cfg.vertices = v; },
           "Polygon vertices \"x,y;x,y;...\" (counterclockwise)")
        ->group("Domain");

    app.add_option("--h", h, "Mesh size, e.g. 1/32")->group("Mesh");
    app.add_option("--core-size,--core_size", cfg.core_size, "Innermost ring spacing (0: uniform rings)")->group("Mesh");
    app.add_option("--core-ratio,--core_ratio", cfg.core_ratio, "Geometric growth of the graded core")->group("Mesh");
    app.add_option("--snap", cfg.snap, "Radii forced onto mesh rings")->delimiter(',')->group("Mesh");

    app.add_option("--beta", cfg.beta, "Weight exponent beta in [0,1)")->group("Functional");
    app.add_option("--alpha", cfg.alpha, "Shift alpha")->group("Functional");
    app.add_option("--alpha-fraction,--alpha_fraction", cfg.alpha_fraction,
                   "alpha = t lambda_1, or lambda_ell + t (lambda_{ell+1} - lambda_ell) with --ell")
        ->group("Functional");
    app.add_option("--ell", cfg.ell, "Number of eigenspaces to project out (0: full space)")->group("Functional");
    app.add_option("--eps", cfg.eps, "Subcritical parameter epsilon")->group("Functional");
    app.add_option("--eps-list,--eps_list", cfg.eps_list, "Epsilon schedule (sweep, diagnose, verify)")
        ->delimiter(',')
        ->group("Functional");

    app.add_option("--tolerance", cfg.tolerance, "Euler-Lagrange residual tolerance")->group("Solver");
    app.add_option("--max-iterations,--max_iterations", cfg.max_iterations, "Iteration cap")->group("Solver");
    app.add_option("--starts", cfg.starts, "Multi-start count for maximize")->group("Solver");
    app.add_option("--seed", cfg.seed, "RNG seed for multi-start")->group("Solver");
    app.add_option("--count", cfg.count, "Number of eigenpairs")->group("Solver");

    app.add_option("--R", R, "Bubble radius (number or inf)")->group("Diagnostics");
    app.add_option("--delta", cfg.delta, "Concentration radius")->group("Diagnostics");
    app.add_option("--profile-R,--profile_R", cfg.profile_R, "Rescaled profile radius")->group("Diagnostics");
    app.add_option("--gamma", cfg.gamma, "Truncation level")->group("Diagnostics");

    app.add_option("--out", cfg.out, "Output directory")->group("Run");
    app.add_option("--jobs", cfg.jobs, "Worker threads for parallel stages")->group("Run");
    app.add_option("--simd", cfg.simd, "Kernel selection: auto, scalar, avx2")->group("Run");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"mesh", "Build and write the mesh"},
        {"eigs", "Dirichlet eigenvalues"},
        {"maximize", "Subcritical maximizer at --eps"},
        {"sweep", "Warm-started epsilon continuation"},
        {"green", "Green function and A0"},
        {"bubble", "Bubble mass and energy at --R"},
        {"bound", "Upper-bound constant"},
        {"verify", "Test-function family against the bound"},
        {"diagnose", "Continuation sweep with blow-up diagnostics"},
    };
    for (const auto& [name, help] : commands)
        app.add_subcommand(name, help)->callback([&cfg, name = name] { cfg.command = name; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    cfg.h = h;
    cfg.R = R;

    try {
        return execute(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << '\n';
        return kConfigError;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOtherError;
    }
}

} // namespace stm::cli
