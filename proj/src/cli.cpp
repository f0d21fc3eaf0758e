#include "mfpg/cli.hpp"

#include "mfpg/config.hpp"
#include "mfpg/csv.hpp"
#include "mfpg/exact_pg.hpp"
#include "mfpg/oracles.hpp"
#include "mfpg/pgloop.hpp"

#include <CLI11.hpp>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include <filesystem>
#include <iostream>

namespace mfpg::cli {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string threads = "auto";
    std::optional<uint64_t> seed;  // overrides the config seed
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("config", args.config_path, "experiment config file")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory for CSV files");
    cmd->add_option("--threads", args.threads, "thread count or 'auto'");
    cmd->add_option("--seed", args.seed, "64-bit master seed (default 0)");
}

void apply_threads(const std::string& threads) {
    if (threads == "auto") return;
#if defined(_OPENMP)
    omp_set_num_threads(std::stoi(threads));
#else
    (void)threads;
#endif
}

uint64_t pick_seed(const CommonArgs& args, const cfg::RunConfig& config) {
    if (args.seed) return *args.seed;
    if (config.seed) return *config.seed;
    return 0;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    fs::create_directories(args.out_dir);
    return (fs::path(args.out_dir) / name).string();
}

void matrix_columns(std::vector<std::string>& cols, const std::string& prefix,
                    Index rows, Index columns) {
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < columns; ++j)
            cols.push_back(prefix + "_" + std::to_string(i) + "_" +
                           std::to_string(j));
}

void matrix_cells(std::vector<std::string>& cells, const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            cells.push_back(csv::format(m(i, j)));
}

PolicyParams initial_policy(const cfg::RunConfig& config, const char* verb) {
    std::vector<std::string> missing;
    if (!config.theta0) missing.push_back("theta0");
    if (!config.zeta0) missing.push_back("zeta0");
    if (!missing.empty())
        throw cfg::ConfigError({std::string(verb) + " requires config keys: " +
                                missing[0] +
                                (missing.size() > 1 ? ", " + missing[1] : "")});
    return {*config.theta0, *config.zeta0};
}

popsim::SimConfig sim_config(const cfg::RunConfig& config, uint64_t seed,
                             const char* verb) {
    std::vector<std::string> missing;
    for (const char* key : {"T", "n", "N"}) {
        if (std::string(key) == "T" && !config.T) missing.push_back("T");
        if (std::string(key) == "n" && !config.n) missing.push_back("n");
        if (std::string(key) == "N" && !config.N) missing.push_back("N");
    }
    if (!missing.empty()) {
        std::string msg = std::string(verb) + " requires config keys:";
        for (const auto& k : missing) msg += " " + k;
        throw cfg::ConfigError({msg});
    }
    popsim::SimConfig c;
    c.T = *config.T;
    c.n = *config.n;
    c.N = *config.N;
    c.lambda = config.model.lambda;
    c.seed = seed;
    return c;
}

zograd::GradConfig grad_config(const cfg::RunConfig& config, uint64_t seed,
                               const char* verb) {
    std::vector<std::string> missing;
    if (!config.Ntilde) missing.push_back("Ntilde");
    if (!config.r) missing.push_back("r");
    if (!missing.empty()) {
        std::string msg = std::string(verb) + " requires config keys:";
        for (const auto& k : missing) msg += " " + k;
        throw cfg::ConfigError({msg});
    }
    zograd::GradConfig gc;
    gc.sim = sim_config(config, seed, verb);
    gc.Ntilde = *config.Ntilde;
    gc.r = *config.r;
    return gc;
}

int cmd_solve(const CommonArgs& args) {
    const cfg::RunConfig config = cfg::parse_config(args.config_path);
    const AnalyticSolution sol = solve_optimal(config.model);
    std::cout << "theta_star =" << sol.theta_star << "\n"
              << "zeta_star =" << sol.zeta_star << "\n";
    std::cout << "J1_opt = " << csv::format(sol.J1_opt) << "\n"
              << "J2_opt = " << csv::format(sol.J2_opt) << "\n"
              << "upsilon = " << csv::format(sol.upsilon) << "\n"
              << "J_opt = " << csv::format(sol.J_opt) << "\n";
    return 0;
}

int cmd_constants(const CommonArgs& args, double ell, double ell_hat) {
    const cfg::RunConfig config = cfg::parse_config(args.config_path);
    if (ell <= 0.0 || ell_hat <= 0.0) {
        // Default levels J1(theta0), J2(zeta0) when an initial point is given,
        // else twice the optimal component costs.
        if (config.theta0 && config.zeta0) {
            const exact_pg::CostDecomposition c =
                exact_pg::cost({*config.theta0, *config.zeta0}, config.model);
            if (ell <= 0.0) ell = c.J1;
            if (ell_hat <= 0.0) ell_hat = c.J2;
        } else {
            const AnalyticSolution sol = solve_optimal(config.model);
            if (ell <= 0.0) ell = 2.0 * sol.J1_opt;
            if (ell_hat <= 0.0) ell_hat = 2.0 * sol.J2_opt;
        }
    }
    const exact_pg::LevelSetConstants k =
        exact_pg::constants(ell, ell_hat, config.model);
    auto line = [](const char* name, double v) {
        std::cout << name << " = " << csv::format(v) << "\n";
    };
    line("level", k.level);
    line("level_hat", k.level_hat);
    line("Bd_K", k.bd_K);
    line("Bd_Sigma", k.bd_Sigma);
    line("Bd_E", k.bd_E);
    line("Bd_theta", k.bd_theta);
    line("Bd_K_hat", k.bd_K_hat);
    line("Bd_Sigma_hat", k.bd_Sigma_hat);
    line("Bd_E_hat", k.bd_E_hat);
    line("Bd_zeta", k.bd_zeta);
    line("Lip_Sigma", k.lip_Sigma);
    line("Lip_K", k.lip_K);
    line("L", k.L);
    line("L_hat", k.L_hat);
    line("L_check", k.L_check);
    line("rho_max", k.rho_max);
    line("kappa1_paper", k.kappa1_paper);
    line("kappa2_paper", k.kappa2_paper);
    line("kappa1_corrected", k.kappa1_corrected);
    line("kappa2_corrected", k.kappa2_corrected);
    return 0;
}

int cmd_exact_pg(const CommonArgs& args, const std::string& rho_arg,
                 int kmax_flag, double eps_rel) {
    const cfg::RunConfig config = cfg::parse_config(args.config_path);
    const PolicyParams theta0 = initial_policy(config, "exact-pg");

    exact_pg::GDOptions opts;
    if (rho_arg == "auto")
        opts.auto_rho = true;
    else
        opts.rho = std::stod(rho_arg);
    opts.k_max = kmax_flag > 0 ? kmax_flag : config.k_max.value_or(1000);
    opts.eps_rel = eps_rel;

    const exact_pg::GDTrace trace = exact_pg::exact_gd(theta0, opts, config.model);

    csv::Writer out(out_path(args, "exact_pg_trace.csv"));
    std::vector<std::string> cols{"k"};
    matrix_columns(cols, "theta", theta0.theta.rows(), theta0.theta.cols());
    matrix_columns(cols, "zeta", theta0.zeta.rows(), theta0.zeta.cols());
    for (const char* c : {"J1", "J2", "J", "grad_J1_norm", "grad_J2_norm",
                          "stable", "J_err_rel"})
        cols.push_back(c);
    out.header(cols);
    for (const auto& row : trace.rows) {
        std::vector<std::string> cells{csv::format(row.k)};
        matrix_cells(cells, row.theta);
        matrix_cells(cells, row.zeta);
        cells.push_back(csv::format(row.J1));
        cells.push_back(csv::format(row.J2));
        cells.push_back(csv::format(row.J));
        cells.push_back(csv::format(row.grad1_norm));
        cells.push_back(csv::format(row.grad2_norm));
        cells.push_back(row.stable ? "1" : "0");
        cells.push_back(csv::format((row.J - trace.J_opt) / trace.J_opt));
        out.row(cells);
    }
    std::cout << "rho = " << csv::format(trace.rho_used) << ", iterations = "
              << trace.rows.back().k << ", converged = "
              << (trace.converged ? "yes" : "no") << ", final J = "
              << csv::format(trace.rows.back().J) << "\n";
    return 0;
}

int cmd_estimate_grad(const CommonArgs& args) {
    const cfg::RunConfig config = cfg::parse_config(args.config_path);
    const uint64_t seed = pick_seed(args, config);
    const PolicyParams theta0 = initial_policy(config, "estimate-grad");
    const zograd::GradConfig gc = grad_config(config, seed, "estimate-grad");

    const zograd::GradientEstimate est =
        zograd::estimate_gradient(theta0, config.model, gc);

    {
        csv::Writer out(out_path(args, "estimate_grad_episodes.csv"));
        out.header({"i", "u_norm", "jpop"});
        for (size_t i = 0; i < est.per_episode_costs.size(); ++i)
            out.row({csv::format(static_cast<int>(i)),
                     csv::format(est.u_norms[i]),
                     csv::format(est.per_episode_costs[i])});
    }
    {
        csv::Writer out(out_path(args, "estimate_grad.csv"));
        std::vector<std::string> cols;
        matrix_columns(cols, "g_theta", est.g_theta.rows(), est.g_theta.cols());
        matrix_columns(cols, "g_zeta", est.g_zeta.rows(), est.g_zeta.cols());
        out.header(cols);
        std::vector<std::string> cells;
        matrix_cells(cells, est.g_theta);
        matrix_cells(cells, est.g_zeta);
        out.row(cells);
    }
    std::cout << "g_theta =" << est.g_theta << "\n"
              << "g_zeta =" << est.g_zeta << "\n";
    return 0;
}

void write_mf_trace(const CommonArgs& args, const std::string& name,
                    const pgloop::MFTrace& trace, const PolicyParams& theta0) {
    csv::Writer out(out_path(args, name));
    std::vector<std::string> cols{"k"};
    matrix_columns(cols, "theta", theta0.theta.rows(), theta0.theta.cols());
    matrix_columns(cols, "zeta", theta0.zeta.rows(), theta0.zeta.cols());
    for (const char* c : {"jpop", "jpop_ma", "ghat_norm_theta",
                          "ghat_norm_zeta", "rho", "J", "J_err_rel"})
        cols.push_back(c);
    out.header(cols);
    for (const auto& row : trace.rows) {
        std::vector<std::string> cells{csv::format(row.k)};
        matrix_cells(cells, row.theta);
        matrix_cells(cells, row.zeta);
        cells.push_back(csv::format(row.jpop));
        cells.push_back(csv::format(row.jpop_moving_avg));
        cells.push_back(csv::format(row.ghat_norm_theta));
        cells.push_back(csv::format(row.ghat_norm_zeta));
        cells.push_back(csv::format(row.rho));
        cells.push_back(row.J ? csv::format(*row.J) : "");
        cells.push_back(row.J_err_rel ? csv::format(*row.J_err_rel) : "");
        out.row(cells);
    }
}

int cmd_model_free_pg(const CommonArgs& args, const std::string& seeds_arg,
                      double epsilon) {
    const cfg::RunConfig config = cfg::parse_config(args.config_path);
    const uint64_t seed = pick_seed(args, config);
    pgloop::MFRunConfig run;
    run.theta0 = initial_policy(config, "model-free-pg");
    run.gc = grad_config(config, seed, "model-free-pg");
    run.k_max = config.k_max.value_or(350);
    run.schedule = config.rho_schedule.value_or(pgloop::StepSchedule::constant(0.5));
    run.eval_mode = pgloop::EvalMode::analytic;

    if (!seeds_arg.empty()) {
        std::vector<uint64_t> seeds;
        std::stringstream ss(seeds_arg);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) seeds.push_back(std::stoull(tok));
        const pgloop::MultiSeedSummary summary =
            pgloop::multi_seed_study(run, config.model, seeds, epsilon);
        csv::Writer out(out_path(args, "model_free_summary.csv"));
        out.header({"seed", "final_J", "final_err", "err_ratio", "success"});
        for (const auto& row : summary.rows) {
            out.row({csv::format(row.seed), csv::format(row.final_J),
                     csv::format(row.final_err), csv::format(row.err_ratio),
                     row.success ? "1" : "0"});
            pgloop::MFRunConfig per_seed = run;
            const pgloop::MFTrace trace =
                pgloop::model_free_pg(per_seed, config.model, row.seed);
            write_mf_trace(args,
                           "model_free_trace_seed" + std::to_string(row.seed) +
                               ".csv",
                           trace, run.theta0);
        }
        std::cout << "successes = " << summary.successes << "/"
                  << summary.rows.size() << " at epsilon = "
                  << csv::format(epsilon) << "\n";
        return 0;
    }

    const pgloop::MFTrace trace = pgloop::model_free_pg(run, config.model, seed);
    write_mf_trace(args, "model_free_trace.csv", trace, run.theta0);
    if (trace.aborted) {
        std::cerr << "pgloop.model_free_pg: diverged (overflow) at iteration "
                  << trace.abort_iteration << "\n";
        return 4;
    }
    std::cout << "iterations = " << trace.rows.back().k << ", final jpop = "
              << csv::format(trace.rows.back().jpop);
    if (trace.rows.back().J_err_rel)
        std::cout << ", final J_err_rel = "
                  << csv::format(*trace.rows.back().J_err_rel);
    std::cout << "\n";
    return 0;
}

int cmd_check(const CommonArgs& args) {
    const cfg::RunConfig config = cfg::parse_config(args.config_path);
    const uint64_t seed = pick_seed(args, config);
    const oracles::CheckReport report =
        oracles::run_check_suite(config.model, seed);
    for (const auto& line : report.lines)
        std::cout << (line.pass ? "PASS" : "FAIL") << "  " << line.name << " ("
                  << line.detail << ")\n";
    return report.all_pass ? 0 : 3;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"entropy-regularized LQ mean-field control policy gradients"};
    app.require_subcommand(1);

    CommonArgs solve_args, constants_args, exact_args, grad_args, mf_args,
        check_args;
    double ell = 0.0, ell_hat = 0.0;
    std::string rho = "auto";
    int kmax = 0;
    double eps_rel = 1e-6;
    std::string seeds;
    double epsilon = 0.05;

    CLI::App* solve = app.add_subcommand("solve", "analytic optimal solution");
    add_common(solve, solve_args);

    CLI::App* constants =
        app.add_subcommand("constants", "level-set constants report");
    add_common(constants, constants_args);
    constants->add_option("--ell", ell, "level for J1 (default J1(theta0))");
    constants->add_option("--ellhat", ell_hat, "level for J2 (default J2(zeta0))");

    CLI::App* exact = app.add_subcommand("exact-pg", "model-based gradient descent");
    add_common(exact, exact_args);
    exact->add_option("--rho", rho, "step size or 'auto'");
    exact->add_option("--kmax", kmax, "iteration cap (overrides config)");
    exact->add_option("--eps-rel", eps_rel, "relative-error stopping threshold");

    CLI::App* egrad =
        app.add_subcommand("estimate-grad", "zeroth-order gradient estimate");
    add_common(egrad, grad_args);

    CLI::App* mf =
        app.add_subcommand("model-free-pg", "stochastic policy gradient");
    add_common(mf, mf_args);
    mf->add_option("--seeds", seeds, "comma-separated seed list (multi-seed study)");
    mf->add_option("--eps", epsilon, "success threshold for the study");

    CLI::App* check = app.add_subcommand("check", "independent oracle suite");
    add_common(check, check_args);

    try {
        app.parse(argc, argv);
        if (solve->parsed()) {
            apply_threads(solve_args.threads);
            return cmd_solve(solve_args);
        }
        if (constants->parsed()) {
            apply_threads(constants_args.threads);
            return cmd_constants(constants_args, ell, ell_hat);
        }
        if (exact->parsed()) {
            apply_threads(exact_args.threads);
            return cmd_exact_pg(exact_args, rho, kmax, eps_rel);
        }
        if (egrad->parsed()) {
            apply_threads(grad_args.threads);
            return cmd_estimate_grad(grad_args);
        }
        if (mf->parsed()) {
            apply_threads(mf_args.threads);
            return cmd_model_free_pg(mf_args, seeds, epsilon);
        }
        if (check->parsed()) {
            apply_threads(check_args.threads);
            return cmd_check(check_args);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const cfg::ConfigError& e) {
        std::cerr << "ConfigError:\n";
        for (const auto& p : e.problems) std::cerr << "  - " << p << "\n";
        return 2;
    } catch (const popsim::OverflowError& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 3;
    }
}

}  // namespace mfpg::cli
