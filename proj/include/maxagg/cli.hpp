#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maxagg/config.hpp"
#include "maxagg/core.hpp"
#include "maxagg/csv.hpp"
#include "maxagg/diagnostics.hpp"
#include "maxagg/errors.hpp"
#include "maxagg/experiments.hpp"
#include "maxagg/mildsolver.hpp"

namespace maxagg::cli {

namespace fs = std::filesystem;

// Exit codes: 0 success, 1 configuration, 2 degenerate simulation,
// 3 no solution branch, 4 iteration did not converge.
enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_degenerate = 2,
    exit_no_branch = 3,
    exit_nonconvergence = 4,
};

inline core::SampledCurve curve_from_csv(const fs::path& path) {
    const csv::Table t = csv::read_table(path);
    if (t.rows.empty())
        throw config_error("profile file is empty: " + path.string());
    int cy = t.column("y");
    if (cy < 0)
        cy = t.column("x");
    int cg = t.column("G");
    if (cy < 0)
        cy = 0;
    if (cg < 0)
        cg = cy == 0 ? 1 : 0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : t.rows) {
        if (static_cast<int>(row.size()) <= std::max(cy, cg))
            continue;
        pts.emplace_back(std::stod(row[cy]), std::stod(row[cg]));
    }
    std::sort(pts.begin(), pts.end());
    core::SampledCurve c;
    for (auto& [y, g] : pts) {
        c.ys.push_back(y);
        c.values.push_back(g);
    }
    return c;
}

inline core::DiscreteDensity initial_density(const ExperimentConfig& cfg) {
    if (!cfg.initial_profile.empty())
        return experiments::density_from_curve(curve_from_csv(cfg.initial_profile), cfg.M_b);
    return core::make_gaussian_initial(cfg.center, cfg.dispersion, cfg.M_b);
}

inline int cmd_simulate(const ExperimentConfig& cfg) {
    core::Params params{cfg.k0, 1.0};
    const auto ini = initial_density(cfg);
    std::vector<std::size_t> schedule = cfg.schedule;
    if (schedule.empty())
        schedule = {0, cfg.steps};

    const auto rep = boxmodel::run(ini, params, cfg.steps, schedule,
                                   {.exact_mass_birth = cfg.exact_mass});
    fs::create_directories(cfg.out_dir);
    experiments::write_series_csv(fs::path(cfg.out_dir) / "series.csv", rep);
    for (const auto& snap : rep.snapshots)
        experiments::write_snapshot_csv(
            fs::path(cfg.out_dir) / ("snapshot_" + std::to_string(snap.j) + ".csv"), snap);

    if (rep.clamp_events > 0)
        std::fprintf(stderr, "warning: %zu negative updates were clamped to zero\n",
                     rep.clamp_events);
    if (rep.degenerate_abort) {
        std::fprintf(stderr, "simulation aborted at step %zu: degenerate state (N <= 0)\n",
                     rep.steps_completed);
        return exit_degenerate;
    }
    std::printf("simulate: %zu steps, t=%s N=%s mass=%s -> %s\n", rep.steps_completed,
                csv::format_value(rep.series.back().t).c_str(),
                csv::format_value(rep.series.back().N).c_str(),
                csv::format_value(rep.series.back().mass).c_str(), cfg.out_dir.c_str());
    return exit_ok;
}

inline void write_profile_summary(csv::Writer& w, const std::string& branch,
                                  const selfsimilar::Profile& p, double k0, double g_half_raw) {
    w.row(branch, k0, g_half_raw, p.N, p.m, p.G1, p.tail_exp,
          selfsimilar::to_string(selfsimilar::shape_classify(p)));
}

inline int cmd_selfsimilar(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    selfsimilar::ShootConfig shoot_cfg;
    shoot_cfg.delta = cfg.delta;
    shoot_cfg.rk_tol = cfg.rk_tol;
    shoot_cfg.n_output = cfg.n_output;

    csv::Writer summary(fs::path(cfg.out_dir) / "summary.csv");
    summary.row("branch", "k0", "g_half", "N", "m", "G1", "tail_exp", "shape");

    if (cfg.ghalf > 0.0) {
        shoot_cfg.D = cfg.D;
        shoot_cfg.G_half = cfg.ghalf;
        const auto p = selfsimilar::shoot(shoot_cfg);
        experiments::write_profile_csv(fs::path(cfg.out_dir) / "profile_custom.csv", p);
        write_profile_summary(summary, "custom", p, p.D * p.N, cfg.ghalf);
        std::printf("selfsimilar: G(1/2)=%g D=%g -> N=%.12g m=%.12g shape=%s\n", cfg.ghalf,
                    cfg.D, p.N, p.m, selfsimilar::to_string(selfsimilar::shape_classify(p)));
        return exit_ok;
    }

    selfsimilar::BranchSearchOptions opt;
    opt.shoot_cfg = shoot_cfg;
    selfsimilar::BranchPair pair;
    try {
        pair = selfsimilar::find_branches(cfg.k0, opt);
    } catch (const no_branch_error& e) {
        std::fprintf(stderr, "%s (self-similar profiles exist only for k0 >= 2)\n", e.what());
        return exit_no_branch;
    }
    experiments::write_profile_csv(fs::path(cfg.out_dir) / "profile_subcritical.csv",
                                   pair.subcritical);
    experiments::write_profile_csv(fs::path(cfg.out_dir) / "profile_supercritical.csv",
                                   pair.supercritical);
    write_profile_summary(summary, "subcritical", pair.subcritical, pair.k0, pair.g_half_sub);
    write_profile_summary(summary, "supercritical", pair.supercritical, pair.k0,
                          pair.g_half_sup);
    std::printf("selfsimilar: k0=%.12g branches at G(1/2)=%.8g (%s) and %.8g (%s)\n", pair.k0,
                pair.g_half_sub, selfsimilar::to_string(pair.shape_sub), pair.g_half_sup,
                selfsimilar::to_string(pair.shape_sup));
    return exit_ok;
}

inline int cmd_scan(const ExperimentConfig& cfg) {
    if (!(cfg.ghalf_step > 0.0) || !(cfg.ghalf_min > 0.0) || cfg.ghalf_max < cfg.ghalf_min)
        throw config_error("scan: need 0 < ghalf_min <= ghalf_max and ghalf_step > 0");
    std::vector<double> gs;
    for (double g = cfg.ghalf_min; g <= cfg.ghalf_max + 0.5 * cfg.ghalf_step;
         g += cfg.ghalf_step)
        gs.push_back(g);
    selfsimilar::ShootConfig base;
    base.delta = cfg.delta;
    base.rk_tol = cfg.rk_tol;
    base.n_output = cfg.n_output;
    const auto rows = selfsimilar::scan_moment_curve(gs, cfg.D, base);
    fs::create_directories(cfg.out_dir);
    csv::Writer w(fs::path(cfg.out_dir) / "moment_curve.csv");
    w.row("g_half", "N", "status");
    for (const auto& r : rows)
        w.row(r.g_half, r.N, r.ok ? "ok" : r.error);
    std::printf("scan: %zu values -> %s/moment_curve.csv\n", rows.size(), cfg.out_dir.c_str());
    return exit_ok;
}

inline int cmd_verify(const ExperimentConfig& cfg) {
    if (!(cfg.T > 1.0) || cfg.T > 1.5)
        throw config_error("verify: the oracle horizon is 1 < T <= 1.5");
    const auto ini = initial_density(cfg);
    fs::create_directories(cfg.out_dir);

    mildsolver::PicardOptions popt;
    popt.tol = cfg.tol;
    popt.max_iter = cfg.max_iter;
    popt.cells_per_unit = cfg.mild_cells;

    mildsolver::PicardSolution sol;
    try {
        sol = mildsolver::picard_solve(ini, cfg.T, cfg.k0, popt);
    } catch (const nonconvergence_error& e) {
        csv::Writer w(fs::path(cfg.out_dir) / "residuals.csv");
        w.row("iter", "residual");
        for (std::size_t i = 0; i < e.residual_history().size(); ++i)
            w.row(i + 1, e.residual_history()[i]);
        std::fprintf(stderr, "%s\n", e.what());
        return exit_nonconvergence;
    }

    const double steps_exact = (cfg.T - 1.0) * static_cast<double>(cfg.M_b);
    const auto box_steps = static_cast<std::size_t>(std::llround(steps_exact));
    if (std::abs(steps_exact - static_cast<double>(box_steps)) > 1e-9)
        throw config_error("verify: (T-1)*mb must be an integer number of box steps");
    const std::vector<std::size_t> schedule{box_steps};
    const auto rep = boxmodel::run(ini, core::Params{cfg.k0, 1.0}, box_steps, schedule);
    if (rep.degenerate_abort)
        return exit_degenerate;

    const double l1 = diagnostics::l1_distance(
        boxmodel::rescaled_profile(rep.snapshots.back().state, 512),
        mildsolver::rescaled_slice(sol.grid, sol.grid.n_t));

    {
        csv::Writer w(fs::path(cfg.out_dir) / "residuals.csv");
        w.row("iter", "residual");
        for (std::size_t i = 0; i < sol.report.residual_history.size(); ++i)
            w.row(i + 1, sol.report.residual_history[i]);
    }
    {
        csv::Writer w(fs::path(cfg.out_dir) / "verify.csv");
        w.row("metric", "value");
        w.row("l1_discrepancy", l1);
        w.row("picard_iterations", sol.report.iterates_used);
        w.row("picard_final_residual", sol.report.residual_history.back());
        w.row("boundary_residual", sol.report.boundary_residual);
        w.row("mild_mass_min", sol.report.mass_min);
        w.row("mild_mass_max", sol.report.mass_max);
        w.row("box_final_mass", rep.series.back().mass);
    }
    std::printf("verify: T=%g k0=%g L1(box, mild)=%.6g picard_iters=%zu\n", cfg.T, cfg.k0, l1,
                sol.report.iterates_used);
    return exit_ok;
}

inline int cmd_experiment(const ExperimentConfig& cfg) {
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    const std::size_t workers = effective_workers(cfg);
    std::vector<experiments::AcceptanceRow> rows;
    if (cfg.experiment == "fig1")
        rows = experiments::run_fig1(out, workers);
    else if (cfg.experiment == "fig2")
        rows = experiments::run_fig2(out, workers);
    else if (cfg.experiment == "fig3")
        rows = experiments::run_fig3(out, workers);
    else if (cfg.experiment == "moment-curve")
        rows = experiments::run_moment_curve(out);
    else if (cfg.experiment == "instability")
        rows = experiments::run_instability(out);
    else if (cfg.experiment == "nbound")
        rows = experiments::run_nbound(out);
    else
        throw config_error("experiment: unknown name '" + cfg.experiment +
                           "' (expected fig1, fig2, fig3, moment-curve, instability, nbound)");
    experiments::write_acceptance_csv(out / "acceptance.csv", rows);
    for (const auto& r : rows)
        std::printf("%-36s value=%-22.15g %s\n", r.id.c_str(), r.value,
                    std::isnan(r.threshold) ? "(info)" : (r.pass ? "pass" : "FAIL"));
    return exit_ok; // per-row outcomes live in acceptance.csv
}

inline int run(int argc, const char* const* argv) {
    // The config file is applied before the remaining options, so explicit
    // command-line values always win.
    std::string config_path;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config")
            config_path = argv[i + 1];

    ExperimentConfig cfg;
    try {
        if (!config_path.empty())
            load_config_file(cfg, config_path);
    } catch (const config_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_config;
    }

    CLI::App app{"maxagg: box-model simulation, self-similar profiles and mild-solution "
                 "cross-checks for mass aggregation with maximal size"};
    app.require_subcommand(1);
    std::string ignored_config;
    app.add_option("--config", ignored_config, "key=value configuration file");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", ignored_config, "key=value configuration file");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--k0", cfg.k0, "coagulation rate constant");
        sub->add_option("--mb", cfg.M_b, "initial cell count (box model grid)");
        sub->add_option("--delta", cfg.delta, "profile endpoint cutoff");
        sub->add_option("--rk-tol", cfg.rk_tol, "integrator relative tolerance");
        sub->add_option("--n-output", cfg.n_output, "profile sample count");
        sub->add_option("--workers", cfg.workers, "max concurrent runs");
    };

    CLI::App* sim = app.add_subcommand("simulate", "run the discrete box model");
    add_common(sim);
    sim->add_option("--steps", cfg.steps, "number of time steps");
    sim->add_option("--center", cfg.center, "gaussian center in (0,1)");
    sim->add_option("--dispersion", cfg.dispersion, "gaussian dispersion");
    sim->add_option("--initial-profile", cfg.initial_profile, "CSV x,G initial data");
    sim->add_option("--schedule", [&cfg](const std::vector<std::string>& vals) {
        cfg.schedule = detail::parse_schedule("schedule", vals.at(0));
        return true;
    }, "comma-separated snapshot steps");
    sim->add_flag("--exact-mass", cfg.exact_mass, "birth value variant keeping mass at 1");

    CLI::App* ss = app.add_subcommand("selfsimilar", "solve self-similar profiles");
    add_common(ss);
    ss->add_option("--ghalf", cfg.ghalf, "shoot directly from G(1/2) (with --d)");
    ss->add_option("--d", cfg.D, "coupling constant for the direct shoot");

    CLI::App* scan = app.add_subcommand("scan", "trace the moment curve N(G(1/2))");
    add_common(scan);
    scan->add_option("--ghalf-min", cfg.ghalf_min, "scan start");
    scan->add_option("--ghalf-max", cfg.ghalf_max, "scan end");
    scan->add_option("--ghalf-step", cfg.ghalf_step, "scan spacing");
    scan->add_option("--d", cfg.D, "coupling constant");

    CLI::App* verify = app.add_subcommand("verify",
                                          "cross-check box model against the mild solution");
    add_common(verify);
    verify->add_option("--T", cfg.T, "final time (1 < T <= 1.5)");
    verify->add_option("--tol", cfg.tol, "fixed-point tolerance");
    verify->add_option("--max-iter", cfg.max_iter, "fixed-point iteration budget");
    verify->add_option("--mild-cells", cfg.mild_cells, "mild-solver cells per unit size");
    verify->add_option("--center", cfg.center, "gaussian center in (0,1)");
    verify->add_option("--dispersion", cfg.dispersion, "gaussian dispersion");
    verify->add_option("--initial-profile", cfg.initial_profile, "CSV x,G initial data");

    CLI::App* exp = app.add_subcommand("experiment", "run a canned experiment recipe");
    add_common(exp);
    exp->add_option("name", cfg.experiment,
                    "fig1 | fig2 | fig3 | moment-curve | instability | nbound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        cfg.validate();
        if (sim->parsed())
            return cmd_simulate(cfg);
        if (ss->parsed())
            return cmd_selfsimilar(cfg);
        if (scan->parsed())
            return cmd_scan(cfg);
        if (verify->parsed())
            return cmd_verify(cfg);
        if (exp->parsed())
            return cmd_experiment(cfg);
        return exit_config;
    } catch (const config_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_config;
    } catch (const no_branch_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_no_branch;
    } catch (const nonconvergence_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_nonconvergence;
    } catch (const degenerate_state_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_degenerate;
    }
}

} // namespace maxagg::cli
