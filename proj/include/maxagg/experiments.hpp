#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "maxagg/boxmodel.hpp"
#include "maxagg/core.hpp"
#include "maxagg/csv.hpp"
#include "maxagg/diagnostics.hpp"
#include "maxagg/selfsimilar.hpp"

namespace maxagg::experiments {

namespace fs = std::filesystem;

struct AcceptanceRow {
    std::string id;
    double value = 0.0;
    double threshold = std::numeric_limits<double>::quiet_NaN(); // NaN: informational
    bool pass = true;
};

inline void write_acceptance_csv(const fs::path& path, const std::vector<AcceptanceRow>& rows) {
    csv::Writer w(path);
    w.row("criterion_id", "value", "threshold", "pass");
    for (const AcceptanceRow& r : rows)
        w.row(r.id, r.value, r.threshold, r.pass);
}

inline void write_series_csv(const fs::path& path, const boxmodel::RunReport& rep) {
    csv::Writer w(path);
    w.row("step", "t", "N", "mass", "birth");
    for (const boxmodel::SeriesRow& r : rep.series)
        w.row(r.j, r.t, r.N, r.mass, r.birth);
}

inline void write_snapshot_csv(const fs::path& path, const boxmodel::Snapshot& snap) {
    const boxmodel::BoxState& s = snap.state;
    const double t = s.time();
    csv::Writer w(path);
    w.row("i", "x", "G", "rescaled_y", "rescaled_G");
    for (std::size_t i = 0; i < s.cells(); ++i)
        w.row(i + 1, s.x(i), s.G[i], s.x(i) / t, t * t * s.G[i]);
}

// series.csv plus one snapshot_<step>.csv per scheduled snapshot.
inline void write_run_dir(const fs::path& dir, const boxmodel::RunReport& rep) {
    fs::create_directories(dir);
    write_series_csv(dir / "series.csv", rep);
    for (const boxmodel::Snapshot& snap : rep.snapshots)
        write_snapshot_csv(dir / ("snapshot_" + std::to_string(snap.j) + ".csv"), snap);
}

inline void write_profile_csv(const fs::path& path, const selfsimilar::Profile& p) {
    csv::Writer w(path);
    w.row("y", "G");
    for (std::size_t i = 0; i < p.ys.size(); ++i)
        w.row(p.ys[i], p.G_vals[i]);
}

// Sample a curve onto a box-model grid and rescale to unit discrete mass.
inline core::DiscreteDensity density_from_curve(const core::SampledCurve& curve,
                                                std::size_t n_cells) {
    core::DiscreteDensity d;
    d.grid = core::Grid1D(1.0 / static_cast<double>(n_cells), n_cells);
    d.values.resize(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i)
        d.values[i] = std::max(0.0, core::sample_at(curve, d.grid.x(i)));
    const double mass = core::discrete_mass(d);
    if (!(mass > 0.0))
        throw std::invalid_argument("density_from_curve: curve carries no mass on [0, 1]");
    for (double& v : d.values)
        v /= mass;
    return d;
}

// Run tasks on up to `workers` threads. Each task owns its outputs; the
// first captured exception is rethrown after all tasks finished.
inline void run_tasks(std::vector<std::function<void()>>& tasks, std::size_t workers) {
    if (tasks.empty())
        return;
    if (workers <= 1 || tasks.size() == 1) {
        for (auto& t : tasks)
            t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size())
                return;
            try {
                tasks[i]();
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min(workers, tasks.size());
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

namespace detail {

inline std::string center_tag(double center) {
    std::string s = "c" + csv::format_value(center);
    std::erase(s, '.');
    return s;
}

struct FigRun {
    double center = 0.5;
    double dispersion = 0.3;
    std::size_t steps = 0;
    std::vector<std::size_t> schedule;
};

inline double l1_snapshot_to(const boxmodel::Snapshot& snap, const core::SampledCurve& target) {
    return diagnostics::l1_distance(boxmodel::rescaled_profile(snap.state, 512), target);
}

inline void write_l1_csv(const fs::path& path, const boxmodel::RunReport& rep,
                         const core::SampledCurve& target) {
    csv::Writer w(path);
    w.row("step", "l1");
    for (const boxmodel::Snapshot& snap : rep.snapshots)
        w.row(snap.j, l1_snapshot_to(snap, target));
}

} // namespace detail

// Convergence to self-similar form at k0 = 3: three Gaussian centers; the
// run with the slowest convergence (center 0.25) gets the long schedule.
inline std::vector<AcceptanceRow> run_fig1(const fs::path& out, std::size_t workers) {
    const double k0 = 3.0;
    const selfsimilar::BranchPair branches = selfsimilar::find_branches(k0);
    const core::SampledCurve target = selfsimilar::profile_curve(branches.supercritical);
    const std::vector<detail::FigRun> runs{
        {0.25, 0.3, 150000, {0, 1000, 25000, 150000}},
        {0.5, 0.3, 25000, {0, 200, 1000, 25000}},
        {0.75, 0.3, 25000, {0, 200, 1000, 25000}},
    };
    std::vector<std::vector<AcceptanceRow>> rows(runs.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t idx = 0; idx < runs.size(); ++idx) {
        tasks.emplace_back([&, idx] {
            const detail::FigRun& r = runs[idx];
            const std::string tag = detail::center_tag(r.center);
            const auto ini = core::make_gaussian_initial(r.center, r.dispersion, 200);
            const auto rep = boxmodel::run(ini, core::Params{k0, 1.0}, r.steps, r.schedule);
            const fs::path dir = out / ("fig1_" + tag);
            write_run_dir(dir, rep);
            detail::write_l1_csv(dir / "l1.csv", rep, target);

            const double final_l1 = detail::l1_snapshot_to(rep.snapshots.back(), target);
            rows[idx].push_back({"fig1_" + tag + "_final_l1", final_l1, 0.05, final_l1 < 0.05});
            bool monotone = true;
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t s = 1; s < rep.snapshots.size(); ++s) { // skip step 0
                const double d = detail::l1_snapshot_to(rep.snapshots[s], target);
                monotone = monotone && d <= prev;
                prev = d;
            }
            rows[idx].push_back(
                {"fig1_" + tag + "_l1_monotone", monotone ? 1.0 : 0.0, 1.0, monotone});
        });
    }
    run_tasks(tasks, workers);
    std::vector<AcceptanceRow> all;
    for (auto& rr : rows)
        all.insert(all.end(), rr.begin(), rr.end());
    return all;
}

// Convergence in the original variables at k0 = 1: the unscaled density
// freezes while the rescaled snapshots keep drifting apart.
inline std::vector<AcceptanceRow> run_fig2(const fs::path& out, std::size_t workers) {
    const double k0 = 1.0;
    const std::vector<double> centers{0.25, 0.5, 0.75};
    std::vector<std::vector<AcceptanceRow>> rows(centers.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t idx = 0; idx < centers.size(); ++idx) {
        tasks.emplace_back([&, idx] {
            const double center = centers[idx];
            const std::string tag = detail::center_tag(center);
            const auto ini = core::make_gaussian_initial(center, 0.3, 200);
            const std::vector<std::size_t> schedule{0, 200, 1000, 5000, 25000};
            const auto rep = boxmodel::run(ini, core::Params{k0, 1.0}, 25000, schedule);
            write_run_dir(out / ("fig2_" + tag), rep);

            double sup_ini = 0.0;
            for (double v : ini.values)
                sup_ini = std::max(sup_ini, v);
            const double stat = diagnostics::stationarity_measure(
                std::span<const boxmodel::Snapshot>(rep.snapshots).subspan(3), 2);
            const double stat_ratio = stat / sup_ini;
            rows[idx].push_back(
                {"fig2_" + tag + "_stationarity_ratio", stat_ratio, 0.1, stat_ratio < 0.1});

            const auto series = diagnostics::build_series(rep);
            const auto nb = diagnostics::n_bound_check(series, k0);
            rows[idx].push_back({"fig2_" + tag + "_n_ratio", nb.ratio, 0.2, nb.ratio > 0.2});

            const double drift = diagnostics::l1_distance(
                boxmodel::rescaled_profile(rep.snapshots[3].state, 512),
                boxmodel::rescaled_profile(rep.snapshots[4].state, 512));
            rows[idx].push_back({"fig2_" + tag + "_rescaled_drift", drift, 0.2, drift >= 0.2});
        });
    }
    run_tasks(tasks, workers);
    std::vector<AcceptanceRow> all;
    for (auto& rr : rows)
        all.insert(all.end(), rr.begin(), rr.end());
    return all;
}

// The cross-over case k0 = 2: long runs and both regime metrics, reported
// without pass/fail judgment.
inline std::vector<AcceptanceRow> run_fig3(const fs::path& out, std::size_t workers) {
    const double k0 = 2.0;
    const std::vector<double> centers{0.25, 0.5, 0.75};
    core::SampledCurve trivial;
    trivial.ys = {0.0, 1.0};
    trivial.values = {2.0, 2.0};
    std::vector<std::vector<AcceptanceRow>> rows(centers.size());
    std::vector<std::function<void()>> tasks;
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t idx = 0; idx < centers.size(); ++idx) {
        tasks.emplace_back([&, idx] {
            const double center = centers[idx];
            const std::string tag = detail::center_tag(center);
            const auto ini = core::make_gaussian_initial(center, 0.3, 200);
            const std::vector<std::size_t> schedule{0, 1000, 5000, 25000, 150000};
            const auto rep = boxmodel::run(ini, core::Params{k0, 1.0}, 150000, schedule);
            const fs::path dir = out / ("fig3_" + tag);
            write_run_dir(dir, rep);
            detail::write_l1_csv(dir / "l1.csv", rep, trivial);

            double sup_ini = 0.0;
            for (double v : ini.values)
                sup_ini = std::max(sup_ini, v);
            const double stat = diagnostics::stationarity_measure(
                std::span<const boxmodel::Snapshot>(rep.snapshots).subspan(3), 2);
            rows[idx].push_back({"fig3_" + tag + "_stationarity_ratio", stat / sup_ini, nan, true});
            const double drift = diagnostics::l1_distance(
                boxmodel::rescaled_profile(rep.snapshots[3].state, 512),
                boxmodel::rescaled_profile(rep.snapshots[4].state, 512));
            rows[idx].push_back({"fig3_" + tag + "_rescaled_drift", drift, nan, true});
            const double to_trivial = detail::l1_snapshot_to(rep.snapshots.back(), trivial);
            rows[idx].push_back({"fig3_" + tag + "_final_l1_to_trivial", to_trivial, nan, true});
        });
    }
    run_tasks(tasks, workers);
    std::vector<AcceptanceRow> all;
    for (auto& rr : rows)
        all.insert(all.end(), rr.begin(), rr.end());
    return all;
}

// Moment curve N(G(1/2)) over [0.2, 4.0]: a unique interior minimum of
// value 2 sits at the critical datum G(1/2) = 2.
inline std::vector<AcceptanceRow> run_moment_curve(const fs::path& out) {
    std::vector<double> gs;
    for (double g = 0.2; g <= 4.0 + 1e-9; g += 0.05)
        gs.push_back(g);
    const auto rows = selfsimilar::scan_moment_curve(gs, 1.0);
    fs::create_directories(out);
    {
        csv::Writer w(out / "moment_curve.csv");
        w.row("g_half", "N", "status");
        for (const auto& r : rows)
            w.row(r.g_half, r.N, r.ok ? "ok" : r.error);
    }

    std::size_t interior_minima = 0;
    std::size_t argmin = 0;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        if (rows[i].N < rows[i - 1].N && rows[i].N < rows[i + 1].N) {
            ++interior_minima;
            argmin = i;
        }
    }
    std::vector<AcceptanceRow> out_rows;
    out_rows.push_back({"momentcurve_unique_interior_min", static_cast<double>(interior_minima),
                        1.0, interior_minima == 1});
    const double loc = rows.empty() ? 0.0 : rows[argmin].g_half;
    const double val = rows.empty() ? 0.0 : rows[argmin].N;
    out_rows.push_back({"momentcurve_min_location_err", std::abs(loc - 2.0), 0.05,
                        std::abs(loc - 2.0) <= 0.05});
    out_rows.push_back(
        {"momentcurve_min_value_err", std::abs(val - 2.0), 1e-3, std::abs(val - 2.0) <= 1e-3});
    return out_rows;
}

// Seed the box model next to the subcritical profile: the trajectory leaves
// it and approaches the supercritical one.
inline std::vector<AcceptanceRow> run_instability(const fs::path& out) {
    const double k0 = 3.0;
    const selfsimilar::BranchPair branches = selfsimilar::find_branches(k0);
    core::DiscreteDensity seed =
        density_from_curve(selfsimilar::profile_curve(branches.subcritical), 200);
    seed.values[100] *= 1.01; // +1% on one cell
    {
        const double mass = core::discrete_mass(seed);
        for (double& v : seed.values)
            v /= mass;
    }
    const std::vector<std::size_t> schedule{0, 200, 1000, 5000, 25000};
    const auto rep = boxmodel::run(seed, core::Params{k0, 1.0}, 25000, schedule);
    const fs::path dir = out / "instability";
    write_run_dir(dir, rep);

    const auto sub = selfsimilar::profile_curve(branches.subcritical);
    const auto sup = selfsimilar::profile_curve(branches.supercritical);
    {
        csv::Writer w(dir / "l1.csv");
        w.row("step", "l1_to_subcritical", "l1_to_supercritical");
        for (const auto& snap : rep.snapshots)
            w.row(snap.j, detail::l1_snapshot_to(snap, sub), detail::l1_snapshot_to(snap, sup));
    }
    const double sub0 = detail::l1_snapshot_to(rep.snapshots.front(), sub);
    const double subT = detail::l1_snapshot_to(rep.snapshots.back(), sub);
    const double sup0 = detail::l1_snapshot_to(rep.snapshots.front(), sup);
    const double supT = detail::l1_snapshot_to(rep.snapshots.back(), sup);
    return {
        {"instability_l1_sub_growth", subT - sub0, 0.0, subT > sub0},
        {"instability_l1_sup_decay", supT - sup0, 0.0, supT < sup0},
    };
}

// Number bound for weak coagulation: at k0 = 0.3 the particle number never
// falls to half its initial value.
inline std::vector<AcceptanceRow> run_nbound(const fs::path& out) {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 200);
    const std::vector<std::size_t> schedule{0, 150000};
    const auto rep = boxmodel::run(ini, core::Params{0.3, 1.0}, 150000, schedule);
    write_run_dir(out / "nbound", rep);
    const auto series = diagnostics::build_series(rep);
    const auto nb = diagnostics::n_bound_check(series, 0.3);
    return {{"nbound_min_ratio", nb.ratio, 0.5, nb.pass}};
}

} // namespace maxagg::experiments
