#include <chrono>
#include <cstdio>

#include "maxagg/boxmodel.hpp"
#include "maxagg/core.hpp"
#include "maxagg/diagnostics.hpp"
#include "maxagg/mildsolver.hpp"
#include "maxagg/selfsimilar.hpp"

using namespace maxagg;

int main() {
    // --- trivial profile
    selfsimilar::ShootConfig cfg;
    cfg.D = 1.0;
    cfg.G_half = 2.0;
    auto p = selfsimilar::shoot(cfg);
    double sup = 0.0;
    for (std::size_t i = 0; i < p.ys.size(); ++i)
        if (p.ys[i] >= 1e-4 && p.ys[i] <= 1.0 - 1e-4)
            sup = std::max(sup, std::abs(p.G_vals[i] - 2.0));
    std::printf("trivial: sup|G-2|=%.3e N=%.15f m=%.15f G1=%.12f tail=%.3e\n", sup, p.N, p.m,
                p.G1, p.tail_exp);

    // --- supercritical example
    cfg.G_half = 4.0;
    auto p4 = selfsimilar::shoot(cfg);
    std::printf("G_half=4: N=%.10f m=%.10f G1=%.10f tail=%.4f shape=%s |G1-N|/N=%.2e\n", p4.N,
                p4.m, p4.G1, p4.tail_exp, selfsimilar::to_string(selfsimilar::shape_classify(p4)),
                std::abs(p4.G1 - p4.N) / p4.N);

    // --- subcritical example
    cfg.G_half = 1.0;
    auto p1 = selfsimilar::shoot(cfg);
    std::printf("G_half=1: N=%.10f G1=%.10f tail=%.4f shape=%s\n", p1.N, p1.G1, p1.tail_exp,
                selfsimilar::to_string(selfsimilar::shape_classify(p1)));

    // --- branches for k0=3
    auto t0 = std::chrono::steady_clock::now();
    auto pair = selfsimilar::find_branches(3.0);
    auto t1 = std::chrono::steady_clock::now();
    std::printf("branches k0=3: g_sub=%.8f g_sup=%.8f shapes=%s/%s k0=%.12f [%.2f s]\n",
                pair.g_half_sub, pair.g_half_sup, selfsimilar::to_string(pair.shape_sub),
                selfsimilar::to_string(pair.shape_sup), pair.k0,
                std::chrono::duration<double>(t1 - t0).count());

    // --- tiny box run
    auto ini = core::make_gaussian_initial(0.5, 0.3, 200);
    std::printf("gaussian: mass=%.15f number=%.12f\n", core::discrete_mass(ini),
                core::discrete_number(ini));
    core::Params params{3.0, 1.0};
    std::vector<std::size_t> sched{0, 200, 1000};
    t0 = std::chrono::steady_clock::now();
    auto rep = boxmodel::run(ini, params, 1000, sched);
    t1 = std::chrono::steady_clock::now();
    std::printf("box 1000 steps: N0=%.8f N=%.8f mass=%.12f clamps=%zu [%.2f s]\n",
                rep.series.front().N, rep.series.back().N, rep.series.back().mass,
                rep.clamp_events, std::chrono::duration<double>(t1 - t0).count());
    auto ser = diagnostics::build_series(rep, &pair.supercritical);
    std::printf("l1 to supercritical at snapshots:");
    for (double d : ser.l1_to_target)
        std::printf(" %.4f", d);
    std::printf("  increases=%zu\n", diagnostics::count_number_increases(ser));

    // --- picard
    t0 = std::chrono::steady_clock::now();
    auto sol = mildsolver::picard_solve(ini, 1.1, 1.0);
    t1 = std::chrono::steady_clock::now();
    std::printf("picard T=1.1 k0=1: iters=%zu res_last=%.2e boundary=%.2e mass=[%.6f, %.6f] "
                "[%.2f s]\n",
                sol.report.iterates_used, sol.report.residual_history.back(),
                sol.report.boundary_residual, sol.report.mass_min, sol.report.mass_max,
                std::chrono::duration<double>(t1 - t0).count());

    // cross-check vs box at T=1.1
    auto box = boxmodel::run(ini, core::Params{1.0, 1.0}, 20, std::vector<std::size_t>{20});
    const double l1 = diagnostics::l1_distance(
        boxmodel::rescaled_profile(box.snapshots.back().state, 512),
        mildsolver::rescaled_slice(sol.grid, sol.grid.n_t));
    std::printf("box vs picard at T=1.1 (k0=1): L1=%.4e\n", l1);
    return 0;
}
