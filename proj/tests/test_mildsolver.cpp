#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "maxagg/core.hpp"
#include "maxagg/mildsolver.hpp"

using namespace maxagg;

TEST_CASE("B operator on uniform and one-sided slices") {
    // g = c on [0, t]: N = c t and B = k0 c / 2.
    const double c = 0.7, t = 1.3, k0 = 2.5;
    std::vector<double> slice(101, c);
    CHECK(mildsolver::B_operator(slice, t, k0) == Catch::Approx(0.5 * k0 * c).epsilon(1e-12));

    // support on [0, t/2) only: every product pairs with a zero
    std::vector<double> lower(101, 0.0);
    for (std::size_t i = 0; i < 50; ++i)
        lower[i] = 1.0;
    CHECK(mildsolver::B_operator(lower, t, k0) == 0.0);

    std::vector<double> zero(11, 0.0);
    CHECK_THROWS_AS(mildsolver::B_operator(zero, 1.0, 1.0), degenerate_state_error);
}

TEST_CASE("self-similar flat slice satisfies the boundary condition exactly") {
    // g(t, x) = 2 t^{-2} on [0, t] with k0 = 2: B[g](t) must equal g(t, t).
    const double t = 1.4;
    std::vector<double> slice(281, 2.0 / (t * t));
    const double B = mildsolver::B_operator(slice, t, 2.0);
    CHECK(B == Catch::Approx(2.0 / (t * t)).epsilon(1e-12));
}

TEST_CASE("seed grid carries the initial data and structural zeros") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 200);
    const auto g = mildsolver::make_seed_grid(ini, 1.1, 200);
    CHECK(g.n_t == 20);
    CHECK(g.ix1 == 200);
    const core::LinearInterpolant f(ini);
    for (std::size_t b = 0; b <= g.ix1; ++b)
        CHECK(g.at(0, b) == Catch::Approx(f(g.x(b))).margin(1e-15));
    for (std::size_t a = 0; a <= g.n_t; ++a)
        for (std::size_t b = g.ix1 + 1; b <= g.n_x; ++b)
            CHECK(g.at(a, b) == 0.0);

    CHECK_THROWS_AS(mildsolver::make_seed_grid(ini, 1.1003, 200), std::invalid_argument);
    CHECK_THROWS_AS(mildsolver::make_seed_grid(ini, 0.9, 200), std::invalid_argument);
}

TEST_CASE("gamma application against an independent quadrature oracle") {
    // For the constant-in-time field g(s, x) = g_ini(x) 1{x <= 1}, the value
    // at (t, x) with x < 1 is g_ini(x) exp(-k0 I(t, x)) with
    // I = integral of g_ini(s - x) 1{s - x <= 1} / N0 over s in [1, t].
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 200);
    const double k0 = 1.7;
    const auto seed = mildsolver::make_seed_grid(ini, 1.1, 200);
    const auto out = mildsolver::gamma_apply(seed, ini, k0);

    const core::LinearInterpolant f(ini);
    const std::size_t oracle_n = 20000;
    auto oracle_I = [&](double t, double x) {
        // fine trapezoid with the integrand cut at s = 1 + x
        double n0 = 0.0;
        const double h0 = 1.0 / static_cast<double>(oracle_n);
        for (std::size_t i = 0; i <= oracle_n; ++i) {
            const double w = (i == 0 || i == oracle_n) ? 0.5 : 1.0;
            n0 += w * f(h0 * static_cast<double>(i));
        }
        n0 *= h0;
        double acc = 0.0;
        const double hs = (t - 1.0) / static_cast<double>(oracle_n);
        for (std::size_t i = 0; i <= oracle_n; ++i) {
            const double s = 1.0 + hs * static_cast<double>(i);
            const double arg = s - x;
            const double v = arg <= 1.0 ? f(arg) : 0.0;
            acc += ((i == 0 || i == oracle_n) ? 0.5 : 1.0) * v;
        }
        return acc * hs / n0;
    };

    for (const double x : {0.1, 0.45, 0.8}) {
        const auto b = static_cast<std::size_t>(std::llround(x * 200.0));
        const double got = out.at(out.n_t, b);
        const double want = f(out.x(b)) * std::exp(-k0 * oracle_I(1.1, out.x(b)));
        CHECK(got == Catch::Approx(want).epsilon(5e-4));
    }

    // the t = 1 row is the initial data, untouched
    for (std::size_t b = 0; b <= out.ix1; ++b)
        CHECK(out.at(0, b) == seed.at(0, b));
}

TEST_CASE("gamma damps but never lifts the initial data for x < 1") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 100);
    const auto seed = mildsolver::make_seed_grid(ini, 1.2, 100);
    const auto out = mildsolver::gamma_apply(seed, ini, 3.0);
    for (std::size_t a = 0; a <= out.n_t; ++a)
        for (std::size_t b = 0; b < out.ix1; ++b) {
            CHECK(out.at(a, b) >= 0.0);
            CHECK(out.at(a, b) <= seed.at(0, b) * (1.0 + 1e-14));
        }
}

TEST_CASE("gamma rejects degenerate states") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 50);
    auto grid = mildsolver::make_seed_grid(ini, 1.1, 50);
    for (std::size_t b = 0; b <= grid.n_x; ++b)
        grid.at(2, b) = 0.0; // one interior slice with N = 0
    grid.left_at_x1[2] = 0.0;
    CHECK_THROWS_AS(mildsolver::gamma_apply(grid, ini, 1.0), degenerate_state_error);
}

TEST_CASE("picard iteration converges with monotone residuals") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 200);
    mildsolver::PicardOptions opt;
    opt.cells_per_unit = 100;
    const auto sol = mildsolver::picard_solve(ini, 1.05, 3.0, opt);
    CHECK(sol.report.converged);
    CHECK(sol.report.iterates_used == sol.report.residual_history.size());
    for (std::size_t i = 1; i < sol.report.residual_history.size(); ++i)
        CHECK(sol.report.residual_history[i] < sol.report.residual_history[i - 1]);
    CHECK(sol.report.residual_history.back() < opt.tol);

    // boundary trace agrees with the birth operator at convergence
    CHECK(sol.report.boundary_residual < 1e-8);
    // mass stays inside the invariant band
    CHECK(sol.report.mass_min >= 0.5);
    CHECK(sol.report.mass_max <= 1.5);
}

TEST_CASE("a single-row horizon stays close to the initial data") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 200);
    mildsolver::PicardOptions opt;
    opt.cells_per_unit = 200;
    const auto sol = mildsolver::picard_solve(ini, 1.0 + 1.0 / 200.0, 1.0, opt);
    const core::LinearInterpolant f(ini);
    double sup = 0.0;
    for (std::size_t b = 0; b < sol.grid.ix1; ++b)
        sup = std::max(sup, std::abs(sol.grid.at(1, b) - f(sol.grid.x(b))));
    CHECK(sup < 0.05);
}

TEST_CASE("the fixed point decays in time along every size") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 100);
    mildsolver::PicardOptions opt;
    opt.cells_per_unit = 100;
    const auto sol = mildsolver::picard_solve(ini, 1.2, 2.0, opt);
    const auto& g = sol.grid;
    for (std::size_t b = 0; b <= g.n_x; ++b) {
        // At the jump line x = 1 the two one-sided limits each decay, but
        // the t = 1 row stores the initial-data side; compare per family.
        const std::size_t a_lo = b <= g.ix1 ? 0 : b - g.ix1;
        const std::size_t start = b == g.ix1 ? 2 : a_lo + 1;
        for (std::size_t a = start; a <= g.n_t; ++a)
            CHECK(g.at(a, b) <= g.at(a - 1, b) * (1.0 + 1e-13) + 1e-300);
    }
    for (std::size_t a = 1; a <= g.n_t; ++a)
        CHECK(g.left_at_x1[a] <= g.left_at_x1[a - 1] * (1.0 + 1e-13) + 1e-300);
}

TEST_CASE("grid refinement converges at second order away from the lines") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 400);
    auto solve = [&](std::size_t cpu) {
        mildsolver::PicardOptions opt;
        opt.cells_per_unit = cpu;
        return mildsolver::picard_solve(ini, 1.1, 2.0, opt);
    };
    const auto s100 = solve(100);
    const auto s200 = solve(200);
    const auto s400 = solve(400);
    // compare at final time on x in [0.2, 0.8]: x = j/10 lives on all grids
    double d1 = 0.0, d2 = 0.0;
    for (int j = 2; j <= 8; ++j) {
        const double ref = s400.grid.at(s400.grid.n_t, static_cast<std::size_t>(j) * 40);
        d1 = std::max(d1,
                      std::abs(s100.grid.at(s100.grid.n_t, static_cast<std::size_t>(j) * 10) - ref));
        d2 = std::max(d2,
                      std::abs(s200.grid.at(s200.grid.n_t, static_cast<std::size_t>(j) * 20) - ref));
    }
    CHECK(d2 < d1 / 2.5);
}

TEST_CASE("iteration budget exhaustion carries the residual history") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 100);
    mildsolver::PicardOptions opt;
    opt.cells_per_unit = 100;
    opt.max_iter = 2;
    bool threw = false;
    try {
        mildsolver::picard_solve(ini, 1.2, 3.0, opt);
    } catch (const nonconvergence_error& e) {
        threw = true;
        CHECK(e.residual_history().size() == 2);
    }
    CHECK(threw);
}

TEST_CASE("picard rejects non-unit-mass data and bad rates") {
    core::DiscreteDensity d{core::Grid1D(0.01, 100), std::vector<double>(100, 1.0)};
    CHECK_THROWS_AS(mildsolver::picard_solve(d, 1.1, 1.0), std::invalid_argument);
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 100);
    CHECK_THROWS_AS(mildsolver::picard_solve(ini, 1.1, 0.0), std::invalid_argument);
}
