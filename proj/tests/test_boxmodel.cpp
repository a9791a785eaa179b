#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "maxagg/boxmodel.hpp"
#include "maxagg/core.hpp"

using namespace maxagg;

namespace {

boxmodel::BoxState tiny_state(double c, double k0) {
    // Two cells of width 1/2 holding value c each.
    core::DiscreteDensity d{core::Grid1D(0.5, 2), {c, c}};
    return boxmodel::make_state(d, core::Params{k0, 1.0});
}

} // namespace

TEST_CASE("birth value of the two-cell state") {
    // N = c, birth = (1/4) (1/c) (c^2 + c^2) = c/2.
    const auto s = tiny_state(0.8, 1.0);
    CHECK(s.N == Catch::Approx(0.8));
    CHECK(boxmodel::birth_value(s) == Catch::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("no coagulation partners means zero birth and frozen cells") {
    // Support only on the lower half: every product pairs with a zero.
    core::DiscreteDensity d{core::Grid1D(0.25, 4), {2.0, 3.0, 0.0, 0.0}};
    auto s = boxmodel::make_state(d, core::Params{2.0, 1.0});
    CHECK(boxmodel::birth_value(s) == 0.0);
    const auto next = boxmodel::step(s);
    REQUIRE(next.cells() == 5);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(next.G[i] == s.G[i]);
    CHECK(next.G[4] == 0.0);
}

TEST_CASE("symmetric states satisfy the pairing identity") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 7);
        core::DiscreteDensity d{core::Grid1D(1.0 / static_cast<double>(n), n), {}};
        for (std::size_t i = 0; i < (n + 1) / 2; ++i)
            d.values.push_back(uni(rng));
        while (d.values.size() < n)
            d.values.push_back(d.values[n - 1 - d.values.size()]);
        const double k0 = 0.5 + uni(rng);
        auto s = boxmodel::make_state(d, core::Params{k0, 1.0});
        if (!(s.N > 0.0))
            continue;
        // brute-force oracle: (eps k0 / 2N) sum G(i)^2 for mirror-symmetric G
        double sum_sq = 0.0;
        for (double v : s.G)
            sum_sq += v * v;
        const double oracle = 0.5 * s.eps * k0 / s.N * sum_sq;
        CHECK(boxmodel::birth_value(s) == Catch::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("one step of the uniform two-cell state") {
    auto s = tiny_state(0.6, 1.0);
    const auto next = boxmodel::step(s);
    REQUIRE(next.cells() == 3);
    CHECK(next.G[0] == Catch::Approx(0.3).epsilon(1e-14));
    CHECK(next.G[1] == Catch::Approx(0.3).epsilon(1e-14));
    CHECK(next.G[2] == Catch::Approx(0.3).epsilon(1e-14));
    CHECK(next.j == 1);
    CHECK(next.time() == Catch::Approx(1.5));
}

TEST_CASE("k0 = 0 freezes the dynamics") {
    core::DiscreteDensity d{core::Grid1D(0.25, 4), {1.0, 2.0, 3.0, 4.0}};
    auto s = boxmodel::make_state(d, core::Params{0.0, 1.0});
    const auto next = boxmodel::step(s);
    REQUIRE(next.cells() == 5);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(next.G[i] == d.values[i]);
    CHECK(next.G[4] == 0.0);
}

TEST_CASE("run with zero steps reports only the initial state") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 50);
    const auto rep = boxmodel::run(ini, core::Params{3.0, 1.0}, 0, std::vector<std::size_t>{0});
    REQUIRE(rep.snapshots.size() == 1);
    CHECK(rep.snapshots[0].j == 0);
    REQUIRE(rep.series.size() == 1);
    CHECK(rep.series[0].t == 1.0);
    CHECK_FALSE(rep.degenerate_abort);
}

TEST_CASE("schedule beyond the step count is rejected") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 50);
    CHECK_THROWS_AS(
        boxmodel::run(ini, core::Params{3.0, 1.0}, 10, std::vector<std::size_t>{11}),
        std::invalid_argument);
}

TEST_CASE("degenerate initial data aborts with a partial report") {
    core::DiscreteDensity d{core::Grid1D(0.1, 10), std::vector<double>(10, 0.0)};
    const auto rep = boxmodel::run(d, core::Params{1.0, 1.0}, 5, std::vector<std::size_t>{});
    CHECK(rep.degenerate_abort);
    CHECK(rep.steps_completed == 0);
}

TEST_CASE("medium run: monotone number, mass drift, causality, pointwise decay") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 200);
    const std::vector<std::size_t> sched{0, 500, 1000, 2000};
    const auto rep = boxmodel::run(ini, core::Params{3.0, 1.0}, 2000, sched);
    REQUIRE(rep.steps_completed == 2000);
    CHECK(rep.clamp_events == 0);

    for (std::size_t i = 1; i < rep.series.size(); ++i)
        CHECK(rep.series[i].N <= rep.series[i - 1].N);
    for (const auto& row : rep.series)
        CHECK(std::abs(row.mass - 1.0) <= 5.0 / 200.0);

    // cell count grows by exactly one per step
    for (const auto& snap : rep.snapshots)
        CHECK(snap.state.cells() == 200 + snap.j);

    // each fixed cell decays monotonically across snapshots
    for (std::size_t s = 1; s < rep.snapshots.size(); ++s) {
        const auto& prev = rep.snapshots[s - 1].state;
        const auto& cur = rep.snapshots[s].state;
        for (std::size_t i = 0; i < prev.cells(); ++i)
            CHECK(cur.G[i] <= prev.G[i]);
    }

    // tracked N stays glued to a fresh summation
    const auto& last = rep.snapshots.back().state;
    CHECK(std::abs(last.N - last.recompute_number()) < 1e-9);
    CHECK(std::abs(rep.series.back().mass - last.recompute_mass()) < 1e-9);
}

TEST_CASE("exact-mass birth keeps the discrete mass at one") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 100);
    const auto rep = boxmodel::run(ini, core::Params{3.0, 1.0}, 500,
                                   std::vector<std::size_t>{500}, {.exact_mass_birth = true});
    CHECK(std::abs(rep.snapshots.back().state.recompute_mass() - 1.0) < 1e-12);
}

TEST_CASE("rescaled profile at step zero is the initial density") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 128);
    const auto s = boxmodel::make_state(ini, core::Params{3.0, 1.0});
    const auto prof = boxmodel::rescaled_profile(s, 128);
    // t = 1, so samples at the cell representatives reproduce the data
    for (std::size_t i = 0; i < 128; ++i) {
        CHECK(prof.ys[i] == Catch::Approx(ini.grid.x(i)).margin(1e-15));
        CHECK(prof.values[i] == Catch::Approx(ini.values[i]).epsilon(1e-13));
    }
}

TEST_CASE("box model admits k0 = 0 but rejects negative rates and foreign grids") {
    core::DiscreteDensity d{core::Grid1D(0.5, 2), {1.0, 1.0}};
    CHECK_NOTHROW(boxmodel::make_state(d, core::Params{0.0, 1.0}));
    CHECK_THROWS_AS(boxmodel::make_state(d, core::Params{-1.0, 1.0}), std::invalid_argument);
    core::DiscreteDensity wide{core::Grid1D(0.5, 3), {1.0, 1.0, 1.0}}; // covers [0, 1.5]
    CHECK_THROWS_AS(boxmodel::make_state(wide, core::Params{1.0, 1.0}), std::invalid_argument);
}
