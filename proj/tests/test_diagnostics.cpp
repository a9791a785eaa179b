#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "maxagg/boxmodel.hpp"
#include "maxagg/core.hpp"
#include "maxagg/diagnostics.hpp"

using namespace maxagg;

namespace {

core::SampledCurve random_curve(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> uni(0.0, 3.0);
    core::SampledCurve c;
    for (std::size_t i = 0; i < n; ++i) {
        c.ys.push_back(static_cast<double>(i) / static_cast<double>(n - 1));
        c.values.push_back(uni(rng));
    }
    return c;
}

} // namespace

TEST_CASE("l1 distance of equal and constant curves") {
    core::SampledCurve two{{0.0, 1.0}, {2.0, 2.0}};
    core::SampledCurve zero{{0.0, 1.0}, {0.0, 0.0}};
    CHECK(diagnostics::l1_distance(two, two) == 0.0);
    CHECK(diagnostics::l1_distance(two, zero) == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("l1 distance rejects disjoint supports") {
    core::SampledCurve a{{0.0, 1.0}, {1.0, 1.0}};
    core::SampledCurve b{{5.0, 6.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(diagnostics::l1_distance(a, b), std::invalid_argument);
}

TEST_CASE("l1 distance is a metric on the common grid") {
    std::mt19937 rng(123);
    for (int trial = 0; trial < 25; ++trial) {
        const auto a = random_curve(rng, 33);
        const auto b = random_curve(rng, 47);
        const auto c = random_curve(rng, 21);
        const double ab = diagnostics::l1_distance(a, b);
        const double ba = diagnostics::l1_distance(b, a);
        const double ac = diagnostics::l1_distance(a, c);
        const double cb = diagnostics::l1_distance(c, b);
        CHECK(ab == Catch::Approx(ba).margin(1e-14));
        CHECK(ab >= 0.0);
        CHECK(diagnostics::l1_distance(a, a) == 0.0);
        CHECK(ab <= ac + cb + 1e-12);
    }
}

TEST_CASE("n bound check asserts only below one third") {
    diagnostics::ConvergenceSeries s;
    s.times = {1.0, 2.0, 3.0};
    s.N_vals = {2.0, 2.0, 2.0};
    s.mass_vals = {1.0, 1.0, 1.0};
    auto rep = diagnostics::n_bound_check(s, 0.3);
    CHECK(rep.ratio == 1.0);
    CHECK(rep.asserted);
    CHECK(rep.pass);

    s.N_vals = {2.0, 1.0, 0.8};
    rep = diagnostics::n_bound_check(s, 0.3);
    CHECK(rep.ratio == Catch::Approx(0.4));
    CHECK_FALSE(rep.pass); // below half: the bound fails

    rep = diagnostics::n_bound_check(s, 1.0);
    CHECK_FALSE(rep.asserted); // only reported for k0 >= 1/3
    CHECK(rep.pass);

    CHECK_THROWS_AS(diagnostics::n_bound_check(diagnostics::ConvergenceSeries{}, 0.3),
                    std::invalid_argument);
}

TEST_CASE("series monotonicity counter") {
    diagnostics::ConvergenceSeries s;
    s.N_vals = {3.0, 2.5, 2.5, 2.6, 2.4};
    CHECK(diagnostics::count_number_increases(s) == 1);
}

TEST_CASE("stationarity of identical snapshots is zero") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 64);
    const auto st = boxmodel::make_state(ini, core::Params{1.0, 1.0});
    std::vector<boxmodel::Snapshot> snaps{{0, st}, {0, st}};
    CHECK(diagnostics::stationarity_measure(snaps, 2) == 0.0);
    CHECK_THROWS_AS(diagnostics::stationarity_measure(std::span(snaps).first(1), 2),
                    std::invalid_argument);
}

TEST_CASE("build_series carries targets and stationarity") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 100);
    const auto rep = boxmodel::run(ini, core::Params{1.0, 1.0}, 200,
                                   std::vector<std::size_t>{0, 100, 200});
    selfsimilar::Profile flat;
    flat.ys = {0.0, 0.5, 1.0};
    flat.G_vals = {2.0, 2.0, 2.0};
    flat.D = 1.0;
    flat.N = 2.0;
    flat.m = 1.0;
    const auto s = diagnostics::build_series(rep, &flat);
    CHECK(s.times.size() == rep.series.size());
    CHECK(s.l1_to_target.size() == rep.snapshots.size());
    CHECK(std::isfinite(s.stationarity));
    CHECK(diagnostics::count_number_increases(s) == 0);
}

TEST_CASE("rescaled stationarity compares snapshots in self-similar variables") {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 100);
    const auto st = boxmodel::make_state(ini, core::Params{3.0, 1.0});
    CHECK(diagnostics::rescaled_stationarity(st, st) == 0.0);
    auto moved = boxmodel::step(st);
    CHECK(diagnostics::rescaled_stationarity(st, moved) > 0.0);
}
