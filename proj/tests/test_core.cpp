#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "maxagg/core.hpp"

using namespace maxagg;

TEST_CASE("gaussian initial data has unit discrete mass") {
    const auto d = core::make_gaussian_initial(0.5, 0.3, 200);
    CHECK(std::abs(core::discrete_mass(d) - 1.0) < 1e-12);

    const auto left = core::make_gaussian_initial(0.25, 0.2, 200);
    CHECK(std::abs(core::discrete_mass(left) - 1.0) < 1e-12);
    // concentrated left of 1/2
    double low = 0.0, high = 0.0;
    for (std::size_t i = 0; i < left.values.size(); ++i)
        (left.grid.x(i) < 0.5 ? low : high) += left.values[i];
    CHECK(low > high);
}

TEST_CASE("centered gaussian is symmetric about 1/2 on an even grid") {
    const auto d = core::make_gaussian_initial(0.5, 0.3, 200);
    const std::size_t n = d.values.size();
    for (std::size_t i = 0; i < n / 2; ++i)
        CHECK(d.values[i] == Catch::Approx(d.values[n - 1 - i]).epsilon(1e-13));
}

TEST_CASE("gaussian rejects bad arguments") {
    CHECK_THROWS_AS(core::make_gaussian_initial(0.5, 0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(core::make_gaussian_initial(0.5, -0.3, 100), std::invalid_argument);
    CHECK_THROWS_AS(core::make_gaussian_initial(0.0, 0.3, 100), std::invalid_argument);
    CHECK_THROWS_AS(core::make_gaussian_initial(1.0, 0.3, 100), std::invalid_argument);
    CHECK_THROWS_AS(core::make_gaussian_initial(0.5, 0.3, 1), std::invalid_argument);
}

TEST_CASE("discrete moments of simple densities") {
    core::DiscreteDensity zero{core::Grid1D(0.01, 100), std::vector<double>(100, 0.0)};
    CHECK(core::discrete_mass(zero) == 0.0);
    CHECK(core::discrete_number(zero) == 0.0);

    // Uniform values c on n cells of width eps: number = c n eps,
    // mass = c eps sum x_i = c (n eps)^2 / 2.
    const double c = 0.7;
    const std::size_t n = 64;
    const double eps = 1.0 / 64.0;
    core::DiscreteDensity uni{core::Grid1D(eps, n), std::vector<double>(n, c)};
    CHECK(core::discrete_number(uni) ==
          Catch::Approx(c * static_cast<double>(n) * eps).epsilon(1e-14));
    const double span = static_cast<double>(n) * eps;
    CHECK(core::discrete_mass(uni) == Catch::Approx(c * span * span / 2.0).epsilon(1e-14));
}

TEST_CASE("discrete number agrees with a refined-grid quadrature") {
    const auto coarse = core::make_gaussian_initial(0.5, 0.3, 200);
    const auto fine = core::make_gaussian_initial(0.5, 0.3, 3200);
    const double n_coarse = core::discrete_number(coarse);
    const double n_fine = core::discrete_number(fine);
    CHECK(n_coarse > 0.0);
    CHECK(std::abs(n_coarse - n_fine) < 1e-3);
}

TEST_CASE("moments are linear in the values") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 3.0);
    const std::size_t n = 50;
    core::DiscreteDensity a{core::Grid1D(1.0 / n, n), {}};
    core::DiscreteDensity b = a;
    core::DiscreteDensity sum = a;
    for (std::size_t i = 0; i < n; ++i) {
        a.values.push_back(uni(rng));
        b.values.push_back(uni(rng));
        sum.values.push_back(a.values[i] + 2.0 * b.values[i]);
    }
    CHECK(core::discrete_mass(sum) ==
          Catch::Approx(core::discrete_mass(a) + 2.0 * core::discrete_mass(b)).epsilon(1e-12));
    CHECK(core::discrete_number(sum) ==
          Catch::Approx(core::discrete_number(a) + 2.0 * core::discrete_number(b))
              .epsilon(1e-12));
}

TEST_CASE("grid refinement keeps mass exactly and changes number at second order") {
    const auto d1 = core::make_gaussian_initial(0.5, 0.3, 100);
    const auto d2 = core::make_gaussian_initial(0.5, 0.3, 200);
    const auto d4 = core::make_gaussian_initial(0.5, 0.3, 400);
    CHECK(std::abs(core::discrete_mass(d1) - 1.0) < 1e-12);
    CHECK(std::abs(core::discrete_mass(d2) - 1.0) < 1e-12);
    const double e1 = std::abs(core::discrete_number(d1) - core::discrete_number(d4));
    const double e2 = std::abs(core::discrete_number(d2) - core::discrete_number(d4));
    CHECK(e2 < 0.5 * e1); // roughly O(eps^2): halving eps should quarter the error
}

TEST_CASE("params validation") {
    CHECK_NOTHROW(core::Params{1.0, 1.0}.require_valid());
    CHECK_THROWS_AS((core::Params{0.0, 1.0}.require_valid()), std::invalid_argument);
    CHECK_THROWS_AS((core::Params{-1.0, 1.0}.require_valid()), std::invalid_argument);
    CHECK_THROWS_AS((core::Params{1.0, 2.0}.require_valid()), std::invalid_argument);
}

TEST_CASE("linear interpolant matches nodes and clamps at the ends") {
    core::DiscreteDensity d{core::Grid1D(0.25, 4), {1.0, 2.0, 4.0, 8.0}};
    const core::LinearInterpolant f(d);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(f(d.grid.x(i)) == Catch::Approx(d.values[i]));
    CHECK(f(0.25) == Catch::Approx(1.5)); // midpoint between first two representatives
    CHECK(f(-1.0) == 1.0);
    CHECK(f(5.0) == 8.0);
}

TEST_CASE("sampled curve lookup") {
    core::SampledCurve c{{0.0, 1.0, 2.0}, {0.0, 10.0, 0.0}};
    CHECK(core::sample_at(c, 0.5) == Catch::Approx(5.0));
    CHECK(core::sample_at(c, 1.5) == Catch::Approx(5.0));
    CHECK(core::sample_at(c, -3.0) == 0.0);
    CHECK(core::sample_at(c, 9.0) == 0.0);
}

TEST_CASE("kahan summation survives adversarial magnitudes") {
    core::KahanSum s;
    s.add(1.0);
    for (int i = 0; i < 10; ++i)
        s.add(1e-18);
    s.add(-1.0);
    CHECK(s.value() == Catch::Approx(1e-17).epsilon(1e-10));
}
