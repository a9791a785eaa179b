#include <array>
#include <cmath>
#include <cstdio>

#include "maxagg/rk.hpp"
#include "maxagg/selfsimilar.hpp"

using namespace maxagg;

int main() {
    const double D = 1e8, G_half = 8.0, delta = 1e-13;
    long rhs_count = 0;
    auto rhs = [&](double u, const std::array<double, 6>& s) -> std::array<double, 6> {
        ++rhs_count;
        if (rhs_count % 200000 == 0)
            std::printf("  rhs eval %ld at u=%.17g F=%.3g Fm=%.3g\n", rhs_count, u, s[0], s[1]);
        const double omu = 1.0 - u;
        const double coupling = D * s[0] * s[1];
        const double dF = coupling / (u * omu * omu);
        const double dFm = -coupling / (u * u * omu);
        const double G_here = s[0] / (u * u);
        const double G_mirror = s[1] / (omu * omu);
        return {dF, dFm, G_here, G_mirror, u * G_here, omu * G_mirror};
    };
    const auto grid = selfsimilar::detail::half_grid(delta, 800);
    std::vector<double> down(grid.rbegin() + 1, grid.rend());
    rk::Options opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-300;
    opt.min_step = 1e-12;
    const double F_half = G_half * 0.25;
    std::array<double, 6> y0{F_half, F_half, 0, 0, 0, 0};
    try {
        rk::integrate<6>(rhs, y0, 0.5, down, opt, [](double, const std::array<double, 6>&) {});
        std::printf("done, %ld evals\n", rhs_count);
    } catch (const rk::step_underflow& e) {
        std::printf("underflow at %.17g after %ld evals\n", e.t_reached(), rhs_count);
    }
    return 0;
}
