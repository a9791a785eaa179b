#include <cstdio>

#include "maxagg/core.hpp"
#include "maxagg/mildsolver.hpp"

using namespace maxagg;

int main() {
    const auto ini = core::make_gaussian_initial(0.5, 0.3, 100);
    mildsolver::PicardOptions opt;
    opt.cells_per_unit = 100;
    const auto sol = mildsolver::picard_solve(ini, 1.2, 2.0, opt);
    const auto& g = sol.grid;
    int shown = 0;
    for (std::size_t b = 0; b <= g.n_x && shown < 8; ++b) {
        const std::size_t a_lo = b <= g.ix1 ? 0 : b - g.ix1;
        for (std::size_t a = a_lo + 1; a <= g.n_t && shown < 8; ++a) {
            if (g.at(a, b) > g.at(a - 1, b) * (1.0 + 1e-13) + 1e-300) {
                std::printf("violation at a=%zu b=%zu (x=%.3f t=%.3f): %.6f -> %.6f "
                            "(diag_col(a-1)=%zu)\n",
                            a, b, g.x(b), g.time(a), g.at(a - 1, b), g.at(a, b),
                            g.diag_col(a - 1));
                ++shown;
            }
        }
    }
    if (shown == 0)
        std::printf("no violations\n");
    return 0;
}
