#include <cstdio>

#include "maxagg/selfsimilar.hpp"

using namespace maxagg;

int main() {
    selfsimilar::ShootConfig base;
    base.delta = 1e-13;
    base.D = 1e8;
    base.G_half = 8.0;
    try {
        const auto p = selfsimilar::shoot(base);
        std::printf("completed: N=%g m=%g tail=%g G(delta)=%g\n", p.N, p.m, p.tail_exp,
                    p.G_vals.front());
    } catch (const std::exception& e) {
        std::printf("threw: %s\n", e.what());
    }
    return 0;
}
