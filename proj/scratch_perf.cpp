#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

// Variant A: current Neumaier x3. Variant B: two-lane classic Kahan for
// number+mass, plain pair sum. Variant C: all plain.

struct Neumaier {
    double s = 0, c = 0;
    inline void add(double v) {
        const double t = s + v;
        if (std::abs(s) >= std::abs(v)) c += (s - t) + v;
        else c += (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};
struct Kahan {
    double s = 0, c = 0;
    inline void add(double v) {
        const double y = v - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

template <typename Acc>
double run_variant(int steps, const char* name) {
    const std::size_t mb = 200;
    const double eps = 1.0 / 200.0;
    std::vector<double> G(mb, 2.0);
    double N = eps * 400.0;
    const double k0 = 0.3;
    auto t0 = std::chrono::steady_clock::now();
    for (int j = 0; j < steps; ++j) {
        const std::size_t n = G.size();
        const double c = eps * k0 / N;
        double pair_plain_a = 0, pair_plain_b = 0;
        Acc num_a, num_b, mass_a, mass_b;
        for (std::size_t i = 0, r = n - 1; i < r; ++i, --r) {
            const double p = G[i] * G[r];
            pair_plain_a += p;
            double vi = G[i] - c * p;
            vi = vi < 0 ? 0 : vi;
            double vr = G[r] - c * p;
            vr = vr < 0 ? 0 : vr;
            G[i] = vi;
            G[r] = vr;
            num_a.add(vi);
            num_b.add(vr);
            mass_a.add(eps * (double(i) + 0.5) * vi);
            mass_b.add(eps * (double(r) + 0.5) * vr);
        }
        if (n & 1) {
            const std::size_t i = n / 2;
            const double p = G[i] * G[i];
            pair_plain_b += p;
            double vi = G[i] - c * p;
            vi = vi < 0 ? 0 : vi;
            G[i] = vi;
            num_a.add(vi);
            mass_a.add(eps * (double(i) + 0.5) * vi);
        }
        const double S = 2.0 * pair_plain_a + pair_plain_b;
        const double birth = 0.5 * eps * k0 / N * S;
        G.push_back(birth);
        num_a.add(birth);
        N = eps * (num_a.value() + num_b.value());
    }
    auto t1 = std::chrono::steady_clock::now();
    const double dt = std::chrono::duration<double>(t1 - t0).count();
    std::printf("%-10s steps=%d  %.2f s  N=%.12f\n", name, steps, dt, N);
    return dt;
}

int main() {
    run_variant<Neumaier>(150000, "neumaier");
    run_variant<Kahan>(150000, "kahan");
    struct Plain {
        double s = 0;
        inline void add(double v) { s += v; }
        double value() const { return s; }
    };
    run_variant<Plain>(150000, "plain");
    return 0;
}
