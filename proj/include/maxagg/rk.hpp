#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

namespace maxagg::rk {

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double min_step = 1e-12; // controller demanding |h| below this is a failure
    double initial_step = 0.0; // 0 selects an automatic guess
    // Accepted-step budget per integrate() call. Healthy problems here use a
    // few thousand steps; a state degenerating into noise-level crawl would
    // otherwise stall for hours under pure relative control.
    std::size_t max_steps = 50000;
};

// Thrown when the error controller pushes the step size under min_step.
class step_underflow : public std::runtime_error {
public:
    step_underflow(double t_reached)
        : std::runtime_error("adaptive step size underflow"), t_reached_(t_reached) {}
    double t_reached() const noexcept { return t_reached_; }

private:
    double t_reached_;
};

// Dormand-Prince 5(4) with step-size control and FSAL. Integrates
// y' = f(t, y) from t0 through each checkpoint in `checkpoints` (strictly
// monotone, all on the same side of t0); steps are clipped so every
// checkpoint is hit exactly, and on_checkpoint(t, y) fires there.
// f has signature std::array<double, Dim>(double t, const std::array<double, Dim>&).
template <std::size_t Dim, typename Rhs, typename OnCheckpoint>
void integrate(Rhs&& f, std::array<double, Dim> y, double t0,
               std::span<const double> checkpoints, const Options& opt,
               OnCheckpoint&& on_checkpoint) {
    using State = std::array<double, Dim>;
    if (checkpoints.empty())
        return;

    const double dir = checkpoints.front() >= t0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const double prev = i == 0 ? t0 : checkpoints[i - 1];
        if (!(dir * (checkpoints[i] - prev) > 0.0))
            throw std::invalid_argument("rk::integrate: checkpoints must be strictly monotone away from t0");
    }

    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    // b - b* (difference against the embedded 4th-order weights)
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

    double t = t0;
    State k1 = f(t, y);
    double h_ctrl = opt.initial_step > 0.0
                        ? opt.initial_step
                        : std::min(std::abs(checkpoints.front() - t0) ,
                                   std::abs(checkpoints.back() - t0) / 100.0 + opt.min_step);

    State y2{}, y3{}, y4{}, y5{}, y6{}, ynew{};
    std::size_t steps_taken = 0;
    for (double target : checkpoints) {
        while (dir * (target - t) > 0.0) {
            // The controller wanting less than min_step means the problem
            // cannot be advanced at this tolerance (stiff transient or
            // blow-up); checkpoint landings may still use smaller h.
            if (h_ctrl < opt.min_step || steps_taken >= opt.max_steps)
                throw step_underflow(t);
            const bool clipped = h_ctrl >= std::abs(target - t);
            const double h = dir * std::min(h_ctrl, std::abs(target - t));

            for (std::size_t i = 0; i < Dim; ++i)
                y2[i] = y[i] + h * a21 * k1[i];
            const State k2 = f(t + c2 * h, y2);
            for (std::size_t i = 0; i < Dim; ++i)
                y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            const State k3 = f(t + c3 * h, y3);
            for (std::size_t i = 0; i < Dim; ++i)
                y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            const State k4 = f(t + c4 * h, y4);
            for (std::size_t i = 0; i < Dim; ++i)
                y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            const State k5 = f(t + c5 * h, y5);
            for (std::size_t i = 0; i < Dim; ++i)
                y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            const State k6 = f(t + h, y6);
            for (std::size_t i = 0; i < Dim; ++i)
                ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            const State k7 = f(t + h, ynew);

            double err_sq = 0.0;
            bool finite = true;
            for (std::size_t i = 0; i < Dim; ++i) {
                const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                      e6 * k6[i] + e7 * k7[i]);
                const double sc = opt.abs_tol +
                                  opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err_sq += (e / sc) * (e / sc);
                finite = finite && std::isfinite(ynew[i]);
            }
            const double err = std::sqrt(err_sq / static_cast<double>(Dim));

            if (finite && err <= 1.0) {
                t = clipped && dir * (t + h - target) >= 0.0 ? target : t + h;
                y = ynew;
                k1 = k7;
                ++steps_taken;
                const double grow = err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)))
                                              : 5.0;
                const double h_next = std::abs(h) * grow;
                // A step clipped to land on a checkpoint must not shrink the
                // controller's free step.
                h_ctrl = clipped ? std::max(h_ctrl, h_next) : h_next;
            } else {
                const double shrink = finite && err > 0.0
                                          ? std::min(0.9, std::max(0.1, 0.9 * std::pow(err, -0.2)))
                                          : 0.1;
                h_ctrl = std::abs(h) * shrink;
            }
        }
        on_checkpoint(t, y);
    }
}

} // namespace maxagg::rk
