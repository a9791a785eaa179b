#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "maxagg/core.hpp"
#include "maxagg/errors.hpp"

namespace maxagg::boxmodel {

// Discrete state at step j: cell values G over cells 1..M_b+j of width
// eps = 1/M_b, time t = 1 + eps*j. k0 = 0 is admitted here (it freezes the
// dynamics and is useful for checks); everywhere else Params requires
// k0 > 0.
struct BoxState {
    core::Params params;
    double eps = 0.0;
    std::size_t M_b = 0;
    std::size_t j = 0;
    std::vector<double> G;
    // eps * sum(G), advanced per step through the removal/birth balance so
    // monotone decrease holds exactly; stays within ~1e-10 of a fresh sum
    // over any run length used here (see recompute_number).
    double N = 0.0;

    double time() const { return 1.0 + eps * static_cast<double>(j); }
    std::size_t cells() const { return G.size(); }
    double x(std::size_t idx) const { return eps * (static_cast<double>(idx) + 0.5); }

    double recompute_number() const {
        core::KahanSum s;
        for (double v : G)
            s.add(v);
        return eps * s.value();
    }

    double recompute_mass() const {
        core::KahanSum s;
        for (std::size_t i = 0; i < G.size(); ++i)
            s.add(x(i) * G[i]);
        return eps * s.value();
    }
};

inline BoxState make_state(const core::DiscreteDensity& initial, const core::Params& params) {
    initial.require_valid();
    if (!(params.k0 >= 0.0) || !std::isfinite(params.k0))
        throw std::invalid_argument("box model: k0 must be finite and >= 0");
    if (std::abs(initial.grid.upper_edge() - 1.0) > 1e-9)
        throw std::invalid_argument("box model: initial data must live on the unit interval");
    BoxState s;
    s.params = params;
    s.eps = initial.grid.cell_width;
    s.M_b = initial.grid.n_cells;
    s.j = 0;
    s.G = initial.values;
    s.N = s.recompute_number();
    return s;
}

// Value of the newly created largest cell, fixed by mass conservation:
// (eps/2) * sum_i (k0/N) G(i) G(mirror(i)) with mirror(i) = M_b+j+1-i.
inline double birth_value(const BoxState& s) {
    if (!(s.N > 0.0))
        throw degenerate_state_error("birth_value: state has N <= 0");
    core::KahanSum pair_sum;
    const std::size_t n = s.G.size();
    for (std::size_t i = 0; i < n; ++i)
        pair_sum.add(s.G[i] * s.G[n - 1 - i]);
    return 0.5 * s.eps * s.params.k0 / s.N * pair_sum.value();
}

struct StepStats {
    double birth = 0.0;
    double new_mass = 0.0;
    std::size_t clamped = 0;
};

// Advance one step in place. Each cell loses eps*(k0/N)*G(i)*G(mirror),
// clamped at zero, and the birth cell is appended. The exact-mass variant
// replaces the birth value by the one that keeps the discrete mass at 1
// to round-off; the default is the plain conservation formula, which
// conserves mass only to discretization order.
inline StepStats step_in_place(BoxState& s, bool exact_mass_birth = false) {
    if (!(s.N > 0.0) || !std::isfinite(s.N))
        throw degenerate_state_error("step: state has N <= 0");
    const std::size_t n = s.G.size();
    const double eps = s.eps;
    const double c = eps * s.params.k0 / s.N;

    // Mirror pairs are processed together so both updates read old values.
    // Front and back of the pairing feed separate accumulator lanes to keep
    // the compensated-summation dependency chains short; the lanes are
    // combined in a fixed order, so results stay bit-reproducible.
    double pair_front = 0.0, pair_mid = 0.0;
    core::KahanSum rem_front, rem_back, mass_front, mass_back;
    std::size_t clamped = 0;

    std::size_t i = 0, r = n - 1;
    for (; i < r; ++i, --r) {
        const double p = s.G[i] * s.G[r];
        pair_front += p;
        double vi = s.G[i] - c * p;
        double vr = s.G[r] - c * p;
        if (vi < 0.0) {
            vi = 0.0;
            ++clamped;
        }
        if (vr < 0.0) {
            vr = 0.0;
            ++clamped;
        }
        rem_front.add(s.G[i] - vi);
        rem_back.add(s.G[r] - vr);
        s.G[i] = vi;
        s.G[r] = vr;
        mass_front.add((static_cast<double>(i) + 0.5) * vi);
        mass_back.add((static_cast<double>(r) + 0.5) * vr);
    }
    if (i == r) { // odd cell count: the middle cell is its own mirror
        const double p = s.G[i] * s.G[i];
        pair_mid = p;
        double vi = s.G[i] - c * p;
        if (vi < 0.0) {
            vi = 0.0;
            ++clamped;
        }
        rem_front.add(s.G[i] - vi);
        s.G[i] = vi;
        mass_front.add((static_cast<double>(i) + 0.5) * vi);
    }

    const double pair_sum = 2.0 * pair_front + pair_mid;
    const double x_birth = s.x(n); // representative of the appended cell
    const double mass_cells = eps * eps * (mass_front.value() + mass_back.value());
    double birth = 0.5 * eps * s.params.k0 / s.N * pair_sum;
    if (exact_mass_birth) {
        birth = (1.0 - mass_cells) / (eps * x_birth);
        if (birth < 0.0)
            birth = 0.0;
    }

    // N advances by the removal/birth balance. The removal sum dominates
    // the birth value by a factor of about two, so the decrement is
    // nonnegative and N never increases, exactly as in the scheme.
    const double decrement = std::max(0.0, rem_front.value() + rem_back.value() - birth);
    s.G.push_back(birth);
    s.N = s.N - eps * decrement;
    s.j += 1;

    return {birth, mass_cells + eps * x_birth * birth, clamped};
}

// Pure single step.
inline BoxState step(const BoxState& s) {
    BoxState next = s;
    step_in_place(next);
    return next;
}

struct SeriesRow {
    std::size_t j = 0;
    double t = 0.0;
    double N = 0.0;
    double mass = 0.0;
    double birth = 0.0; // value appended by the step leaving this state
};

struct Snapshot {
    std::size_t j = 0;
    BoxState state;
};

struct RunReport {
    std::vector<Snapshot> snapshots;
    std::vector<SeriesRow> series;
    std::size_t steps_completed = 0;
    bool degenerate_abort = false;
    std::size_t clamp_events = 0;
};

struct RunOptions {
    bool exact_mass_birth = false;
};

// Iterate the stepper, recording the series every step and deep snapshots
// on the schedule. A degenerate state aborts with the partial report.
inline RunReport run(const core::DiscreteDensity& initial, const core::Params& params,
                     std::size_t steps, std::span<const std::size_t> snapshot_schedule,
                     RunOptions opt = {}) {
    std::vector<std::size_t> schedule(snapshot_schedule.begin(), snapshot_schedule.end());
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
    if (!schedule.empty() && schedule.back() > steps)
        throw std::invalid_argument("run: snapshot schedule exceeds the step count");

    BoxState s = make_state(initial, params);
    RunReport rep;
    rep.series.reserve(steps + 1);

    double mass = s.recompute_mass();
    std::size_t next_snap = 0;
    for (std::size_t j = 0; j <= steps; ++j) {
        if (next_snap < schedule.size() && schedule[next_snap] == j) {
            rep.snapshots.push_back({j, s});
            ++next_snap;
        }
        if (j == steps) {
            double final_birth = 0.0;
            try {
                final_birth = birth_value(s);
            } catch (const degenerate_state_error&) {
                final_birth = 0.0;
            }
            rep.series.push_back({j, s.time(), s.N, mass, final_birth});
            break;
        }
        const double t = s.time();
        const double N = s.N;
        StepStats stats;
        try {
            stats = step_in_place(s, opt.exact_mass_birth);
        } catch (const degenerate_state_error&) {
            rep.degenerate_abort = true;
            rep.steps_completed = j;
            return rep;
        }
        rep.series.push_back({j, t, N, mass, stats.birth});
        mass = stats.new_mass;
        rep.clamp_events += stats.clamped;
    }
    rep.steps_completed = steps;
    return rep;
}

// Sample the dynamically rescaled profile t^2 g(t, y t) at n midpoints of
// (0, 1), with g interpolated linearly between cell representatives.
inline core::SampledCurve rescaled_profile(const BoxState& s, std::size_t n_samples) {
    if (n_samples < 2)
        throw std::invalid_argument("rescaled_profile: need at least two samples");
    const double t = s.time();
    const core::LinearInterpolant interp(s.eps, s.G);
    core::SampledCurve out;
    out.ys.resize(n_samples);
    out.values.resize(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double y = (static_cast<double>(k) + 0.5) / static_cast<double>(n_samples);
        out.ys[k] = y;
        out.values[k] = t * t * interp(y * t);
    }
    return out;
}

} // namespace maxagg::boxmodel
