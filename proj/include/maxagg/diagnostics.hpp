#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "maxagg/boxmodel.hpp"
#include "maxagg/core.hpp"
#include "maxagg/selfsimilar.hpp"

namespace maxagg::diagnostics {

// L1 distance on [0, 1] between two sampled curves, both resampled to a
// common uniform grid by linear interpolation (clamped at the ends).
inline double l1_distance(const core::SampledCurve& a, const core::SampledCurve& b,
                          std::size_t n_resample = 512) {
    if (a.ys.size() < 2 || b.ys.size() < 2)
        throw std::invalid_argument("l1_distance: need at least two samples per curve");
    if (a.ys.front() > b.ys.back() || b.ys.front() > a.ys.back())
        throw std::invalid_argument("l1_distance: disjoint supports");
    if (n_resample < 2)
        throw std::invalid_argument("l1_distance: need at least two resample points");

    core::KahanSum acc;
    const double dn = static_cast<double>(n_resample - 1);
    for (std::size_t k = 0; k < n_resample; ++k) {
        const double y = static_cast<double>(k) / dn;
        const double d = std::abs(core::sample_at(a, y) - core::sample_at(b, y));
        acc.add((k == 0 || k + 1 == n_resample) ? 0.5 * d : d);
    }
    return acc.value() / dn;
}

// Per-run time series of the quantities the long-time analysis tracks.
struct ConvergenceSeries {
    std::vector<double> times;
    std::vector<double> N_vals;
    std::vector<double> mass_vals;
    // Distance of each rescaled snapshot to a reference profile; empty when
    // no reference was supplied.
    std::vector<double> l1_to_target;
    double stationarity = std::numeric_limits<double>::quiet_NaN();
};

// Number of steps where N increased (must be zero for the box model).
inline std::size_t count_number_increases(const ConvergenceSeries& s) {
    std::size_t bad = 0;
    for (std::size_t i = 1; i < s.N_vals.size(); ++i)
        if (s.N_vals[i] > s.N_vals[i - 1])
            ++bad;
    return bad;
}

// Sup-norm change of the unscaled density across the trailing `window`
// snapshots, over the cells common to the first and last of them.
inline double stationarity_measure(std::span<const boxmodel::Snapshot> snapshots,
                                   std::size_t window) {
    if (snapshots.size() < 2 || window < 2)
        throw std::invalid_argument("stationarity_measure: need at least two snapshots");
    const std::size_t take = std::min<std::size_t>(window, snapshots.size());
    const boxmodel::BoxState& first = snapshots[snapshots.size() - take].state;
    const boxmodel::BoxState& last = snapshots.back().state;
    const std::size_t common = std::min(first.cells(), last.cells());
    double sup = 0.0;
    for (std::size_t i = 0; i < common; ++i)
        sup = std::max(sup, std::abs(last.G[i] - first.G[i]));
    return sup;
}

// Sup-norm change between two snapshots in self-similar variables.
inline double rescaled_stationarity(const boxmodel::BoxState& a, const boxmodel::BoxState& b,
                                    std::size_t n_samples = 512) {
    const core::SampledCurve ca = boxmodel::rescaled_profile(a, n_samples);
    const core::SampledCurve cb = boxmodel::rescaled_profile(b, n_samples);
    double sup = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i)
        sup = std::max(sup, std::abs(ca.values[i] - cb.values[i]));
    return sup;
}

// Assemble the diagnostics series from a run report; when a reference
// profile is given, each snapshot's rescaled distance to it is recorded.
inline ConvergenceSeries build_series(const boxmodel::RunReport& rep,
                                      const selfsimilar::Profile* reference = nullptr,
                                      std::size_t n_resample = 512) {
    ConvergenceSeries s;
    s.times.reserve(rep.series.size());
    s.N_vals.reserve(rep.series.size());
    s.mass_vals.reserve(rep.series.size());
    for (const boxmodel::SeriesRow& row : rep.series) {
        s.times.push_back(row.t);
        s.N_vals.push_back(row.N);
        s.mass_vals.push_back(row.mass);
    }
    if (reference != nullptr) {
        const core::SampledCurve target = selfsimilar::profile_curve(*reference);
        for (const boxmodel::Snapshot& snap : rep.snapshots)
            s.l1_to_target.push_back(
                l1_distance(boxmodel::rescaled_profile(snap.state, n_resample), target,
                            n_resample));
    }
    if (rep.snapshots.size() >= 2)
        s.stationarity = stationarity_measure(rep.snapshots, rep.snapshots.size());
    return s;
}

struct NBoundReport {
    double ratio = 0.0;  // min N / N(first)
    bool asserted = false; // the bound is a theorem only for k0 < 1/3
    bool pass = true;
};

// For k0 < 1/3 the particle number can never drop to half its initial
// value; for larger k0 the ratio is only reported.
inline NBoundReport n_bound_check(const ConvergenceSeries& s, double k0) {
    if (s.N_vals.empty())
        throw std::invalid_argument("n_bound_check: empty series");
    double nmin = s.N_vals.front();
    for (double v : s.N_vals)
        nmin = std::min(nmin, v);
    NBoundReport rep;
    rep.ratio = nmin / s.N_vals.front();
    rep.asserted = k0 < 1.0 / 3.0;
    rep.pass = rep.asserted ? rep.ratio > 0.5 : true;
    return rep;
}

} // namespace maxagg::diagnostics
