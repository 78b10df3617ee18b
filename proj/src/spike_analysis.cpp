#include "snn/spike_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "snn/gaussian.hpp"

namespace snn {

BumpAnalysis analyze_separated(const SpikeTrain& presyn, double omega, double tau, double theta,
                               double mu) {
    if (presyn.empty()) throw std::invalid_argument("analysis needs at least one input spike");
    if (!(mu > 0.0 && tau > 0.0 && theta > 0.0))
        throw std::invalid_argument("mu, tau and theta must be positive");
    BumpAnalysis a;
    a.presyn = presyn.times;
    a.mu = mu;
    a.separation_ok = true;
    for (std::size_t k = 1; k < presyn.times.size(); ++k)
        if (!(presyn.times[k] - presyn.times[k - 1] > 6.0 * mu)) a.separation_ok = false;

    const double peak = omega / (mu * std::sqrt(2.0 * std::numbers::pi));
    a.amplitude_ok = peak > theta;
    if (a.amplitude_ok) a.half_width = mu * std::sqrt(2.0 * std::log(peak / theta));

    a.gamma = omega / (tau * theta);
    if (a.gamma > 0.0)
        a.n_max_per_bump = std::max(1, static_cast<int>(std::floor(1.0 + std::log2(a.gamma))));
    const auto K = static_cast<long>(presyn.times.size());
    a.lower = K;
    a.upper = K * a.n_max_per_bump;
    return a;
}

MaximaSet find_maxima(const SpikeTrain& presyn, double mu, double grid_step, double T) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");
    MaximaSet out;
    out.presyn = presyn.times;
    out.mu = mu;
    if (presyn.empty()) return out;
    const GaussianCurrent j(presyn.times, mu);
    const double h = std::min(grid_step, mu / 20.0);
    const double lo = std::max(0.0, presyn.times.front() - kGaussianTruncation * mu);
    const double hi = std::min(T, presyn.times.back() + kGaussianTruncation * mu);
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h));

    double t0 = lo;
    double d0 = j.slope(t0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double t1 = std::min(hi, lo + static_cast<double>(i) * h);
        const double d1 = j.slope(t1);
        if (d0 > 0.0 && d1 <= 0.0) {
            double a = t0;
            double b = t1;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (a + b);
                if (!(m > a && m < b)) break;
                (j.slope(m) > 0.0 ? a : b) = m;
            }
            const double t = 0.5 * (a + b);
            // Discrete second difference must be negative.
            const double e = 1e-3 * mu;
            const bool strict = j.value(t + e) - 2.0 * j.value(t) + j.value(t - e) < 0.0;
            if (strict && t > 0.0 && t < T) {
                if (!out.times.empty() && t - out.times.back() < 1e-2 * mu) {
                    if (j.value(t) > out.values.back()) {
                        out.times.back() = t;
                        out.values.back() = j.value(t);
                    }
                } else {
                    out.times.push_back(t);
                    out.values.push_back(j.value(t));
                }
            }
        }
        t0 = t1;
        d0 = d1;
    }
    return out;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Stable: return "stable";
        case Regime::SeparatedHighGain: return "separated-high-gain";
        case Regime::Overlap: return "overlap";
        case Regime::OverlapHighGain: return "overlap-high-gain";
    }
    return "unknown";
}

RegimeVerdict classify_regime(const BumpAnalysis& analysis, const MaximaSet& maxima,
                              const SpikeTrain& observed) {
    if (analysis.mu != maxima.mu || analysis.presyn != maxima.presyn)
        throw std::invalid_argument("analysis and maxima come from different inputs");
    RegimeVerdict v;
    const bool high = analysis.gamma >= 2.0;
    v.observed = static_cast<long>(observed.times.size());
    if (analysis.separation_ok) {
        v.regime = high ? Regime::SeparatedHighGain : Regime::Stable;
        v.lower = analysis.lower;
        v.upper = high ? analysis.upper : analysis.lower;
    } else {
        v.regime = high ? Regime::OverlapHighGain : Regime::Overlap;
        const auto m = static_cast<long>(maxima.times.size());
        v.lower = m;
        v.upper = m * analysis.n_max_per_bump;
    }
    v.verdict = v.lower <= v.observed && v.observed <= v.upper;
    return v;
}

}  // namespace snn
