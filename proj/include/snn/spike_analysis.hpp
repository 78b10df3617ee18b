#pragma once

#include <limits>
#include <string>
#include <vector>

#include "snn/types.hpp"

namespace snn {

/// Predicates and spike-count bounds for one hidden neuron driven by
/// Gaussian bumps.
struct BumpAnalysis {
    /// Every gap between presynaptic spikes exceeds 6 mu.
    bool separation_ok = false;
    /// omega times the bump peak 1 / (mu sqrt(2 pi)) exceeds theta.
    bool amplitude_ok = false;
    /// Radius of the window around each bump where omega g(t) > theta; NaN
    /// when the amplitude condition fails.
    double half_width = std::numeric_limits<double>::quiet_NaN();
    /// omega / (tau theta)
    double gamma = 0.0;
    /// floor(1 + log2 gamma), at least 1
    int n_max_per_bump = 1;
    long lower = 0;
    long upper = 0;

    std::vector<double> presyn;
    double mu = 0.0;
};

BumpAnalysis analyze_separated(const SpikeTrain& presyn, double omega, double tau, double theta,
                               double mu);

struct MaximaSet {
    std::vector<double> times;
    std::vector<double> values;

    std::vector<double> presyn;
    double mu = 0.0;
};

/// Strict local maxima of the Gaussian current inside (0, T), found by a
/// sign change of J' on a scan of resolution min(grid_step, mu / 20) and
/// refined by bisection. Maxima closer than 1e-2 mu are merged.
MaximaSet find_maxima(const SpikeTrain& presyn, double mu, double grid_step,
                      double T = std::numeric_limits<double>::infinity());

enum class Regime { Stable, SeparatedHighGain, Overlap, OverlapHighGain };

std::string to_string(Regime r);

struct RegimeVerdict {
    Regime regime = Regime::Stable;
    long lower = 0;
    long upper = 0;
    long observed = 0;
    bool verdict = false;
};

/// Regime from separation and gain, and whether the observed count obeys
/// its bound: K in the stable case, [K, K n_max] for separated high gain,
/// [|M|, |M| n_max] for overlapping bumps.
RegimeVerdict classify_regime(const BumpAnalysis& analysis, const MaximaSet& maxima,
                              const SpikeTrain& observed);

}  // namespace snn
