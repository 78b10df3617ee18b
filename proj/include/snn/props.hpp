#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace snn {

/// Outcome of one randomized property sweep. `records` holds one JSON object
/// per trial with at least a "verdict" field.
struct SuiteResult {
    std::string name;
    int trials = 0;
    int passed = 0;
    /// Instances drawn and thrown away (e.g. not transversal).
    int rejected = 0;
    nlohmann::json records = nlohmann::json::array();
    /// Suite-level numbers that are not per trial.
    nlohmann::json summary = nlohmann::json::object();

    [[nodiscard]] bool ok() const { return trials > 0 && passed == trials; }
    [[nodiscard]] nlohmann::json to_json(bool with_records = true) const;
};

/// Simulated input reset times against the closed form, |dt| <= 1e-6 T,
/// over random (a, x, tau_v, theta_v, T).
SuiteResult input_exactness_suite(int trials, std::uint64_t seed);

/// The two hidden-neuron runs of the three-bump fixture, scored against the bands
/// +-0.15 around the expected spike times.
SuiteResult three_bump_suite();

/// Separated bumps, gain ratio below 2 (high_gain = false) or at least 2.
/// Verdict: K <= |T| <= K n_max, and |T| = K below 2.
SuiteResult separated_suite(bool high_gain, int trials, std::uint64_t seed);

/// Clusters of overlapping bumps. Verdict: |M| <= |T| <= |M| n_max.
SuiteResult overlap_suite(int trials, std::uint64_t seed);

/// Mollified-vs-hard ladder on random transversal moons networks.
SuiteResult convergence_suite(int trials, std::uint64_t seed, const std::vector<double>& zetas);

/// Random feasible UA encodings: Dirac readout exact to 1e-9 and the
/// Gaussian readout within the bound.
SuiteResult encoding_suite(int trials, std::uint64_t seed);

/// Gaussian-vs-Dirac readout gap for a fixed encoding over a list of mu.
/// Summary holds the gaps and the log-log slope.
SuiteResult mu_sweep(const std::vector<double>& mus);

}  // namespace snn
