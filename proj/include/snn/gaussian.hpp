#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "snn/types.hpp"

namespace snn {

/// Kernels further than this many widths from t contribute nothing.
inline constexpr double kGaussianTruncation = 8.0;

/// (1 / (mu sqrt(2 pi))) exp(-dt^2 / (2 mu^2))
inline double gaussian_kernel(double dt, double mu) {
    const double z = dt / mu;
    return std::exp(-0.5 * z * z) / (mu * std::sqrt(2.0 * std::numbers::pi));
}

/// Input current J(t) = sum of unit-mass Gaussians centred at presynaptic
/// spike times. Centres must be sorted.
class GaussianCurrent {
public:
    GaussianCurrent(std::vector<double> centres, double mu);

    [[nodiscard]] double mu() const { return mu_; }
    [[nodiscard]] const std::vector<double>& centres() const { return centres_; }

    [[nodiscard]] double value(double t) const;

    /// dJ/dt
    [[nodiscard]] double slope(double t) const;

    /// Calls f(k, g_k(t), (t - c_k) / mu^2) for every centre c_k inside the
    /// truncation window around t, in increasing k.
    template <class F>
    void visit(double t, F&& f) const {
        const double reach = kGaussianTruncation * mu_;
        auto first = std::lower_bound(centres_.begin(), centres_.end(), t - reach);
        const double inv_mu2 = 1.0 / (mu_ * mu_);
        for (auto it = first; it != centres_.end() && *it <= t + reach; ++it) {
            const double dt = t - *it;
            f(static_cast<std::size_t>(it - centres_.begin()), gaussian_kernel(dt, mu_),
              dt * inv_mu2);
        }
    }

private:
    std::vector<double> centres_;
    double mu_;
};

/// Evaluates J(t) for one spike train. Throws std::invalid_argument if mu <= 0.
double gaussian_current(const SpikeTrain& spikes, double mu, double t);

}  // namespace snn
