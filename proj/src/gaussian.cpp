#include "snn/gaussian.hpp"

#include <stdexcept>

namespace snn {

GaussianCurrent::GaussianCurrent(std::vector<double> centres, double mu)
    : centres_(std::move(centres)), mu_(mu) {
    if (!(std::isfinite(mu) && mu > 0.0))
        throw std::invalid_argument("Gaussian width mu must be positive");
    if (!std::is_sorted(centres_.begin(), centres_.end()))
        throw std::invalid_argument("Gaussian centres must be sorted");
}

double GaussianCurrent::value(double t) const {
    double j = 0.0;
    visit(t, [&](std::size_t, double g, double) { j += g; });
    return j;
}

double GaussianCurrent::slope(double t) const {
    double dj = 0.0;
    visit(t, [&](std::size_t, double g, double dt_over_mu2) { dj -= g * dt_over_mu2; });
    return dj;
}

double gaussian_current(const SpikeTrain& spikes, double mu, double t) {
    return GaussianCurrent(spikes.times, mu).value(t);
}

}  // namespace snn
