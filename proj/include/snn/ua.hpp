#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "snn/types.hpp"

namespace snn {

/// f_P(x) = sum_p nu_p sigmoid(<alpha_p, x>)
struct ShallowTarget {
    std::vector<double> nu;
    std::vector<std::vector<double>> alpha;
    /// Root-mean-square error on the fitting samples.
    double rms = 0.0;

    [[nodiscard]] int width() const { return static_cast<int>(nu.size()); }
    [[nodiscard]] double operator()(const std::vector<double>& x) const;
};

struct FitSample {
    std::vector<double> x;
    double y = 0.0;
};

class FitFailure : public std::runtime_error {
public:
    FitFailure(const std::string& what, int iteration, double loss);
    int iteration;
    double loss;
};

struct FitOptions {
    int iterations = 5000;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    /// Starting point; seeded uniform [-1, 1] when empty.
    ShallowTarget init;
};

/// Full-batch gradient descent on the mean squared error.
ShallowTarget fit_shallow(const std::vector<FitSample>& samples, int P, const FitOptions& opts);

/// Design of one output neuron's input train.
struct UAEntry {
    SpikeTrain train;
    int K = 0;
    double S_star = 0.0;
    bool feasible = false;
    /// A spike time sat on 0 or T and was moved inside by 1e-9.
    bool boundary = false;
};

inline constexpr double kBoundaryNudge = 1e-9;

/// S* = (tau_u / w)(theta_u + target). When K e^{-T/tau_u} <= S* <= K the K
/// spikes share the time T - tau_u ln(K / S*), so the Dirac-input output
/// potential equals theta_u + target. The train may hold repeated times.
UAEntry design_spike_times(double target_value, int K, double w, double tau_u, double theta_u,
                           double T);

struct UAEncoding {
    std::vector<SpikeTrain> spike_trains;
    int K = 0;
    std::vector<double> S_star;
    bool feasible = false;
    bool boundary = false;
};

/// One entry per neuron of `target`, with target value <alpha_p, x>.
UAEncoding encode(const ShallowTarget& target, const std::vector<double>& x, int K, double w,
                  const StructuralParams& sp);

struct EncodingReport {
    double f_p = 0.0;
    double delta_readout = 0.0;
    double exact_error = 0.0;
    double gaussian_readout = 0.0;
    double gap = 0.0;
    double bound = 0.0;
    bool exact_ok = false;
    bool bound_ok = false;
};

/// Dirac-input readout against f_P(x) (must agree to 1e-9) and the Gaussian
/// readout against the bound Lip ||nu||_1 K mu |w| / tau_u^2.
EncodingReport verify_encoding(const UAEncoding& enc, const ShallowTarget& target,
                               const std::vector<double>& x, const StructuralParams& sp,
                               double w, double grid_step);

/// eps tau_u^2 / (2 K |w| ||nu||_1 lip)
double mu_budget(double epsilon, int K, double w, const std::vector<double>& nu, double tau_u,
                 double lip_sigma);

}  // namespace snn
