#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "snn/data.hpp"
#include "snn/network.hpp"
#include "snn/types.hpp"

namespace snn {

struct MollifierConfig {
    double zeta = 3.0;
    double zeta0 = 3.0;
    double zeta1 = 10.0;
    int epochs = 1;

    void validate() const;
};

/// zeta0 (zeta1 / zeta0)^(e / (E - 1)); zeta0 when E = 1.
double zeta_at(int epoch, const MollifierConfig& cfg);

struct LossConfig {
    double gamma = 1e-3;
    void validate() const;
};

/// Thrown when a recorded forward pass would exceed the memory cap.
class ResourceError : public std::runtime_error {
public:
    ResourceError(std::size_t required, std::size_t cap);
    std::size_t required;
    std::size_t cap;
};

/// Thrown on a non-finite loss; names the first offending sample.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t sample);
    std::size_t sample;
};

inline constexpr std::size_t kDefaultTapeCap = std::size_t{1} << 30;

/// Forward pass with every threshold reset replaced by the discharge map.
/// The returned run doubles as the tape for backprop_network.
NetworkRun forward_mollified(const std::vector<double>& x, const TrainableParams& params,
                             const StructuralParams& sp, double zeta, double grid_step,
                             std::size_t tape_cap = kDefaultTapeCap);

struct Sample {
    std::vector<double> x;
    int y = 0;
};

std::vector<Sample> to_samples(const Dataset& ds);

struct GradientReport {
    /// a, omega (layer-major), w
    std::vector<double> grad_upsilon;
    std::vector<double> grad_nu;
    /// Max |adjoint - central FD| / max(1, |FD|); NaN until checked.
    double fd_check = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] std::vector<double> flat() const;
};

struct LossAndGrad {
    double loss = 0.0;
    GradientReport report;
};

/// Mean binary cross-entropy of sigmoid(readout), with probabilities
/// clipped to [1e-7, 1 - 1e-7], plus gamma (|Upsilon|^2 + |nu|^2).
LossAndGrad loss_and_grad(const std::vector<Sample>& batch, const TrainableParams& params,
                          const StructuralParams& sp, const LossConfig& cfg, double zeta,
                          double grid_step);

double loss_value(const std::vector<Sample>& batch, const TrainableParams& params,
                  const StructuralParams& sp, const LossConfig& cfg, double zeta,
                  double grid_step);

/// Fills report.fd_check with central differences of loss_value, step
/// rel * max(1, |p|) per coordinate, and returns it.
double finite_difference_check(const std::vector<Sample>& batch, const TrainableParams& params,
                               const StructuralParams& sp, const LossConfig& cfg, double zeta,
                               double grid_step, GradientReport& report, double rel = 1e-5);

/// Class 1 iff sigmoid(readout) >= 0.5.
inline int predict_label(double readout) { return readout >= 0.0 ? 1 : 0; }

struct TrainConfig {
    double step = 0.1;
    int epochs = 40;
    LossConfig loss;
    MollifierConfig mollifier;
    double grid_step = 0.006;
    std::uint64_t init_seed = 0;
    /// Largest number of step halvings tried in one epoch.
    int max_halvings = 12;
    /// Step multiplier after an accepted step (1 keeps the step fixed).
    double step_growth = 1.0;
};

struct EpochRecord {
    int epoch = 0;
    double zeta = 0.0;
    double loss = 0.0;
    double step = 0.0;
    Metrics val;
};

struct TrainResult {
    TrainableParams params;
    std::vector<EpochRecord> history;
    bool diverged = false;
    std::string message;
};

/// Uniform in [-1, 1], seeded.
TrainableParams init_params(const StructuralParams& sp, std::uint64_t seed);

/// Full-batch gradient descent over the zeta schedule. A step that raises the
/// loss (at the same zeta) is halved until it does not.
TrainResult train(const TrainConfig& cfg, const StructuralParams& sp,
                  const std::vector<Sample>& train_set, const std::vector<Sample>& val_set);

/// Labels of the mollified network at sharpness zeta.
std::vector<int> predict(const std::vector<Sample>& samples, const TrainableParams& params,
                         const StructuralParams& sp, double zeta, double grid_step);

struct ConvergenceReport {
    std::vector<double> zetas;
    /// max over neurons and grid points of |mollified - hard|
    std::vector<double> sup_gaps;
    /// max over matched spikes of |t_mollified - t_hard|; inf if counts differ
    std::vector<double> spike_gaps;
    double smallest_threshold = 0.0;
    bool verdict = false;
};

/// Thrown when an instance has a crossing with |dx/dt| <= 1e-6.
class NonTransversal : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Compares mollified runs against the hard-reset run of the same solver.
/// Verdict: gaps non-increasing in zeta, final sup gap <= 1e-3 * smallest
/// threshold and final spike gap <= grid_step.
ConvergenceReport verify_mollified_convergence(const TrainableParams& params,
                                               const std::vector<double>& x,
                                               const StructuralParams& sp,
                                               const std::vector<double>& zetas, double grid_step);

}  // namespace snn
