#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "snn/gaussian.hpp"
#include "snn/types.hpp"

namespace snn {

/// A neuron fired more than the per-step event cap allows; the grid is too
/// coarse for the drive.
class EventOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform grid t_n = n*h on [0, T] with h = T / steps.
class TimeGrid {
public:
    /// steps = ceil(T / requested_step). Throws if the step is not in (0, T].
    TimeGrid(double T, double requested_step);

    [[nodiscard]] std::size_t steps() const { return steps_; }
    [[nodiscard]] double step() const { return h_; }
    [[nodiscard]] double horizon() const { return T_; }
    /// Exact T at n == steps().
    [[nodiscard]] double time(std::size_t n) const {
        return n >= steps_ ? T_ : static_cast<double>(n) * h_;
    }

private:
    double T_;
    std::size_t steps_;
    double h_;
};

/// What happens to the potential when it crosses threshold.
///
/// `hard` sets it to 0. `discharge` applies D_zeta(s; theta) =
/// (1 - H_zeta(s - theta)) s to the value the trajectory reaches one grid
/// step past the crossing, so that the gate sees the crossing slope.
struct ResetRule {
    bool hard = true;
    double zeta = 0.0;

    static ResetRule hard_reset() { return {}; }
    static ResetRule discharge(double zeta);

    [[nodiscard]] double apply(double detect, double theta) const;
    /// d apply / d detect
    [[nodiscard]] double slope(double detect, double theta) const;
};

/// H_zeta(s) = (1 + tanh(zeta s / 2)) / 2
double mollifier(double s, double zeta);
/// D_zeta(s; theta) = (1 - H_zeta(s - theta)) s
double discharge(double s, double theta, double zeta);
double discharge_slope(double s, double theta, double zeta);

/// tau dx/dt = -x + gain * J(t), where J is a Gaussian current or, for the
/// input neuron, the constant 1.
struct Drive {
    double gain = 0.0;
    const GaussianCurrent* current = nullptr;

    [[nodiscard]] double value(double t) const { return current ? current->value(t) : 1.0; }
    [[nodiscard]] double slope(double t) const { return current ? current->slope(t) : 0.0; }
};

struct NeuronModel {
    double tau = 1.0;
    /// +inf disables threshold detection (output neurons).
    double theta = std::numeric_limits<double>::infinity();
};

struct NeuronResult {
    std::vector<double> spikes;
    double final_value = 0.0;
    /// Grid values x(t_n), filled when states are recorded.
    std::vector<double> states;
    std::vector<ResetEvent> resets;
    /// Step index in which each spike happened.
    std::vector<std::size_t> spike_steps;
};

/// Drive tabulated at the step midpoints t_n + h/2.
std::vector<double> tabulate_drive(const Drive& drive, const TimeGrid& grid);

/// Exponential midpoint integration (exact leak, drive sampled at the step
/// midpoint) with threshold detection by sign change,
/// crossing time by bisection to machine precision, and `rule` applied at
/// the crossing. `table` may be empty, otherwise it must come from
/// tabulate_drive for the same drive and grid.
NeuronResult integrate_neuron(const NeuronModel& model, const Drive& drive,
                              const TimeGrid& grid, const ResetRule& rule,
                              bool record_states, std::span<const double> table = {});

struct NeuronAdjoint {
    double gain = 0.0;
    /// One entry per centre of drive.current (empty for a constant drive).
    std::vector<double> centres;
};

/// Reverse-mode derivative of a recorded integration. Crossing times are
/// differentiated through the root condition, so the result is the exact
/// derivative of the discrete forward map wherever it is smooth.
///
/// `final_adjoint` is dLoss/dx(T); `spike_adjoints[k]` is dLoss/dt_k.
NeuronAdjoint backprop_neuron(const NeuronModel& model, const Drive& drive,
                              const TimeGrid& grid, const ResetRule& rule,
                              const NeuronResult& forward, double final_adjoint,
                              std::span<const double> spike_adjoints,
                              std::span<const double> table = {});

}  // namespace snn
