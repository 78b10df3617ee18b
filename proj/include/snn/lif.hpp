#pragma once

#include <vector>

#include "snn/network.hpp"
#include "snn/types.hpp"

namespace snn {

/// Closed-form input spike train: period beta = tau_v ln(s / (s - theta_v))
/// with s = <a, x>, spikes at k beta for k = 1..floor(T / beta).
/// Empty when s <= theta_v.
SpikeTrain input_spike_times(const std::vector<double>& a, const std::vector<double>& x,
                             const StructuralParams& sp);

/// Numerical input-neuron trajectory with hard reset.
Trajectory simulate_input(const std::vector<double>& a, const std::vector<double>& x,
                          const StructuralParams& sp, double grid_step);

struct NeuronRecord {
    Trajectory trajectory;
    SpikeTrain spikes;
};

/// Every neuron of hidden layer `layer` (1..L) driven by the pooled train
/// `presyn` of the layer below.
std::vector<NeuronRecord> simulate_hidden(int layer, const SpikeTrain& presyn,
                                          const TrainableParams& params,
                                          const StructuralParams& sp, double grid_step);

/// Output neuron p is driven by presyn[p]; no reset.
SNNOutput simulate_output(const std::vector<SpikeTrain>& presyn, const TrainableParams& params,
                          const StructuralParams& sp, double grid_step);

/// (w / tau_u) sum_k exp(-(T - t_k) / tau_u), the output potential when the
/// Gaussian inputs are replaced by Dirac impulses.
double delta_output_final(const SpikeTrain& spikes, double w, double tau_u, double T);

/// Hard-reset forward pass of the whole network.
SNNOutput forward(const std::vector<double>& x, const TrainableParams& params,
                  const StructuralParams& sp, double grid_step);

/// Converts recorded grid states to a Trajectory.
Trajectory to_trajectory(const NeuronResult& result, const TimeGrid& grid);

}  // namespace snn
