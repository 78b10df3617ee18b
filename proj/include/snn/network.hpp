#pragma once

#include <cstddef>
#include <vector>

#include "snn/integrator.hpp"
#include "snn/types.hpp"

namespace snn {

/// Spikes of one layer merged into a single sorted train. Spikes closer than
/// kCoalesceTolerance to an already pooled spike are dropped.
struct PooledTrain {
    SpikeTrain train;
    /// (neuron, spike index) that produced each pooled spike.
    std::vector<std::pair<std::size_t, std::size_t>> origin;
};

inline constexpr double kCoalesceTolerance = 1e-9;

PooledTrain pool_layer(const std::vector<std::vector<double>>& trains, int layer);

/// Everything a forward pass produced, kept so the reverse pass can replay it.
struct NetworkRun {
    TimeGrid grid{1.0, 1.0};
    double drive = 0.0;  // <a, x>
    NeuronResult input;
    /// hidden[l][p] for l = 0..L-1
    std::vector<std::vector<NeuronResult>> hidden;
    /// pools[l] feeds hidden layer l (pools[0] is the input train).
    std::vector<PooledTrain> pools;
    /// Tabulated current of each pool, shared by the neurons of the layer.
    std::vector<std::vector<double>> tables;
    std::vector<NeuronResult> output;
    SNNOutput out;
};

/// <a, x>; throws std::invalid_argument on size mismatch or non-finite values.
double input_drive(const std::vector<double>& a, const std::vector<double>& x);

/// Input -> hidden layers -> output -> readout. `record` keeps the grid
/// states every neuron needs for backprop_network.
NetworkRun run_network(const std::vector<double>& x, const TrainableParams& params,
                       const StructuralParams& sp, double grid_step, const ResetRule& rule,
                       bool record);

/// Gradient of readout_adjoint * readout with respect to every trainable
/// parameter, laid out like TrainableParams.
TrainableParams backprop_network(const NetworkRun& run, const std::vector<double>& x,
                                 const TrainableParams& params, const StructuralParams& sp,
                                 const ResetRule& rule, double readout_adjoint);

/// Bytes of grid state a recorded run keeps.
std::size_t tape_bytes(const StructuralParams& sp, double grid_step);

}  // namespace snn
