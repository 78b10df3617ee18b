#include "snn/lif.hpp"

#include <cmath>
#include <stdexcept>

#include "snn/gaussian.hpp"
#include "snn/integrator.hpp"

namespace snn {

SpikeTrain input_spike_times(const std::vector<double>& a, const std::vector<double>& x,
                             const StructuralParams& sp) {
    sp.validate();
    if (a.size() != static_cast<std::size_t>(sp.d))
        throw std::invalid_argument("len(a) must equal d");
    const double s = input_drive(a, x);
    SpikeTrain train;
    train.neuron = NeuronId{0, 0};
    if (s <= sp.theta_v) return train;
    const double beta = sp.tau_v * std::log(s / (s - sp.theta_v));
    const auto K = static_cast<long>(std::floor(sp.T / beta));
    for (long k = 1; k <= K; ++k) {
        const double t = static_cast<double>(k) * beta;
        if (t < sp.T) train.times.push_back(t);
    }
    return train;
}

Trajectory to_trajectory(const NeuronResult& result, const TimeGrid& grid) {
    Trajectory tr;
    tr.grid.resize(grid.steps() + 1);
    for (std::size_t n = 0; n <= grid.steps(); ++n) tr.grid[n] = grid.time(n);
    tr.values = result.states;
    tr.resets = result.resets;
    return tr;
}

Trajectory simulate_input(const std::vector<double>& a, const std::vector<double>& x,
                          const StructuralParams& sp, double grid_step) {
    sp.validate();
    const TimeGrid grid(sp.T, grid_step);
    const double s = input_drive(a, x);
    const NeuronResult res = integrate_neuron({sp.tau_v, sp.theta_v}, Drive{s, nullptr}, grid,
                                              ResetRule::hard_reset(), true);
    return to_trajectory(res, grid);
}

std::vector<NeuronRecord> simulate_hidden(int layer, const SpikeTrain& presyn,
                                          const TrainableParams& params,
                                          const StructuralParams& sp, double grid_step) {
    sp.validate();
    params.validate_against(sp);
    if (layer < 1 || layer > sp.L) throw std::invalid_argument("hidden layer index out of range");
    const TimeGrid grid(sp.T, grid_step);
    const GaussianCurrent current(presyn.times, sp.mu);
    const auto l = static_cast<std::size_t>(layer - 1);
    std::vector<double> table;
    if (!presyn.empty()) table = tabulate_drive(Drive{1.0, &current}, grid);

    std::vector<NeuronRecord> out;
    for (int p = 0; p < sp.P; ++p) {
        const NeuronModel model{sp.tau_hidden[l][p], sp.theta_hidden[l][p]};
        const NeuronResult res = integrate_neuron(model, Drive{params.omega[l][p], &current},
                                                  grid, ResetRule::hard_reset(), true, table);
        NeuronRecord rec;
        rec.trajectory = to_trajectory(res, grid);
        rec.spikes.times = res.spikes;
        rec.spikes.neuron = NeuronId{layer, p};
        out.push_back(std::move(rec));
    }
    return out;
}

SNNOutput simulate_output(const std::vector<SpikeTrain>& presyn, const TrainableParams& params,
                          const StructuralParams& sp, double grid_step) {
    sp.validate();
    params.validate_against(sp);
    if (presyn.size() != static_cast<std::size_t>(sp.P))
        throw std::invalid_argument("one presynaptic train per output neuron is required");
    const TimeGrid grid(sp.T, grid_step);
    SNNOutput out;
    for (const SpikeTrain& train : presyn) {
        const GaussianCurrent current(train.times, sp.mu);
        const NeuronResult res = integrate_neuron({sp.tau_u}, Drive{params.w, &current}, grid,
                                                  ResetRule::hard_reset(), false);
        out.u_final.push_back(res.final_value);
    }
    out.readout = readout(out.u_final, params.nu, sp.theta_u);
    return out;
}

double delta_output_final(const SpikeTrain& spikes, double w, double tau_u, double T) {
    double sum = 0.0;
    for (double t : spikes.times) sum += std::exp(-(T - t) / tau_u);
    return w / tau_u * sum;
}

SNNOutput forward(const std::vector<double>& x, const TrainableParams& params,
                  const StructuralParams& sp, double grid_step) {
    return run_network(x, params, sp, grid_step, ResetRule::hard_reset(), false).out;
}

}  // namespace snn
