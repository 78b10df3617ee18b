#include "snn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "snn/gaussian.hpp"

namespace snn {

PooledTrain pool_layer(const std::vector<std::vector<double>>& trains, int layer) {
    struct Item {
        double t;
        std::size_t neuron;
        std::size_t index;
    };
    std::vector<Item> items;
    for (std::size_t p = 0; p < trains.size(); ++p)
        for (std::size_t k = 0; k < trains[p].size(); ++k) items.push_back({trains[p][k], p, k});
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& l, const Item& r) { return l.t < r.t; });

    PooledTrain pool;
    pool.train.neuron = NeuronId{layer, -1};
    for (const Item& it : items) {
        if (!pool.train.times.empty() && it.t - pool.train.times.back() <= kCoalesceTolerance)
            continue;
        pool.train.times.push_back(it.t);
        pool.origin.emplace_back(it.neuron, it.index);
    }
    return pool;
}

double input_drive(const std::vector<double>& a, const std::vector<double>& x) {
    if (a.size() != x.size()) throw std::invalid_argument("a and x differ in length");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i]) || !std::isfinite(x[i]))
            throw std::invalid_argument("input weights and features must be finite");
    return std::inner_product(a.begin(), a.end(), x.begin(), 0.0);
}

std::size_t tape_bytes(const StructuralParams& sp, double grid_step) {
    const TimeGrid grid(sp.T, grid_step);
    const std::size_t neurons = 1 + static_cast<std::size_t>(sp.L * sp.P) + sp.P;
    const std::size_t states = neurons * (grid.steps() + 1);
    const std::size_t tables = static_cast<std::size_t>(sp.L) * grid.steps();
    return (states + tables) * sizeof(double);
}

NetworkRun run_network(const std::vector<double>& x, const TrainableParams& params,
                       const StructuralParams& sp, double grid_step, const ResetRule& rule,
                       bool record) {
    sp.validate();
    params.validate_against(sp);
    NetworkRun run;
    run.grid = TimeGrid(sp.T, grid_step);
    run.drive = input_drive(params.a, x);

    run.input = integrate_neuron({sp.tau_v, sp.theta_v}, Drive{run.drive, nullptr}, run.grid,
                                 rule, record);

    std::vector<std::vector<double>> previous{run.input.spikes};
    for (int l = 0; l < sp.L; ++l) {
        run.pools.push_back(pool_layer(previous, l));
        const GaussianCurrent current(run.pools.back().train.times, sp.mu);
        run.tables.push_back(current.centres().empty()
                                 ? std::vector<double>{}
                                 : tabulate_drive(Drive{1.0, &current}, run.grid));
        std::vector<NeuronResult> layer;
        previous.clear();
        for (int p = 0; p < sp.P; ++p) {
            const NeuronModel model{sp.tau_hidden[l][p], sp.theta_hidden[l][p]};
            if (current.centres().empty()) {
                // No input: the neuron stays at rest.
                NeuronResult rest;
                if (record) rest.states.assign(run.grid.steps() + 1, 0.0);
                layer.push_back(std::move(rest));
            } else {
                layer.push_back(integrate_neuron(model, Drive{params.omega[l][p], &current},
                                                 run.grid, rule, record, run.tables.back()));
            }
            previous.push_back(layer.back().spikes);
        }
        run.hidden.push_back(std::move(layer));
    }

    run.out.u_final.resize(sp.P);
    for (int p = 0; p < sp.P; ++p) {
        const GaussianCurrent current(previous[p], sp.mu);
        if (current.centres().empty()) {
            NeuronResult rest;
            if (record) rest.states.assign(run.grid.steps() + 1, 0.0);
            run.output.push_back(std::move(rest));
        } else {
            run.output.push_back(integrate_neuron({sp.tau_u}, Drive{params.w, &current}, run.grid,
                                                  ResetRule::hard_reset(), record));
        }
        run.out.u_final[p] = run.output.back().final_value;
    }
    run.out.readout = readout(run.out.u_final, params.nu, sp.theta_u);
    return run;
}

TrainableParams backprop_network(const NetworkRun& run, const std::vector<double>& x,
                                 const TrainableParams& params, const StructuralParams& sp,
                                 const ResetRule& rule, double readout_adjoint) {
    TrainableParams grad = TrainableParams::zeros(sp);
    const auto P = static_cast<std::size_t>(sp.P);
    const auto L = static_cast<std::size_t>(sp.L);

    // Adjoints of the spike times of the last hidden layer, per neuron.
    std::vector<std::vector<double>> spike_bar(P);
    for (std::size_t p = 0; p < P; ++p) {
        const double s = sigmoid(run.out.u_final[p] - sp.theta_u);
        grad.nu[p] = readout_adjoint * s;
        const double u_bar = readout_adjoint * params.nu[p] * s * (1.0 - s);
        const auto& presyn = run.hidden[L - 1][p].spikes;
        spike_bar[p].assign(presyn.size(), 0.0);
        if (presyn.empty() || u_bar == 0.0) continue;
        const GaussianCurrent current(presyn, sp.mu);
        const NeuronAdjoint adj = backprop_neuron({sp.tau_u}, Drive{params.w, &current}, run.grid,
                                                  ResetRule::hard_reset(), run.output[p], u_bar,
                                                  {});
        grad.w += adj.gain;
        spike_bar[p] = adj.centres;
    }

    for (std::size_t l = L; l-- > 0;) {
        const PooledTrain& pool = run.pools[l];
        std::vector<double> pool_bar(pool.train.times.size(), 0.0);
        if (!pool.train.times.empty()) {
            const GaussianCurrent current(pool.train.times, sp.mu);
            for (std::size_t p = 0; p < P; ++p) {
                const NeuronResult& fwd = run.hidden[l][p];
                if (fwd.spikes.empty()) continue;
                const NeuronModel model{sp.tau_hidden[l][p], sp.theta_hidden[l][p]};
                const NeuronAdjoint adj =
                    backprop_neuron(model, Drive{params.omega[l][p], &current}, run.grid, rule,
                                    fwd, 0.0, spike_bar[p], run.tables[l]);
                grad.omega[l][p] = adj.gain;
                for (std::size_t k = 0; k < pool_bar.size(); ++k) pool_bar[k] += adj.centres[k];
            }
        }
        // Route pooled adjoints back to the neurons that emitted the spikes.
        std::vector<std::vector<double>> below;
        if (l == 0) {
            below.assign(1, std::vector<double>(run.input.spikes.size(), 0.0));
        } else {
            below.resize(P);
            for (std::size_t p = 0; p < P; ++p)
                below[p].assign(run.hidden[l - 1][p].spikes.size(), 0.0);
        }
        for (std::size_t k = 0; k < pool_bar.size(); ++k) {
            const auto [neuron, index] = pool.origin[k];
            below[neuron][index] += pool_bar[k];
        }
        spike_bar = std::move(below);
    }

    if (!run.input.spikes.empty()) {
        const NeuronAdjoint adj =
            backprop_neuron({sp.tau_v, sp.theta_v}, Drive{run.drive, nullptr}, run.grid, rule,
                            run.input, 0.0, spike_bar[0]);
        for (std::size_t i = 0; i < x.size(); ++i) grad.a[i] = adj.gain * x[i];
    }
    return grad;
}

}  // namespace snn
