#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "snn/gaussian.hpp"
#include "snn/integrator.hpp"
#include "snn/network.hpp"

using namespace snn;

namespace {

// Scalar functional of one neuron run: x(T) plus a weighted sum of spike times.
struct Probe {
    double final_weight;
    std::vector<double> spike_weights;

    double operator()(const NeuronResult& r) const {
        double f = final_weight * r.final_value;
        for (std::size_t k = 0; k < r.spikes.size(); ++k) f += spike_weights.at(k) * r.spikes[k];
        return f;
    }
};

double central(const std::function<double(double)>& f, double x0, double rel = 1e-6) {
    const double h = rel * std::max(1.0, std::abs(x0));
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

void check_hidden_neuron(const ResetRule& rule, double omega) {
    const NeuronModel model{5.0, 0.2};
    const TimeGrid grid(60.0, 0.006);
    const std::vector<double> centres{20.0, 35.0, 50.0};
    const GaussianCurrent current(centres, 0.8);
    const NeuronResult fwd = integrate_neuron(model, Drive{omega, &current}, grid, rule, true);
    REQUIRE(!fwd.spikes.empty());

    Probe probe{0.7, {}};
    for (std::size_t k = 0; k < fwd.spikes.size(); ++k) probe.spike_weights.push_back(0.3 - 0.1 * k);
    const NeuronAdjoint adj =
        backprop_neuron(model, Drive{omega, &current}, grid, rule, fwd, probe.final_weight,
                        probe.spike_weights);

    const double d_omega = central(
        [&](double g) {
            const NeuronResult r = integrate_neuron(model, Drive{g, &current}, grid, rule, false);
            REQUIRE(r.spikes.size() == fwd.spikes.size());
            return probe(r);
        },
        omega);
    CHECK(adj.gain == doctest::Approx(d_omega).epsilon(1e-5));

    for (std::size_t k = 0; k < centres.size(); ++k) {
        const double d_c = central(
            [&](double c) {
                auto moved = centres;
                moved[k] = c;
                const GaussianCurrent cur(moved, 0.8);
                const NeuronResult r = integrate_neuron(model, Drive{omega, &cur}, grid, rule, false);
                REQUIRE(r.spikes.size() == fwd.spikes.size());
                return probe(r);
            },
            centres[k]);
        CHECK(adj.centres[k] == doctest::Approx(d_c).epsilon(1e-5).scale(1e-3));
    }
}

}  // namespace

TEST_CASE("mollifier and discharge") {
    CHECK(mollifier(0.0, 7.0) == 0.5);
    CHECK(mollifier(10.0 / 3.0, 3.0) == doctest::Approx(0.5 * (1.0 + std::tanh(5.0))).epsilon(1e-15));
    CHECK(mollifier(0.4, 3.0) + mollifier(-0.4, 3.0) == doctest::Approx(1.0).epsilon(1e-15));

    for (double zeta : {0.5, 3.0, 300.0}) {
        CHECK(discharge(0.25, 0.25, zeta) == doctest::Approx(0.125).epsilon(1e-15));
        const double low = 0.25 - 20.0 / zeta;
        CHECK(std::abs(discharge(low, 0.25, zeta) - low) <= 1e-8 * std::abs(low));
        const double high = 0.25 + 20.0 / zeta;
        CHECK(std::abs(discharge(high, 0.25, zeta)) <= 1e-8 * high);

        const double s = 0.31;
        const double fd = (discharge(s + 1e-7, 0.25, zeta) - discharge(s - 1e-7, 0.25, zeta)) / 2e-7;
        CHECK(discharge_slope(s, 0.25, zeta) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK_THROWS_AS(ResetRule::discharge(0.0), std::invalid_argument);
}

TEST_CASE("crossings are located at the threshold") {
    const NeuronModel model{8.0, 0.8};
    const TimeGrid grid(60.0, 0.01);
    const NeuronResult r = integrate_neuron(model, Drive{1.0, nullptr}, grid, ResetRule::hard_reset(), true);
    REQUIRE(r.spikes.size() == 4);
    for (const ResetEvent& e : r.resets) CHECK(std::abs(e.pre - 0.8) < 1e-12);
    // Exact leak: spikes land on k * 8 ln 5 to rounding.
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(r.spikes[k] == doctest::Approx((k + 1) * 8.0 * std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("discharge reset records the gated value") {
    const NeuronModel model{5.0, 0.2};
    const TimeGrid grid(60.0, 0.006);
    const GaussianCurrent current({20.0, 35.0, 50.0}, 0.8);
    const ResetRule rule = ResetRule::discharge(3.0);
    const NeuronResult r = integrate_neuron(model, Drive{1.5, &current}, grid, rule, true);
    REQUIRE(!r.resets.empty());
    for (const ResetEvent& e : r.resets) CHECK(e.post == discharge(e.pre, 0.2, 3.0));

    // Very sharp gate: same spikes as the hard reset.
    const NeuronResult sharp = integrate_neuron(model, Drive{1.5, &current}, grid, ResetRule::discharge(1e6), true);
    const NeuronResult hard = integrate_neuron(model, Drive{1.5, &current}, grid, ResetRule::hard_reset(), true);
    REQUIRE(sharp.spikes.size() == hard.spikes.size());
    double gap = 0.0;
    for (std::size_t n = 0; n < hard.states.size(); ++n)
        gap = std::max(gap, std::abs(sharp.states[n] - hard.states[n]));
    CHECK(gap < 1e-4);
}

TEST_CASE("adjoint of one neuron matches finite differences") {
    SUBCASE("hard reset, one spike per bump") { check_hidden_neuron(ResetRule::hard_reset(), 1.5); }
    SUBCASE("hard reset, two spikes per bump") { check_hidden_neuron(ResetRule::hard_reset(), 3.0); }
    SUBCASE("discharge zeta 3") { check_hidden_neuron(ResetRule::discharge(3.0), 3.0); }
    SUBCASE("discharge zeta 30") { check_hidden_neuron(ResetRule::discharge(30.0), 2.0); }
}

TEST_CASE("adjoint of a constant-drive neuron") {
    const NeuronModel model{8.0, 0.8};
    const TimeGrid grid(60.0, 0.006);
    for (const ResetRule& rule : {ResetRule::hard_reset(), ResetRule::discharge(3.0)}) {
        const double s = 1.3;
        const NeuronResult fwd = integrate_neuron(model, Drive{s, nullptr}, grid, rule, true);
        Probe probe{0.5, std::vector<double>(fwd.spikes.size(), 0.0)};
        for (std::size_t k = 0; k < fwd.spikes.size(); ++k) probe.spike_weights[k] = 1.0 / (k + 1);
        const NeuronAdjoint adj = backprop_neuron(model, Drive{s, nullptr}, grid, rule, fwd, 0.5, probe.spike_weights);
        const double fd = central(
            [&](double g) { return probe(integrate_neuron(model, Drive{g, nullptr}, grid, rule, false)); }, s);
        CHECK(adj.gain == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("network adjoint matches finite differences") {
    StructuralParams sp;
    sp = StructuralParams::uniform(2, 2, 3, 8.0, 0.8, 6.0, 0.25, 10.0, 0.3, 0.4, 40.0);
    const double h = 0.01;
    TrainableParams tp = TrainableParams::zeros(sp);
    tp.a = {1.4, 0.6};
    tp.omega = {{1.5, 1.2, 1.9}, {1.1, 1.4, 0.8}};
    tp.w = 1.3;
    tp.nu = {0.5, -0.8, 1.1};
    const std::vector<double> x{0.9, 0.4};

    for (const ResetRule& rule : {ResetRule::hard_reset(), ResetRule::discharge(3.0)}) {
        const NetworkRun run = run_network(x, tp, sp, h, rule, true);
        REQUIRE(!run.input.spikes.empty());
        const TrainableParams grad = backprop_network(run, x, tp, sp, rule, 1.0);
        const auto flat = tp.flatten();
        const auto g = grad.flatten();
        for (std::size_t i = 0; i < flat.size(); ++i) {
            const double fd = central(
                [&](double v) {
                    auto moved = flat;
                    moved[i] = v;
                    TrainableParams q = tp;
                    q.assign(moved);
                    return run_network(x, q, sp, h, rule, false).out.readout;
                },
                flat[i], 1e-7);
            INFO("parameter " << i);
            CHECK(std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)) < 1e-5);
        }
    }
}
