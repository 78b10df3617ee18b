#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace snn {

/// Fixed (non-trainable) quantities of the network: time constants,
/// thresholds, the Gaussian kernel width and the simulation horizon.
///
/// Hidden-layer constants are stored per neuron (`tau_hidden[l][p]`) even
/// though every experiment in this project uses one value per layer.
struct StructuralParams {
    double tau_v = 8.0;
    double theta_v = 0.8;
    std::vector<std::vector<double>> tau_hidden;
    std::vector<std::vector<double>> theta_hidden;
    double tau_u = 10.0;
    double theta_u = 0.3;
    double mu = 0.2;
    double T = 60.0;
    int L = 1;
    int P = 8;
    int d = 2;

    /// Builds a network whose hidden neurons all share one (tau, theta).
    static StructuralParams uniform(int d, int L, int P, double tau_v, double theta_v,
                                    double tau_hidden, double theta_hidden, double tau_u,
                                    double theta_u, double mu, double T);

    /// Two-moons configuration: T = 60, tau_v = 8, theta_v = 0.8,
    /// tau = 6, theta = 0.25 (hidden), tau_u = 10, theta_u = 0.3, mu = 0.2,
    /// one hidden layer of eight neurons, d = 2.
    static StructuralParams moons_defaults();

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;

    [[nodiscard]] double min_tau() const;

    /// min(mu/10, tau_min/20, T/10000)
    [[nodiscard]] double default_grid_step() const;
};

/// Trainable parameters: input weights `a`, hidden gains `omega[l][p]`,
/// output gain `w` and readout weights `nu`.
struct TrainableParams {
    std::vector<double> a;
    std::vector<std::vector<double>> omega;
    double w = 0.0;
    std::vector<double> nu;

    static TrainableParams zeros(const StructuralParams& sp);

    /// d + L*P + 1 + P
    [[nodiscard]] std::size_t size() const;

    /// Order: a, omega (layer-major), w, nu.
    [[nodiscard]] std::vector<double> flatten() const;
    void assign(const std::vector<double>& flat);

    void validate_against(const StructuralParams& sp) const;
};

/// Layer 0 is the input neuron, layers 1..L are hidden, L+1 is the output layer.
struct NeuronId {
    int layer = 0;
    int index = 0;
    friend bool operator==(const NeuronId&, const NeuronId&) = default;
};

/// Strictly increasing spike times inside the open interval (0, T).
struct SpikeTrain {
    std::vector<double> times;
    NeuronId neuron{};

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] bool empty() const { return times.empty(); }

    /// True when times are strictly increasing and inside (0, T).
    [[nodiscard]] bool well_formed(double T) const;
};

struct ResetEvent {
    double time = 0.0;
    double pre = 0.0;
    double post = 0.0;
};

/// Membrane potential sampled on the integration grid plus the resets that
/// happened between grid points.
struct Trajectory {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<ResetEvent> resets;
};

struct SNNOutput {
    std::vector<double> u_final;
    double readout = 0.0;
};

/// Logistic activation used by the readout.
double sigmoid(double s);

inline constexpr double kSigmoidLipschitz = 0.25;

/// Sum_p nu_p * sigmoid(u_p - theta_u)
double readout(const std::vector<double>& u_final, const std::vector<double>& nu,
               double theta_u);

}  // namespace snn
