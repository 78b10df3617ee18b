#include "snn/ua.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "snn/lif.hpp"

namespace snn {

double ShallowTarget::operator()(const std::vector<double>& x) const {
    double f = 0.0;
    for (std::size_t p = 0; p < nu.size(); ++p) {
        double z = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) z += alpha[p].at(i) * x[i];
        f += nu[p] * sigmoid(z);
    }
    return f;
}

FitFailure::FitFailure(const std::string& what, int it, double l)
    : std::runtime_error(what + " at iteration " + std::to_string(it) +
                         " (loss " + std::to_string(l) + ")"),
      iteration(it),
      loss(l) {}

ShallowTarget fit_shallow(const std::vector<FitSample>& samples, int P, const FitOptions& opts) {
    if (P < 1) throw std::invalid_argument("width must be >= 1");
    if (samples.size() < static_cast<std::size_t>(P))
        throw std::invalid_argument("fit needs at least P samples");
    const std::size_t d = samples.front().x.size();
    for (const FitSample& s : samples)
        if (s.x.size() != d) throw std::invalid_argument("samples differ in dimension");

    ShallowTarget f = opts.init;
    if (f.nu.empty()) {
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        f.nu.resize(P);
        f.alpha.assign(P, std::vector<double>(d));
        for (int p = 0; p < P; ++p) {
            f.nu[p] = u(rng);
            for (double& v : f.alpha[p]) v = u(rng);
        }
    } else if (f.width() != P || f.alpha.size() != static_cast<std::size_t>(P)) {
        throw std::invalid_argument("initial target has the wrong width");
    }

    const double inv_n = 1.0 / static_cast<double>(samples.size());
    std::vector<double> s(P);
    std::vector<double> g_nu(P);
    std::vector<std::vector<double>> g_alpha(P, std::vector<double>(d));
    double loss = 0.0;
    for (int it = 0; it <= opts.iterations; ++it) {
        std::fill(g_nu.begin(), g_nu.end(), 0.0);
        for (auto& row : g_alpha) std::fill(row.begin(), row.end(), 0.0);
        loss = 0.0;
        for (const FitSample& smp : samples) {
            double pred = 0.0;
            for (int p = 0; p < P; ++p) {
                double z = 0.0;
                for (std::size_t i = 0; i < d; ++i) z += f.alpha[p][i] * smp.x[i];
                s[p] = sigmoid(z);
                pred += f.nu[p] * s[p];
            }
            const double r = pred - smp.y;
            loss += r * r;
            for (int p = 0; p < P; ++p) {
                g_nu[p] += 2.0 * r * s[p];
                const double c = 2.0 * r * f.nu[p] * s[p] * (1.0 - s[p]);
                for (std::size_t i = 0; i < d; ++i) g_alpha[p][i] += c * smp.x[i];
            }
        }
        loss *= inv_n;
        if (!std::isfinite(loss)) throw FitFailure("shallow fit diverged", it, loss);
        if (it == opts.iterations) break;
        for (int p = 0; p < P; ++p) {
            f.nu[p] -= opts.learning_rate * g_nu[p] * inv_n;
            for (std::size_t i = 0; i < d; ++i)
                f.alpha[p][i] -= opts.learning_rate * g_alpha[p][i] * inv_n;
        }
    }
    f.rms = std::sqrt(loss);
    return f;
}

UAEntry design_spike_times(double target_value, int K, double w, double tau_u, double theta_u,
                           double T) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (w == 0.0 || !std::isfinite(w)) throw std::invalid_argument("w must be finite and non-zero");
    UAEntry e;
    e.K = K;
    e.S_star = tau_u / w * (theta_u + target_value);
    const double low = K * std::exp(-T / tau_u);
    const double high = static_cast<double>(K);
    // Endpoint values computed from a target land an ulp or so either side.
    e.feasible = e.S_star >= low * (1.0 - 1e-12) && e.S_star <= high * (1.0 + 1e-12);
    if (!e.feasible) return e;
    double t = T - tau_u * std::log(high / std::clamp(e.S_star, low, high));
    // Rounding can leave an endpoint time a few ulps inside the interval.
    if (t < kBoundaryNudge) {
        t = kBoundaryNudge;
        e.boundary = true;
    } else if (t > T - kBoundaryNudge) {
        t = T - kBoundaryNudge;
        e.boundary = true;
    }
    e.train.times.assign(static_cast<std::size_t>(K), t);
    return e;
}

UAEncoding encode(const ShallowTarget& target, const std::vector<double>& x, int K, double w,
                  const StructuralParams& sp) {
    UAEncoding enc;
    enc.K = K;
    enc.feasible = true;
    for (int p = 0; p < target.width(); ++p) {
        double z = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) z += target.alpha[p].at(i) * x[i];
        UAEntry e = design_spike_times(z, K, w, sp.tau_u, sp.theta_u, sp.T);
        e.train.neuron = NeuronId{sp.L, p};
        enc.feasible = enc.feasible && e.feasible;
        enc.boundary = enc.boundary || e.boundary;
        enc.S_star.push_back(e.S_star);
        enc.spike_trains.push_back(std::move(e.train));
    }
    return enc;
}

EncodingReport verify_encoding(const UAEncoding& enc, const ShallowTarget& target,
                               const std::vector<double>& x, const StructuralParams& sp,
                               double w, double grid_step) {
    if (!enc.feasible) throw std::invalid_argument("encoding is not feasible");
    const int P = target.width();
    if (enc.spike_trains.size() != static_cast<std::size_t>(P))
        throw std::invalid_argument("encoding and target differ in width");

    EncodingReport rep;
    rep.f_p = target(x);
    std::vector<double> u_delta;
    for (const SpikeTrain& s : enc.spike_trains)
        u_delta.push_back(delta_output_final(s, w, sp.tau_u, sp.T));
    rep.delta_readout = readout(u_delta, target.nu, sp.theta_u);
    rep.exact_error = std::abs(rep.delta_readout - rep.f_p);
    rep.exact_ok = rep.exact_error <= 1e-9;

    StructuralParams out_sp = StructuralParams::uniform(sp.d, sp.L, P, sp.tau_v, sp.theta_v, 1.0,
                                                        1.0, sp.tau_u, sp.theta_u, sp.mu, sp.T);
    TrainableParams tp = TrainableParams::zeros(out_sp);
    tp.w = w;
    tp.nu = target.nu;
    const SNNOutput g = simulate_output(enc.spike_trains, tp, out_sp, grid_step);
    rep.gaussian_readout = g.readout;
    rep.gap = std::abs(rep.gaussian_readout - rep.delta_readout);

    double nu1 = 0.0;
    for (double v : target.nu) nu1 += std::abs(v);
    rep.bound = kSigmoidLipschitz * nu1 * enc.K * sp.mu * std::abs(w) / (sp.tau_u * sp.tau_u);
    rep.bound_ok = rep.gap <= rep.bound;
    return rep;
}

double mu_budget(double epsilon, int K, double w, const std::vector<double>& nu, double tau_u,
                 double lip_sigma) {
    double nu1 = 0.0;
    for (double v : nu) nu1 += std::abs(v);
    const double denom = 2.0 * K * std::abs(w) * nu1 * lip_sigma;
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw std::invalid_argument("mu budget denominator must be positive");
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    return epsilon * tau_u * tau_u / denom;
}

}  // namespace snn
