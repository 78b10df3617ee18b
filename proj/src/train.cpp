#include "snn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "snn/gaussian.hpp"

namespace snn {

void MollifierConfig::validate() const {
    if (!(zeta > 0.0 && zeta0 > 0.0 && zeta1 > 0.0))
        throw std::invalid_argument("mollifier sharpness values must be positive");
    if (zeta1 < zeta0) throw std::invalid_argument("zeta1 must be >= zeta0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
}

double zeta_at(int epoch, const MollifierConfig& cfg) {
    if (cfg.epochs <= 1) return cfg.zeta0;
    const double frac = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
    return cfg.zeta0 * std::pow(cfg.zeta1 / cfg.zeta0, frac);
}

void LossConfig::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("gamma must be finite and >= 0");
}

ResourceError::ResourceError(std::size_t req, std::size_t c)
    : std::runtime_error("recorded forward pass needs " + std::to_string(req) +
                         " bytes, cap is " + std::to_string(c)),
      required(req),
      cap(c) {}

NumericError::NumericError(const std::string& what, std::size_t s)
    : std::runtime_error(what + " (sample " + std::to_string(s) + ")"), sample(s) {}

NetworkRun forward_mollified(const std::vector<double>& x, const TrainableParams& params,
                             const StructuralParams& sp, double zeta, double grid_step,
                             std::size_t tape_cap) {
    const std::size_t need = tape_bytes(sp, grid_step);
    if (need > tape_cap) throw ResourceError(need, tape_cap);
    return run_network(x, params, sp, grid_step, ResetRule::discharge(zeta), true);
}

std::vector<Sample> to_samples(const Dataset& ds) {
    std::vector<Sample> out;
    out.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        out.push_back({{ds.points[i][0], ds.points[i][1]}, ds.labels[i]});
    return out;
}

std::vector<double> GradientReport::flat() const {
    std::vector<double> out = grad_upsilon;
    out.insert(out.end(), grad_nu.begin(), grad_nu.end());
    return out;
}

namespace {

constexpr double kProbClip = 1e-7;

// Runs f(i) for i in [0, n) on up to hardware_concurrency threads. Callers
// write results into per-index slots, so the reduction order stays fixed.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers =
        std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct SampleLoss {
    double loss;
    double readout_bar;
};

SampleLoss bce(double readout, int y) {
    const double p = sigmoid(readout);
    const double q = std::clamp(p, kProbClip, 1.0 - kProbClip);
    const double loss = y == 1 ? -std::log(q) : -std::log(1.0 - q);
    const bool clipped = p < kProbClip || p > 1.0 - kProbClip;
    return {loss, clipped ? 0.0 : p - static_cast<double>(y)};
}

double regularizer(const TrainableParams& p) {
    double r = 0.0;
    for (double v : p.flatten()) r += v * v;
    return r;
}

void check_batch(const std::vector<Sample>& batch) {
    if (batch.empty()) throw std::invalid_argument("batch must not be empty");
    for (const Sample& s : batch)
        if (s.y != 0 && s.y != 1) throw std::invalid_argument("labels must be 0 or 1");
}

}  // namespace

LossAndGrad loss_and_grad(const std::vector<Sample>& batch, const TrainableParams& params,
                          const StructuralParams& sp, const LossConfig& cfg, double zeta,
                          double grid_step) {
    check_batch(batch);
    cfg.validate();
    const ResetRule rule = ResetRule::discharge(zeta);
    std::vector<double> losses(batch.size());
    std::vector<std::vector<double>> grads(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
        const NetworkRun run = forward_mollified(batch[i].x, params, sp, zeta, grid_step);
        const SampleLoss sl = bce(run.out.readout, batch[i].y);
        losses[i] = sl.loss;
        grads[i] = backprop_network(run, batch[i].x, params, sp, rule, sl.readout_bar).flatten();
    });

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const std::vector<double> flat = params.flatten();
    std::vector<double> total(flat.size(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!std::isfinite(losses[i])) throw NumericError("non-finite loss", i);
        loss += losses[i];
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += grads[i][k];
    }
    LossAndGrad out;
    out.loss = loss * inv_n + cfg.gamma * regularizer(params);
    for (std::size_t k = 0; k < total.size(); ++k)
        total[k] = total[k] * inv_n + 2.0 * cfg.gamma * flat[k];
    const std::size_t n_nu = params.nu.size();
    out.report.grad_upsilon.assign(total.begin(), total.end() - static_cast<std::ptrdiff_t>(n_nu));
    out.report.grad_nu.assign(total.end() - static_cast<std::ptrdiff_t>(n_nu), total.end());
    return out;
}

double loss_value(const std::vector<Sample>& batch, const TrainableParams& params,
                  const StructuralParams& sp, const LossConfig& cfg, double zeta,
                  double grid_step) {
    check_batch(batch);
    cfg.validate();
    const ResetRule rule = ResetRule::discharge(zeta);
    std::vector<double> losses(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
        const NetworkRun run = run_network(batch[i].x, params, sp, grid_step, rule, false);
        losses[i] = bce(run.out.readout, batch[i].y).loss;
    });
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!std::isfinite(losses[i])) throw NumericError("non-finite loss", i);
        loss += losses[i];
    }
    return loss / static_cast<double>(batch.size()) + cfg.gamma * regularizer(params);
}

double finite_difference_check(const std::vector<Sample>& batch, const TrainableParams& params,
                               const StructuralParams& sp, const LossConfig& cfg, double zeta,
                               double grid_step, GradientReport& report, double rel) {
    const std::vector<double> flat = params.flatten();
    const std::vector<double> grad = report.flat();
    double worst = 0.0;
    for (std::size_t k = 0; k < flat.size(); ++k) {
        const double h = rel * std::max(1.0, std::abs(flat[k]));
        auto at = [&](double v) {
            std::vector<double> moved = flat;
            moved[k] = v;
            TrainableParams q = params;
            q.assign(moved);
            return loss_value(batch, q, sp, cfg, zeta, grid_step);
        };
        const double fd = (at(flat[k] + h) - at(flat[k] - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(grad[k] - fd) / std::max(1.0, std::abs(fd)));
    }
    report.fd_check = worst;
    return worst;
}

TrainableParams init_params(const StructuralParams& sp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TrainableParams tp = TrainableParams::zeros(sp);
    std::vector<double> flat(tp.size());
    for (double& v : flat) v = u(rng);
    tp.assign(flat);
    return tp;
}

std::vector<int> predict(const std::vector<Sample>& samples, const TrainableParams& params,
                         const StructuralParams& sp, double zeta, double grid_step) {
    const ResetRule rule = ResetRule::discharge(zeta);
    std::vector<int> labels(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        labels[i] = predict_label(
            run_network(samples[i].x, params, sp, grid_step, rule, false).out.readout);
    });
    return labels;
}

namespace {

Metrics evaluate(const std::vector<Sample>& set, const TrainableParams& params,
                 const StructuralParams& sp, double zeta, double grid_step) {
    if (set.empty()) return {};
    std::vector<int> actual;
    for (const Sample& s : set) actual.push_back(s.y);
    return compute_metrics(predict(set, params, sp, zeta, grid_step), actual);
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const StructuralParams& sp,
                  const std::vector<Sample>& train_set, const std::vector<Sample>& val_set) {
    cfg.loss.validate();
    MollifierConfig moll = cfg.mollifier;
    moll.epochs = cfg.epochs;
    moll.validate();
    if (!(cfg.step > 0.0)) throw std::invalid_argument("step must be positive");
    if (!(cfg.step_growth >= 1.0)) throw std::invalid_argument("step growth must be >= 1");

    TrainResult result;
    result.params = init_params(sp, cfg.init_seed);
    double step = cfg.step;
    try {
        for (int e = 0; e < cfg.epochs; ++e) {
            const double zeta = zeta_at(e, moll);
            const LossAndGrad lg =
                loss_and_grad(train_set, result.params, sp, cfg.loss, zeta, cfg.grid_step);
            const std::vector<double> grad = lg.report.flat();
            const std::vector<double> flat = result.params.flatten();

            TrainableParams candidate = result.params;
            double loss = lg.loss;
            bool accepted = false;
            for (int tries = 0; tries <= cfg.max_halvings; ++tries) {
                std::vector<double> moved = flat;
                for (std::size_t k = 0; k < moved.size(); ++k) moved[k] -= step * grad[k];
                candidate.assign(moved);
                // A step that breaks the forward pass counts as an increase.
                double trial = std::numeric_limits<double>::infinity();
                try {
                    trial = loss_value(train_set, candidate, sp, cfg.loss, zeta, cfg.grid_step);
                } catch (const NumericError&) {
                } catch (const EventOverflow&) {
                }
                if (trial <= lg.loss + 1e-6) {
                    loss = trial;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (accepted) result.params = candidate;
            const double used = step;
            if (accepted) step *= cfg.step_growth;

            EpochRecord rec;
            rec.epoch = e;
            rec.zeta = zeta;
            rec.loss = loss;
            rec.step = used;
            rec.val = evaluate(val_set, result.params, sp, zeta, cfg.grid_step);
            result.history.push_back(rec);
        }
    } catch (const NumericError& err) {
        result.diverged = true;
        result.message = err.what();
    } catch (const EventOverflow& err) {
        result.diverged = true;
        result.message = err.what();
    }
    return result;
}

namespace {

// Slope of the hard-reset potential just before each of its crossings.
double min_crossing_slope(const NetworkRun& hard, const StructuralParams& sp,
                          const TrainableParams& params) {
    double slope = std::numeric_limits<double>::infinity();
    if (!hard.input.spikes.empty()) slope = (hard.drive - sp.theta_v) / sp.tau_v;
    for (std::size_t l = 0; l < hard.hidden.size(); ++l) {
        const GaussianCurrent current(hard.pools[l].train.times, sp.mu);
        for (std::size_t p = 0; p < hard.hidden[l].size(); ++p) {
            const double tau = sp.tau_hidden[l][p];
            const double theta = sp.theta_hidden[l][p];
            for (double t : hard.hidden[l][p].spikes)
                slope = std::min(slope, (-theta + params.omega[l][p] * current.value(t)) / tau);
        }
    }
    return slope;
}

void compare(const NeuronResult& a, const NeuronResult& b, double& sup, double& spike) {
    for (std::size_t n = 0; n < a.states.size(); ++n)
        sup = std::max(sup, std::abs(a.states[n] - b.states[n]));
    if (a.spikes.size() != b.spikes.size()) {
        spike = std::numeric_limits<double>::infinity();
        return;
    }
    for (std::size_t k = 0; k < a.spikes.size(); ++k)
        spike = std::max(spike, std::abs(a.spikes[k] - b.spikes[k]));
}

}  // namespace

ConvergenceReport verify_mollified_convergence(const TrainableParams& params,
                                               const std::vector<double>& x,
                                               const StructuralParams& sp,
                                               const std::vector<double>& zetas, double grid_step) {
    for (std::size_t i = 1; i < zetas.size(); ++i)
        if (!(zetas[i] > zetas[i - 1])) throw std::invalid_argument("zetas must increase");
    const NetworkRun hard =
        run_network(x, params, sp, grid_step, ResetRule::hard_reset(), true);
    const double slope = min_crossing_slope(hard, sp, params);
    if (!(slope > 1e-6))
        throw NonTransversal("threshold crossing with slope " + std::to_string(slope) +
                             " is not transversal");

    ConvergenceReport rep;
    rep.zetas = zetas;
    rep.smallest_threshold = sp.theta_v;
    for (const auto& row : sp.theta_hidden)
        for (double th : row) rep.smallest_threshold = std::min(rep.smallest_threshold, th);

    for (double zeta : zetas) {
        const NetworkRun soft =
            run_network(x, params, sp, grid_step, ResetRule::discharge(zeta), true);
        double sup = 0.0;
        double spike = 0.0;
        compare(soft.input, hard.input, sup, spike);
        for (std::size_t l = 0; l < hard.hidden.size(); ++l)
            for (std::size_t p = 0; p < hard.hidden[l].size(); ++p)
                compare(soft.hidden[l][p], hard.hidden[l][p], sup, spike);
        for (std::size_t p = 0; p < hard.output.size(); ++p)
            compare(soft.output[p], hard.output[p], sup, spike);
        rep.sup_gaps.push_back(sup);
        rep.spike_gaps.push_back(spike);
    }

    bool ok = !zetas.empty();
    for (std::size_t i = 1; i < zetas.size(); ++i)
        ok = ok && rep.sup_gaps[i] <= rep.sup_gaps[i - 1] &&
             rep.spike_gaps[i] <= rep.spike_gaps[i - 1];
    if (ok) {
        ok = rep.sup_gaps.back() <= 1e-3 * rep.smallest_threshold &&
             rep.spike_gaps.back() <= grid_step;
    }
    rep.verdict = ok;
    return rep;
}

}  // namespace snn
