#include "snn/integrator.hpp"

#include <cmath>
#include <stdexcept>

namespace snn {

TimeGrid::TimeGrid(double T, double requested_step) : T_(T) {
    if (!(std::isfinite(T) && T > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(std::isfinite(requested_step) && requested_step > 0.0))
        throw std::invalid_argument("grid step must be positive");
    if (requested_step > T) throw std::invalid_argument("grid step exceeds the horizon");
    const double n = std::ceil(T / requested_step * (1.0 - 1e-12));
    steps_ = static_cast<std::size_t>(std::max(1.0, n));
    h_ = T / static_cast<double>(steps_);
}

double mollifier(double s, double zeta) { return sigmoid(zeta * s); }

double discharge(double s, double theta, double zeta) { return sigmoid(-zeta * (s - theta)) * s; }

double discharge_slope(double s, double theta, double zeta) {
    const double u = zeta * (s - theta);
    const double open = sigmoid(-u);
    return open - s * zeta * sigmoid(u) * open;
}

ResetRule ResetRule::discharge(double zeta) {
    if (!(std::isfinite(zeta) && zeta > 0.0))
        throw std::invalid_argument("mollifier sharpness must be positive");
    return ResetRule{false, zeta};
}

double ResetRule::apply(double detect, double theta) const {
    return hard ? 0.0 : snn::discharge(detect, theta, zeta);
}

double ResetRule::slope(double detect, double theta) const {
    return hard ? 0.0 : discharge_slope(detect, theta, zeta);
}

namespace {

constexpr int kMaxEventsPerStep = 64;

// Exponential midpoint step: the leak is integrated exactly and the drive
// is sampled at the middle of the step.
double advance_value(double x, double eta, double tau, double gain, double fm) {
    const double e = std::exp(-eta / tau);
    return e * x + gain * (1.0 - e) * fm;
}

struct Partials {
    double value;
    double d_x;
    double d_s;
    double d_eta;
    double d_gain;
};

Partials advance_partials(double x, double s, double eta, const NeuronModel& m,
                          const Drive& drive) {
    const double tau = m.tau;
    const double g = drive.gain;
    const double mid = s + 0.5 * eta;
    const double fm = drive.value(mid);
    const double dfm = drive.slope(mid);
    const double e = std::exp(-eta / tau);
    Partials p{};
    p.value = e * x + g * (1.0 - e) * fm;
    p.d_x = e;
    p.d_gain = (1.0 - e) * fm;
    p.d_s = g * (1.0 - e) * dfm;
    p.d_eta = e / tau * (g * fm - x) + 0.5 * g * (1.0 - e) * dfm;
    return p;
}

// bar[k] += coef * d advance(x, s, eta) / d c_k
void accumulate_centres(double coef, double s, double eta, const NeuronModel& m,
                        const Drive& drive, std::vector<double>& bar) {
    if (drive.current == nullptr || coef == 0.0) return;
    const double am = coef * drive.gain * (1.0 - std::exp(-eta / m.tau));
    drive.current->visit(s + 0.5 * eta,
                         [&](std::size_t k, double g, double w) { bar[k] += am * g * w; });
}

struct Segment {
    double x;
    double s;
    double eta;
    bool on_grid;
    bool event;
    double detect;
};

struct StepContext {
    const NeuronModel& model;
    const Drive& drive;
    const TimeGrid& grid;
    const ResetRule& rule;
    std::span<const double> table;
};

// Advances one grid step from x at t_n. Each crossing splits the step into
// segments; on_event(t, pre, post) fires once per crossing.
template <class OnEvent>
double run_step(std::size_t n, double x, const StepContext& c, std::vector<Segment>& segs,
                OnEvent&& on_event) {
    const double tau = c.model.tau;
    const double theta = c.model.theta;
    const double g = c.drive.gain;
    const double t_end = c.grid.time(n + 1);
    const double h = c.grid.step();
    double s = c.grid.time(n);
    bool on_grid = true;
    segs.clear();
    for (int guard = 0;; ++guard) {
        if (guard > kMaxEventsPerStep)
            throw EventOverflow("too many threshold crossings within one grid step");
        const double r = t_end - s;
        const double fm = on_grid && !c.table.empty() ? c.table[n] : c.drive.value(s + 0.5 * r);
        const double pred = advance_value(x, r, tau, g, fm);
        if (x < theta && pred >= theta) {
            double lo = 0.0;
            double hi = r;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (!(mid > lo && mid < hi)) break;
                const double v = advance_value(x, mid, tau, g, c.drive.value(s + 0.5 * mid));
                if (v >= theta)
                    hi = mid;
                else
                    lo = mid;
            }
            const double t_star = s + hi;
            if (t_star < c.grid.horizon()) {
                double detect = theta;
                double pre = theta;
                if (c.rule.hard) {
                    pre = advance_value(x, hi, tau, g, c.drive.value(s + 0.5 * hi));
                } else {
                    detect = advance_value(theta, h, tau, g, c.drive.value(t_star + 0.5 * h));
                    pre = detect;
                }
                const double post = c.rule.apply(detect, theta);
                segs.push_back({x, s, hi, on_grid, true, detect});
                on_event(t_star, pre, post);
                x = post;
                s = t_star;
                on_grid = false;
                continue;
            }
        }
        segs.push_back({x, s, r, on_grid, false, 0.0});
        return pred;
    }
}

void check_table(std::span<const double> table, const TimeGrid& grid) {
    if (!table.empty() && table.size() != grid.steps())
        throw std::invalid_argument("drive table does not match the grid");
}

}  // namespace

std::vector<double> tabulate_drive(const Drive& drive, const TimeGrid& grid) {
    const std::size_t n = grid.steps();
    std::vector<double> table(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t0 = grid.time(i);
        table[i] = drive.value(t0 + 0.5 * (grid.time(i + 1) - t0));
    }
    return table;
}

NeuronResult integrate_neuron(const NeuronModel& model, const Drive& drive,
                              const TimeGrid& grid, const ResetRule& rule,
                              bool record_states, std::span<const double> table) {
    check_table(table, grid);
    const StepContext ctx{model, drive, grid, rule, table};
    NeuronResult res;
    const std::size_t n_steps = grid.steps();
    if (record_states) {
        res.states.resize(n_steps + 1);
        res.states[0] = 0.0;
    }
    std::vector<Segment> segs;
    double x = 0.0;
    for (std::size_t n = 0; n < n_steps; ++n) {
        x = run_step(n, x, ctx, segs, [&](double t, double pre, double post) {
            res.spikes.push_back(t);
            res.resets.push_back({t, pre, post});
            res.spike_steps.push_back(n);
        });
        if (record_states) res.states[n + 1] = x;
    }
    res.final_value = x;
    return res;
}

NeuronAdjoint backprop_neuron(const NeuronModel& model, const Drive& drive,
                              const TimeGrid& grid, const ResetRule& rule,
                              const NeuronResult& forward, double final_adjoint,
                              std::span<const double> spike_adjoints,
                              std::span<const double> table) {
    check_table(table, grid);
    if (forward.states.size() != grid.steps() + 1)
        throw std::invalid_argument("backprop needs a forward run with recorded states");
    if (spike_adjoints.size() != forward.spikes.size())
        throw std::invalid_argument("one adjoint per emitted spike is required");

    NeuronAdjoint adj;
    if (drive.current) adj.centres.assign(drive.current->centres().size(), 0.0);

    const StepContext ctx{model, drive, grid, rule, table};
    const double theta = model.theta;
    const double h = grid.step();
    std::size_t k = forward.spikes.size();

    std::size_t start = grid.steps();
    if (final_adjoint == 0.0) {
        if (k == 0) return adj;
        start = forward.spike_steps.back() + 1;
    }

    std::vector<Segment> segs;
    double xbar = final_adjoint;
    for (std::size_t n = start; n-- > 0;) {
        const bool has_event = k > 0 && forward.spike_steps[k - 1] == n;
        if (xbar == 0.0 && !has_event) continue;
        run_step(n, forward.states[n], ctx, segs, [](double, double, double) {});

        double sbar = 0.0;
        for (std::size_t j = segs.size(); j-- > 0;) {
            const Segment& seg = segs[j];
            if (!seg.event) {
                const Partials p = advance_partials(seg.x, seg.s, seg.eta, model, drive);
                adj.gain += xbar * p.d_gain;
                accumulate_centres(xbar, seg.s, seg.eta, model, drive, adj.centres);
                sbar = seg.on_grid ? 0.0 : xbar * (p.d_s - p.d_eta);
                xbar *= p.d_x;
                continue;
            }
            if (k == 0) throw std::logic_error("backprop replay produced an extra crossing");
            --k;
            double tbar = sbar + spike_adjoints[k];
            const double t_star = seg.s + seg.eta;
            if (!rule.hard) {
                const double detect_bar = xbar * rule.slope(seg.detect, theta);
                if (detect_bar != 0.0) {
                    const Partials q = advance_partials(theta, t_star, h, model, drive);
                    tbar += detect_bar * q.d_s;
                    adj.gain += detect_bar * q.d_gain;
                    accumulate_centres(detect_bar, t_star, h, model, drive, adj.centres);
                }
            }
            // t* = s + eta*, with eta* the root of advance(x, s, eta) = theta.
            const Partials r = advance_partials(seg.x, seg.s, seg.eta, model, drive);
            const double c = -tbar / r.d_eta;
            xbar = c * r.d_x;
            adj.gain += c * r.d_gain;
            accumulate_centres(c, seg.s, seg.eta, model, drive, adj.centres);
            sbar = seg.on_grid ? 0.0 : tbar + c * r.d_s;
        }
    }
    return adj;
}

}  // namespace snn
