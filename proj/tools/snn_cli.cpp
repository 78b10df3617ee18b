// Command-line entry point: simulate, verify-props, construct-ua, train, eval.
// Exit codes: 0 ok, 1 property or acceptance failure, 2 usage or parse error,
// 3 numeric divergence.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "snn/experiment.hpp"
#include "snn/io.hpp"
#include "snn/lif.hpp"
#include "snn/props.hpp"
#include "snn/train.hpp"
#include "snn/ua.hpp"

#ifndef SNN_VERSION
#define SNN_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace snn;

namespace {

constexpr int kOk = 0;
constexpr int kPropertyFailure = 1;
constexpr int kUsage = 2;
constexpr int kDiverged = 3;

/// Bad input of any kind; mapped to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    double grid_step = 0.0;
    bool print_config = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "experiment config JSON, or a run manifest");
    sub->add_option("--seed", c.seed, "seed for every random choice of this command");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--grid-step", c.grid_step, "integration step (default: from the config)");
    sub->add_flag("--print-config", c.print_config, "print the resolved config and exit");
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

/// A manifest carries the config and the command arguments of its run.
struct Loaded {
    ExperimentConfig cfg;
    json args = json::object();
};

Loaded load(const Common& c, CLI::App* sub) {
    Loaded l;
    if (!c.config_path.empty()) {
        json j = read_json_file(c.config_path);
        if (j.contains("manifest_version")) {
            l.args = j.value("args", json::object());
            j = j.at("config");
        }
        try {
            l.cfg = config_from_json(j);
        } catch (const ConfigError& e) {
            throw UsageError(c.config_path + ": " + e.what());
        }
    }
    if (sub->count("--seed")) {
        l.cfg.dataset.seed = c.seed;
        l.cfg.train.init_seed = c.seed;
        l.args["seed"] = c.seed;
    }
    if (sub->count("--grid-step")) l.cfg.train.grid_step = c.grid_step;
    if (sub->count("--out")) l.cfg.output_dir = c.out;
    try {
        l.cfg.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return l;
}

/// Command-line value if given, else the manifest's, else the default.
template <class T>
void resolve(CLI::App* sub, const char* flag, const json& args, const char* key, T& value) {
    if (!sub->count(flag) && args.contains(key)) args.at(key).get_to(value);
}

/// The config minus where the files go; two runs that differ only in
/// --out share a hash and write identical config.json files.
json result_config(const ExperimentConfig& cfg) {
    json j = config_json(cfg);
    j.erase("output_dir");
    return j;
}

class Run {
public:
    Run(std::string command, const ExperimentConfig& cfg) : command_(std::move(command)), cfg_(cfg) {
        dir_ = cfg.output_dir;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw UsageError("cannot create " + dir_.string() + ": " + ec.message());
    }

    template <class F>
    auto stage(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            times_[name] = seconds_since(t0);
        } else {
            auto r = f();
            times_[name] = seconds_since(t0);
            return r;
        }
    }

    void write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw UsageError("cannot write " + p.string());
        artifacts_.push_back(p.string());
    }
    void write(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    json& args() { return args_; }

    void manifest() {
        const json m = {{"manifest_version", 1},
                        {"tool_version", SNN_VERSION},
                        {"command", command_},
                        {"config", config_json(cfg_)},
                        {"config_hash", config_hash(result_config(cfg_))},
                        {"seeds", {{"dataset", cfg_.dataset.seed}, {"init", cfg_.train.init_seed}}},
                        {"args", args_},
                        {"wall_seconds", times_},
                        {"artifacts", artifacts_}};
        std::ofstream out(dir_ / "manifest.json");
        out << m.dump(2) << "\n";
    }

private:
    static double seconds_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    std::string command_;
    ExperimentConfig cfg_;
    fs::path dir_;
    json times_ = json::object();
    json args_ = json::object();
    std::vector<std::string> artifacts_;
};

std::string csv_of(const Trajectory& tr) {
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    return os.str();
}

std::string csv_of(const SpikeTrain& s) {
    std::ostringstream os;
    write_spikes_csv(os, s);
    return os.str();
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("not a number in --x: '" + item + "'");
        }
    }
    return v;
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
    std::string params;
    std::string x;
    double zeta = 0.0;
};

int cmd_simulate(CLI::App* sub, const Common& c, SimulateArgs a) {
    Loaded l = load(c, sub);
    resolve(sub, "--params", l.args, "params", a.params);
    resolve(sub, "--x", l.args, "x", a.x);
    resolve(sub, "--zeta", l.args, "zeta", a.zeta);
    if (c.print_config) {
        std::cout << config_json(l.cfg).dump(2) << "\n";
        return kOk;
    }
    if (a.params.empty()) throw UsageError("--params is required");
    const StructuralParams& sp = l.cfg.structural;
    TrainableParams tp;
    try {
        tp = params_from_json(read_json_file(a.params));
        tp.validate_against(sp);
    } catch (const json::exception& e) {
        throw UsageError(a.params + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(a.params + ": " + e.what());
    }
    std::vector<double> x;
    if (a.x.empty()) {
        std::mt19937_64 rng(l.cfg.dataset.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < sp.d; ++i) x.push_back(u(rng));
    } else {
        x = parse_vector(a.x);
    }
    if (static_cast<int>(x.size()) != sp.d)
        throw UsageError("x has " + std::to_string(x.size()) + " entries, d is " +
                         std::to_string(sp.d));

    Run run("simulate", l.cfg);
    run.args() = {{"params", a.params}, {"x", a.x}, {"zeta", a.zeta}};
    const ResetRule rule = a.zeta > 0.0 ? ResetRule::discharge(a.zeta) : ResetRule::hard_reset();
    const double h = l.cfg.grid_step();
    const NetworkRun net = run.stage("forward", [&] { return run_network(x, tp, sp, h, rule, true); });

    run.stage("write", [&] {
        auto emit = [&](const std::string& stem, const NeuronResult& r, NeuronId id) {
            const Trajectory tr = to_trajectory(r, net.grid);
            SpikeTrain s;
            s.times = r.spikes;
            s.neuron = id;
            run.write(stem + ".csv", csv_of(tr));
            run.write(stem + ".json", trajectory_json(tr, s));
            run.write(stem + "_spikes.csv", csv_of(s));
        };
        emit("input", net.input, NeuronId{0, 0});
        for (std::size_t li = 0; li < net.hidden.size(); ++li)
            for (std::size_t p = 0; p < net.hidden[li].size(); ++p)
                emit("hidden_" + std::to_string(li + 1) + "_" + std::to_string(p), net.hidden[li][p],
                     NeuronId{static_cast<int>(li + 1), static_cast<int>(p)});
        for (std::size_t p = 0; p < net.output.size(); ++p)
            emit("output_" + std::to_string(p), net.output[p],
                 NeuronId{sp.L + 1, static_cast<int>(p)});
        run.write("output.json", json{{"x", x},
                                      {"u_final", net.out.u_final},
                                      {"readout", net.out.readout},
                                      {"reset", a.zeta > 0.0 ? "discharge" : "hard"},
                                      {"zeta", a.zeta}});
    });
    run.manifest();
    std::cout << "readout " << format_double(net.out.readout) << ", input spikes "
              << net.input.spikes.size() << "\n";
    return kOk;
}

// verify-props ---------------------------------------------------------------

int cmd_verify(CLI::App* sub, const Common& c, int trials) {
    Loaded l = load(c, sub);
    resolve(sub, "--trials", l.args, "trials", trials);
    std::uint64_t seed = c.seed;
    resolve(sub, "--seed", l.args, "seed", seed);
    if (c.print_config) {
        std::cout << config_json(l.cfg).dump(2) << "\n";
        return kOk;
    }
    if (trials < 1) throw UsageError("--trials must be >= 1");

    Run run("verify-props", l.cfg);
    run.args() = {{"trials", trials}, {"seed", seed}};
    std::vector<SuiteResult> suites;
    run.stage("three-bump", [&] { suites.push_back(three_bump_suite()); });
    run.stage("input", [&] { suites.push_back(input_exactness_suite(trials, seed)); });
    run.stage("counts", [&] {
        suites.push_back(separated_suite(false, trials, seed + 1));
        suites.push_back(separated_suite(true, trials, seed + 2));
        suites.push_back(overlap_suite(trials, seed + 3));
    });
    run.stage("mollified", [&] {
        suites.push_back(convergence_suite(std::min(trials, 50), seed + 4, {3, 10, 30, 100, 300}));
    });
    run.stage("ua", [&] {
        suites.push_back(encoding_suite(trials, seed + 5));
        suites.push_back(mu_sweep({0.4, 0.2, 0.1, 0.05}));
    });

    json report = {{"suites", json::array()}};
    bool all = true;
    std::cout << "suite                     passed / trials\n";
    for (const SuiteResult& s : suites) {
        report["suites"].push_back(s.to_json());
        all = all && s.ok();
        char line[96];
        std::snprintf(line, sizeof line, "%-25s %6d / %-6d %s\n", s.name.c_str(), s.passed,
                      s.trials, s.ok() ? "pass" : "FAIL");
        std::cout << line;
    }
    report["all_pass"] = all;
    run.write("report.json", report);
    run.manifest();
    return all ? kOk : kPropertyFailure;
}

// construct-ua ---------------------------------------------------------------

struct UAArgs {
    std::string target = "sine-product";
    double epsilon = 0.1;
    int width = 16;
    int points = 25;
    int K = 1;
    double w = 1.0;
    int iterations = 5000;
};

double builtin_target(const std::string& name, double a, double b) {
    if (name == "constant") return 0.5;
    if (name == "linear") return 0.5 * a - 0.3 * b;
    if (name == "sine-product") return std::sin(M_PI * a) * std::cos(M_PI * b);
    throw UsageError("unknown target '" + name + "' (constant, linear, sine-product)");
}

int cmd_construct(CLI::App* sub, const Common& c, UAArgs a) {
    Loaded l = load(c, sub);
    resolve(sub, "--target", l.args, "target", a.target);
    resolve(sub, "--epsilon", l.args, "epsilon", a.epsilon);
    resolve(sub, "--width", l.args, "width", a.width);
    resolve(sub, "--points", l.args, "points", a.points);
    resolve(sub, "--K", l.args, "K", a.K);
    resolve(sub, "--w", l.args, "w", a.w);
    resolve(sub, "--iterations", l.args, "iterations", a.iterations);
    std::uint64_t seed = c.seed;
    resolve(sub, "--seed", l.args, "seed", seed);
    if (c.print_config) {
        std::cout << config_json(l.cfg).dump(2) << "\n";
        return kOk;
    }
    builtin_target(a.target, 0.0, 0.0);
    if (!(a.epsilon > 0.0) || a.width < 1 || a.points < 1 || a.K < 1 || a.w <= 0.0)
        throw UsageError("epsilon, width, points, K and w must be positive");

    Run run("construct-ua", l.cfg);
    run.args() = {{"target", a.target}, {"epsilon", a.epsilon}, {"width", a.width},
                  {"points", a.points}, {"K", a.K},           {"w", a.w},
                  {"iterations", a.iterations}, {"seed", seed}};

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<FitSample> samples;
    for (int i = 0; i < 2000; ++i) {
        const double x1 = u(rng), x2 = u(rng);
        samples.push_back({{x1, x2}, builtin_target(a.target, x1, x2)});
    }
    std::vector<std::vector<double>> xs;
    for (int i = 0; i < a.points; ++i) xs.push_back({u(rng), u(rng)});

    FitOptions fo;
    fo.iterations = a.iterations;
    fo.seed = seed;
    const ShallowTarget f = run.stage("fit", [&] { return fit_shallow(samples, a.width, fo); });

    // The output threshold must exceed every -<alpha_p, x> so that the
    // target charge is positive; raise it when the fit needs more.
    StructuralParams sp = l.cfg.structural;
    sp.P = a.width;
    double lowest = 0.0;
    for (const auto& x : xs)
        for (const auto& al : f.alpha) lowest = std::min(lowest, al[0] * x[0] + al[1] * x[1]);
    sp.theta_u = std::max(sp.theta_u, -lowest + 0.05);
    // Smallest K (doubling) that fits the largest target charge.
    double top = 0.0;
    for (const auto& x : xs)
        for (const auto& al : f.alpha)
            top = std::max(top, sp.tau_u / a.w * (sp.theta_u + al[0] * x[0] + al[1] * x[1]));
    int K = a.K;
    while (K < top) K *= 2;
    sp.mu = std::min(sp.mu, mu_budget(a.epsilon, K, a.w, f.nu, sp.tau_u, kSigmoidLipschitz));
    const double h = std::min(l.cfg.grid_step(), sp.mu / 10.0);

    json pts = json::array();
    bool pass = f.rms <= a.epsilon / 2.0;
    double max_gap = 0.0, bound = 0.0, max_total = 0.0;
    run.stage("encode", [&] {
        for (const auto& x : xs) {
            const UAEncoding enc = encode(f, x, K, a.w, sp);
            json p = {{"x", x}, {"f", builtin_target(a.target, x[0], x[1])}, {"feasible", enc.feasible}};
            if (!enc.feasible) {
                pass = false;
                pts.push_back(p);
                continue;
            }
            const EncodingReport r = verify_encoding(enc, f, x, sp, a.w, h);
            p.update({{"f_P", r.f_p},
                      {"delta_readout", r.delta_readout},
                      {"gaussian_readout", r.gaussian_readout},
                      {"exact_error", r.exact_error},
                      {"gap", r.gap},
                      {"total_error", std::abs(r.gaussian_readout - p["f"].get<double>())}});
            pass = pass && r.exact_ok && r.bound_ok;
            max_gap = std::max(max_gap, r.gap);
            max_total = std::max(max_total, p["total_error"].get<double>());
            bound = r.bound;
            pts.push_back(p);
        }
    });
    const json report = {{"target", a.target},     {"epsilon", a.epsilon}, {"width", a.width},
                         {"fit_rms", f.rms},        {"K", K},               {"w", a.w},
                         {"mu", sp.mu},             {"theta_u", sp.theta_u}, {"grid_step", h},
                         {"bound", bound},          {"max_gap", max_gap},   {"max_total_error", max_total},
                         {"points", pts},           {"pass", pass}};
    run.write("ua.json", report);
    run.manifest();
    std::cout << "fit_rms " << f.rms << ", max gap " << max_gap << ", bound " << bound
              << (pass ? ", pass\n" : ", FAIL\n");
    return pass ? kOk : kPropertyFailure;
}

// train / eval ---------------------------------------------------------------

int cmd_train(CLI::App* sub, const Common& c) {
    Loaded l = load(c, sub);
    if (c.print_config) {
        std::cout << config_json(l.cfg).dump(2) << "\n";
        return kOk;
    }
    Run run("train", l.cfg);
    run.args() = l.args;
    const ExperimentResult r = run.stage("train", [&] { return run_experiment(l.cfg); });
    std::ostringstream hist;
    write_history_csv(hist, r.training.history);
    run.write("history.csv", hist.str());
    run.write("params.json", params_json(r.training.params));
    run.write("metrics.json", json{{"split", "test"},
                                   {"size", r.splits.test.size()},
                                   {"zeta", r.eval_zeta},
                                   {"metrics", metrics_json(r.test)},
                                   {"diverged", r.training.diverged},
                                   {"message", r.training.message}});
    run.write("config.json", result_config(l.cfg));
    run.manifest();
    const Metrics& m = r.test;
    std::cout << "test accuracy " << m.accuracy << " precision " << m.precision << " recall "
              << m.recall << " f1 " << m.f1 << "\n";
    if (r.training.diverged) {
        std::cerr << "training diverged: " << r.training.message << "\n";
        return kDiverged;
    }
    return kOk;
}

int cmd_eval(CLI::App* sub, const Common& c, std::string params_path) {
    Loaded l = load(c, sub);
    resolve(sub, "--params", l.args, "params", params_path);
    if (c.print_config) {
        std::cout << config_json(l.cfg).dump(2) << "\n";
        return kOk;
    }
    if (params_path.empty()) throw UsageError("--params is required");
    TrainableParams tp;
    try {
        tp = params_from_json(read_json_file(params_path));
        tp.validate_against(l.cfg.structural);
    } catch (const json::exception& e) {
        throw UsageError(params_path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(params_path + ": " + e.what());
    }
    Run run("eval", l.cfg);
    run.args() = {{"params", params_path}};
    const Dataset ds = make_moons(l.cfg.dataset.n, l.cfg.dataset.noise, l.cfg.dataset.seed);
    const Splits s = split(ds, {0.70, 0.05, 0.25}, l.cfg.dataset.seed);
    MollifierConfig mc = l.cfg.train.mollifier;
    mc.epochs = l.cfg.train.epochs;
    const double zeta = zeta_at(mc.epochs - 1, mc);
    const Metrics m = run.stage("eval", [&] {
        return compute_metrics(predict(to_samples(s.test), tp, l.cfg.structural, zeta,
                                       l.cfg.grid_step()),
                               s.test.labels);
    });
    run.write("metrics.json", json{{"split", "test"},
                                   {"size", s.test.size()},
                                   {"zeta", zeta},
                                   {"metrics", metrics_json(m)}});
    run.manifest();
    std::cout << "test accuracy " << m.accuracy << " precision " << m.precision << " recall "
              << m.recall << " f1 " << m.f1 << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spiking network simulation, property checks, UA construction and training"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SNN_VERSION);

    Common common;
    SimulateArgs sim;
    int trials = 200;
    UAArgs ua;
    std::string eval_params;

    auto* s_sim = app.add_subcommand("simulate", "forward pass for one input, trajectories to files");
    add_common(s_sim, common);
    s_sim->add_option("--params", sim.params, "trainable parameters JSON");
    s_sim->add_option("--x", sim.x, "input vector, comma separated (default: random from --seed)");
    s_sim->add_option("--zeta", sim.zeta, "discharge sharpness; 0 means hard reset");

    auto* s_ver = app.add_subcommand("verify-props", "randomized property sweeps");
    add_common(s_ver, common);
    s_ver->add_option("--trials", trials, "instances per suite");

    auto* s_ua = app.add_subcommand("construct-ua", "fit, encode and check a target function");
    add_common(s_ua, common);
    s_ua->add_option("--target", ua.target, "constant, linear or sine-product");
    s_ua->add_option("--epsilon", ua.epsilon, "accuracy goal");
    s_ua->add_option("--width", ua.width, "shallow network width P");
    s_ua->add_option("--points", ua.points, "evaluation points");
    s_ua->add_option("--K", ua.K, "smallest spikes per designed train");
    s_ua->add_option("--w", ua.w, "output gain");
    s_ua->add_option("--iterations", ua.iterations, "gradient-descent iterations of the fit");

    auto* s_train = app.add_subcommand("train", "two-moons training and test metrics");
    add_common(s_train, common);

    auto* s_eval = app.add_subcommand("eval", "test metrics for given parameters");
    add_common(s_eval, common);
    s_eval->add_option("--params", eval_params, "trainable parameters JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*s_sim) return cmd_simulate(s_sim, common, sim);
        if (*s_ver) return cmd_verify(s_ver, common, trials);
        if (*s_ua) return cmd_construct(s_ua, common, ua);
        if (*s_train) return cmd_train(s_train, common);
        if (*s_eval) return cmd_eval(s_eval, common, eval_params);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kDiverged;
    } catch (const FitFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kDiverged;
    } catch (const EventOverflow& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kDiverged;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
