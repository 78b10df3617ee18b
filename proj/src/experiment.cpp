#include "snn/experiment.hpp"

#include <cstdio>
#include <ostream>
#include <set>

#include "snn/io.hpp"

namespace snn {

using nlohmann::json;

double ExperimentConfig::grid_step() const {
    return train.grid_step > 0.0 ? train.grid_step : structural.default_grid_step();
}

void ExperimentConfig::validate() const {
    auto guard = [](const char* where, auto&& f) {
        try {
            f();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where, e.what());
        }
    };
    guard("structural", [&] { structural.validate(); });
    guard("optimizer.gamma", [&] { train.loss.validate(); });
    guard("mollifier", [&] {
        MollifierConfig m = train.mollifier;
        m.epochs = train.epochs;
        m.validate();
    });
    if (!(train.step > 0.0)) throw ConfigError("optimizer.step", "must be positive");
    if (!(train.step_growth >= 1.0)) throw ConfigError("optimizer.step_growth", "must be >= 1");
    if (train.max_halvings < 0) throw ConfigError("optimizer.max_halvings", "must be >= 0");
    if (structural.d != 2) throw ConfigError("structural.d", "two-moons data is 2-dimensional");
    if (!(dataset.noise >= 0.0)) throw ConfigError("dataset.noise", "must be >= 0");
    if (!(grid_step() > 0.0) || grid_step() > structural.T)
        throw ConfigError("grid_step", "must lie in (0, T]");
}

ConfigError::ConfigError(const std::string& w, const std::string& what)
    : std::runtime_error(w + ": " + what), where(w) {}

json config_json(const ExperimentConfig& cfg) {
    const TrainConfig& t = cfg.train;
    return {
        {"structural", structural_json(cfg.structural)},
        {"init_seed", t.init_seed},
        {"optimizer",
         {{"step", t.step},
          {"epochs", t.epochs},
          {"gamma", t.loss.gamma},
          {"max_halvings", t.max_halvings},
          {"step_growth", t.step_growth}}},
        {"mollifier", {{"zeta0", t.mollifier.zeta0}, {"zeta1", t.mollifier.zeta1}}},
        {"dataset", {{"n", cfg.dataset.n}, {"noise", cfg.dataset.noise}, {"seed", cfg.dataset.seed}}},
        {"grid_step", cfg.grid_step()},
        {"output_dir", cfg.output_dir},
    };
}

namespace {

void only_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
    if (!j.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
}

template <class T>
void take(const json& j, const char* key, const std::string& where, T& field) {
    if (!j.contains(key)) return;
    try {
        j.at(key).get_to(field);
    } catch (const json::exception& e) {
        throw ConfigError(where.empty() ? key : where + "." + key, e.what());
    }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    only_keys(j, "", {"structural", "init_seed", "optimizer", "mollifier", "dataset", "grid_step",
                      "output_dir"});
    if (j.contains("structural")) {
        only_keys(j.at("structural"), "structural",
                  {"tau_v", "theta_v", "tau_hidden", "theta_hidden", "tau_u", "theta_u", "mu", "T",
                   "L", "P", "d"});
        try {
            structural_from_json(j.at("structural"), cfg.structural);
        } catch (const json::exception& e) {
            throw ConfigError("structural", e.what());
        }
    }
    take(j, "init_seed", "", cfg.train.init_seed);
    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        only_keys(o, "optimizer", {"step", "epochs", "gamma", "max_halvings", "step_growth"});
        take(o, "step", "optimizer", cfg.train.step);
        take(o, "epochs", "optimizer", cfg.train.epochs);
        take(o, "gamma", "optimizer", cfg.train.loss.gamma);
        take(o, "max_halvings", "optimizer", cfg.train.max_halvings);
        take(o, "step_growth", "optimizer", cfg.train.step_growth);
    }
    if (j.contains("mollifier")) {
        const json& m = j.at("mollifier");
        only_keys(m, "mollifier", {"zeta0", "zeta1"});
        take(m, "zeta0", "mollifier", cfg.train.mollifier.zeta0);
        take(m, "zeta1", "mollifier", cfg.train.mollifier.zeta1);
    }
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        only_keys(d, "dataset", {"n", "noise", "seed"});
        take(d, "n", "dataset", cfg.dataset.n);
        take(d, "noise", "dataset", cfg.dataset.noise);
        take(d, "seed", "dataset", cfg.dataset.seed);
    }
    cfg.train.grid_step = 0.0;
    if (j.contains("grid_step") && !j.at("grid_step").is_null())
        take(j, "grid_step", "", cfg.train.grid_step);
    take(j, "output_dir", "", cfg.output_dir);
    cfg.validate();
    return cfg;
}

std::string config_hash(const json& canonical) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult r;
    const Dataset ds = make_moons(cfg.dataset.n, cfg.dataset.noise, cfg.dataset.seed);
    r.splits = split(ds, {0.70, 0.05, 0.25}, cfg.dataset.seed);
    TrainConfig tc = cfg.train;
    tc.grid_step = cfg.grid_step();
    r.training = train(tc, cfg.structural, to_samples(r.splits.train), to_samples(r.splits.val));
    MollifierConfig m = tc.mollifier;
    m.epochs = tc.epochs;
    r.eval_zeta = zeta_at(tc.epochs - 1, m);
    const std::vector<Sample> test = to_samples(r.splits.test);
    r.test = compute_metrics(
        predict(test, r.training.params, cfg.structural, r.eval_zeta, tc.grid_step),
        r.splits.test.labels);
    return r;
}

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
    os << "epoch,zeta,loss,step,val_accuracy,val_precision,val_recall,val_f1\n";
    for (const EpochRecord& e : history) {
        os << e.epoch << ',' << format_double(e.zeta) << ',' << format_double(e.loss) << ','
           << format_double(e.step) << ',' << format_double(e.val.accuracy) << ','
           << format_double(e.val.precision) << ',' << format_double(e.val.recall) << ','
           << format_double(e.val.f1) << '\n';
    }
}

json metrics_json(const Metrics& m) {
    return {{"accuracy", m.accuracy},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"confusion", {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"fn", m.counts.fn},
                           {"tn", m.counts.tn}}}};
}

}  // namespace snn
