#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "snn/data.hpp"
#include "snn/train.hpp"
#include "snn/types.hpp"

namespace snn {

struct DatasetConfig {
    std::size_t n = 252;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

/// Everything a two-moons run depends on. grid_step <= 0 means the
/// structural default.
struct ExperimentConfig {
    StructuralParams structural = StructuralParams::moons_defaults();
    TrainConfig train;
    DatasetConfig dataset;
    std::string output_dir = "out";

    [[nodiscard]] double grid_step() const;
    void validate() const;
};

/// Bad configuration; `where` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, const std::string& what);
    std::string where;
};

/// Canonical form: every field, keys sorted.
nlohmann::json config_json(const ExperimentConfig& cfg);
/// Missing keys keep the defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a of the compact canonical dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& canonical);

struct ExperimentResult {
    Splits splits;
    TrainResult training;
    /// Sharpness of the last epoch, used for evaluation.
    double eval_zeta = 0.0;
    Metrics test;
};

/// Generates the data, trains, and scores the test split.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// epoch,zeta,loss,step,val_accuracy,val_precision,val_recall,val_f1
void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history);

nlohmann::json metrics_json(const Metrics& m);

}  // namespace snn
