#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "snn/types.hpp"

namespace snn {

/// 17 significant digits, enough for a bit-exact round trip.
std::string format_double(double v);

/// `t,value` rows with a header.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
Trajectory read_trajectory_csv(std::istream& is);

/// One spike time per line, no header.
void write_spikes_csv(std::ostream& os, const SpikeTrain& spikes);
SpikeTrain read_spikes_csv(std::istream& is);

/// {grid, values, resets: [{time, pre, post}], spikes}
nlohmann::json trajectory_json(const Trajectory& tr, const SpikeTrain& spikes);
void from_trajectory_json(const nlohmann::json& j, Trajectory& tr, SpikeTrain& spikes);

nlohmann::json params_json(const TrainableParams& tp);
TrainableParams params_from_json(const nlohmann::json& j);

nlohmann::json structural_json(const StructuralParams& sp);
/// Missing keys keep the values already in `sp`.
void structural_from_json(const nlohmann::json& j, StructuralParams& sp);

}  // namespace snn
