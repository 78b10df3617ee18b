#include "snn/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace snn {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

double parse_double(const std::string& s, std::size_t lineno) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() && s.find_first_not_of(" \r\t", used) != std::string::npos)
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": not a number: '" + s + "'");
    }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    os << "t,value\n";
    for (std::size_t i = 0; i < tr.grid.size(); ++i)
        os << format_double(tr.grid[i]) << ',' << format_double(tr.values.at(i)) << '\n';
}

Trajectory read_trajectory_csv(std::istream& is) {
    Trajectory tr;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || (lineno == 1 && line.rfind("t,", 0) == 0)) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("line " + std::to_string(lineno) + ": expected t,value");
        tr.grid.push_back(parse_double(line.substr(0, comma), lineno));
        tr.values.push_back(parse_double(line.substr(comma + 1), lineno));
    }
    return tr;
}

void write_spikes_csv(std::ostream& os, const SpikeTrain& spikes) {
    for (double t : spikes.times) os << format_double(t) << '\n';
}

SpikeTrain read_spikes_csv(std::istream& is) {
    SpikeTrain s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty()) s.times.push_back(parse_double(line, lineno));
    }
    return s;
}

json trajectory_json(const Trajectory& tr, const SpikeTrain& spikes) {
    json resets = json::array();
    for (const ResetEvent& r : tr.resets)
        resets.push_back({{"time", r.time}, {"pre", r.pre}, {"post", r.post}});
    return {{"grid", tr.grid},
            {"values", tr.values},
            {"resets", resets},
            {"spikes", spikes.times},
            {"neuron", {spikes.neuron.layer, spikes.neuron.index}}};
}

void from_trajectory_json(const json& j, Trajectory& tr, SpikeTrain& spikes) {
    tr.grid = j.at("grid").get<std::vector<double>>();
    tr.values = j.at("values").get<std::vector<double>>();
    tr.resets.clear();
    for (const auto& r : j.at("resets"))
        tr.resets.push_back({r.at("time").get<double>(), r.at("pre").get<double>(),
                             r.at("post").get<double>()});
    spikes.times = j.at("spikes").get<std::vector<double>>();
    if (j.contains("neuron")) {
        spikes.neuron.layer = j["neuron"].at(0).get<int>();
        spikes.neuron.index = j["neuron"].at(1).get<int>();
    }
}

json params_json(const TrainableParams& tp) {
    return {{"a", tp.a}, {"omega", tp.omega}, {"w", tp.w}, {"nu", tp.nu}};
}

TrainableParams params_from_json(const json& j) {
    TrainableParams tp;
    tp.a = j.at("a").get<std::vector<double>>();
    tp.omega = j.at("omega").get<std::vector<std::vector<double>>>();
    tp.w = j.at("w").get<double>();
    tp.nu = j.at("nu").get<std::vector<double>>();
    return tp;
}

json structural_json(const StructuralParams& sp) {
    return {{"tau_v", sp.tau_v},           {"theta_v", sp.theta_v}, {"tau_hidden", sp.tau_hidden},
            {"theta_hidden", sp.theta_hidden}, {"tau_u", sp.tau_u},     {"theta_u", sp.theta_u},
            {"mu", sp.mu},                 {"T", sp.T},             {"L", sp.L},
            {"P", sp.P},                   {"d", sp.d}};
}

void structural_from_json(const json& j, StructuralParams& sp) {
    auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    take("tau_v", sp.tau_v);
    take("theta_v", sp.theta_v);
    take("tau_u", sp.tau_u);
    take("theta_u", sp.theta_u);
    take("mu", sp.mu);
    take("T", sp.T);
    take("d", sp.d);
    const int old_L = sp.L;
    const int old_P = sp.P;
    take("L", sp.L);
    take("P", sp.P);
    // A scalar hidden constant applies to every hidden neuron.
    auto hidden = [&](const char* key, std::vector<std::vector<double>>& field) {
        if (j.contains(key) && j.at(key).is_number()) {
            field.assign(sp.L, std::vector<double>(sp.P, j.at(key).get<double>()));
        } else if (j.contains(key)) {
            j.at(key).get_to(field);
        } else if ((sp.L != old_L || sp.P != old_P) && !field.empty() && !field[0].empty()) {
            field.assign(sp.L, std::vector<double>(sp.P, field[0][0]));
        }
    };
    hidden("tau_hidden", sp.tau_hidden);
    hidden("theta_hidden", sp.theta_hidden);
}

}  // namespace snn
