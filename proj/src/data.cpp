#include "snn/data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "snn/io.hpp"

namespace snn {

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.noise = noise;
    out.seed = seed;
    for (std::size_t i : indices) {
        out.points.push_back(points.at(i));
        out.labels.push_back(labels.at(i));
    }
    return out;
}

Dataset make_moons(std::size_t n, double noise, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("make_moons needs n >= 2");
    if (!(noise >= 0.0) || !std::isfinite(noise))
        throw std::invalid_argument("noise must be a finite non-negative stddev");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> jitter(0.0, 1.0);

    Dataset ds;
    ds.noise = noise;
    ds.seed = seed;
    const std::size_t n0 = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = angle(rng);
        if (i < n0) {
            ds.points.push_back({std::cos(phi), std::sin(phi)});
            ds.labels.push_back(0);
        } else {
            ds.points.push_back({1.0 - std::cos(phi), 0.5 - std::sin(phi)});
            ds.labels.push_back(1);
        }
    }
    if (noise > 0.0) {
        for (auto& p : ds.points) {
            p[0] += noise * jitter(rng);
            p[1] += noise * jitter(rng);
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    return ds.subset(order);
}

Splits split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed) {
    for (double f : fractions)
        if (!(f >= 0.0)) throw std::invalid_argument("split fractions must be non-negative");
    if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9)
        throw std::invalid_argument("split fractions must sum to 1");
    const std::size_t n = ds.size();
    const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
    const auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * n));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
        throw std::invalid_argument("split leaves an empty part for n = " + std::to_string(n));

    // Shuffle within each class, then interleave the classes by relative
    // rank so that every contiguous chunk is stratified.
    std::mt19937_64 rng(seed);
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class.at(ds.labels[i] == 1 ? 1 : 0).push_back(i);
    struct Keyed {
        double key;
        int cls;
        std::size_t index;
    };
    std::vector<Keyed> order;
    for (int c = 0; c < 2; ++c) {
        auto& members = by_class[c];
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t r = 0; r < members.size(); ++r)
            order.push_back({(r + 0.5) / static_cast<double>(members.size()), c, members[r]});
    }
    std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
        return a.key != b.key ? a.key < b.key : a.cls < b.cls;
    });

    std::vector<std::size_t> tr, va, te;
    for (std::size_t k = 0; k < n; ++k) {
        auto& dst = k < n_train ? tr : (k < n_train + n_val ? va : te);
        dst.push_back(order[k].index);
    }
    return {ds.subset(tr), ds.subset(va), ds.subset(te)};
}

Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.size() != actual.size())
        throw std::invalid_argument("predicted and actual differ in length");
    if (actual.empty()) throw std::invalid_argument("metrics need at least one sample");
    Metrics m;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const bool p = predicted[i] == 1;
        const bool a = actual[i] == 1;
        if (p && a) ++m.counts.tp;
        else if (p && !a) ++m.counts.fp;
        else if (!p && a) ++m.counts.fn;
        else ++m.counts.tn;
    }
    const auto& c = m.counts;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(actual.size());
    m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
    os << "x1,x2,label\n";
    for (std::size_t i = 0; i < ds.size(); ++i)
        os << format_double(ds.points[i][0]) << ',' << format_double(ds.points[i][1]) << ','
           << ds.labels[i] << '\n';
}

Dataset read_dataset_csv(std::istream& is) {
    Dataset ds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || (lineno == 1 && line.rfind("x1", 0) == 0)) continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
            throw std::runtime_error("dataset CSV line " + std::to_string(lineno) + ": expected 3 fields");
        try {
            ds.points.push_back({std::stod(a), std::stod(b)});
            ds.labels.push_back(std::stoi(c));
        } catch (const std::exception&) {
            throw std::runtime_error("dataset CSV line " + std::to_string(lineno) + ": bad number");
        }
    }
    return ds;
}

}  // namespace snn
