#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace snn {

struct Dataset {
    std::vector<std::array<double, 2>> points;
    std::vector<int> labels;
    double noise = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Two interleaving half-circles: class 0 at (cos phi, sin phi), class 1 at
/// (1 - cos phi, 0.5 - sin phi), phi ~ U[0, pi], plus isotropic Gaussian
/// noise. Class 0 gets n / 2 points (rounded down). Samples are shuffled.
Dataset make_moons(std::size_t n, double noise, std::uint64_t seed);

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Stratified split. Split sizes are round(f * n) for train and validation,
/// the rest goes to test. Throws std::invalid_argument if a split would be
/// empty or the fractions do not sum to one.
Splits split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed);

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Confusion counts;
};

Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual);

/// `x1,x2,label` with a header line.
void write_dataset_csv(std::ostream& os, const Dataset& ds);
Dataset read_dataset_csv(std::istream& is);

}  // namespace snn
