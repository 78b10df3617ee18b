#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "doctest.h"
#include "snn/data.hpp"

using namespace snn;

namespace {

// Smallest overlap of the two classes' projections over a fine set of
// directions. Positive everywhere means no separating line exists.
double min_projection_overlap(const Dataset& ds) {
    double worst = 1e300;
    const int dirs = 7200;
    for (int k = 0; k < dirs; ++k) {
        const double a = std::numbers::pi * 2.0 * k / dirs;
        const double c = std::cos(a), s = std::sin(a);
        double max0 = -1e300, min1 = 1e300;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const double p = c * ds.points[i][0] + s * ds.points[i][1];
            if (ds.labels[i] == 0) max0 = std::max(max0, p);
            else min1 = std::min(min1, p);
        }
        worst = std::min(worst, max0 - min1);
    }
    return worst;
}

Metrics from_counts(int tp, int fp, int fn, int tn) {
    std::vector<int> pred, act;
    auto add = [&](int n, int p, int a) {
        for (int i = 0; i < n; ++i) {
            pred.push_back(p);
            act.push_back(a);
        }
    };
    add(tp, 1, 1);
    add(fp, 1, 0);
    add(fn, 0, 1);
    add(tn, 0, 0);
    return compute_metrics(pred, act);
}

}  // namespace

TEST_CASE("moons without noise sit on the two arcs") {
    const Dataset ds = make_moons(200, 0.0, 7);
    REQUIRE(ds.size() == 200);
    int n0 = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& p = ds.points[i];
        if (ds.labels[i] == 0) {
            ++n0;
            CHECK(std::abs(std::hypot(p[0], p[1]) - 1.0) <= 1e-12);
            CHECK(p[1] >= 0.0);
        } else {
            CHECK(std::abs(std::hypot(p[0] - 1.0, p[1] - 0.5) - 1.0) <= 1e-12);
            CHECK(p[1] <= 0.5);
        }
    }
    CHECK(n0 == 100);
}

TEST_CASE("moons are not linearly separable") {
    const Dataset ds = make_moons(252, 0.0, 1);
    // The overlap moves by at most |p| * dangle between directions, well
    // below this margin.
    CHECK(min_projection_overlap(ds) > 0.05);
}

TEST_CASE("moons are deterministic and validate input") {
    const Dataset a = make_moons(101, 0.2, 42);
    const Dataset b = make_moons(101, 0.2, 42);
    CHECK(a.points == b.points);
    CHECK(a.labels == b.labels);
    const Dataset c = make_moons(101, 0.2, 43);
    CHECK(a.points != c.points);
    CHECK_THROWS_AS(make_moons(100, -0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_moons(1, 0.0, 0), std::invalid_argument);
}

TEST_CASE("split sizes, stratification and partition") {
    const Dataset ds = make_moons(100, 0.1, 3);
    const Splits s = split(ds, {0.70, 0.05, 0.25}, 11);
    CHECK(s.train.size() == 70);
    CHECK(s.val.size() == 5);
    CHECK(s.test.size() == 25);

    auto ones = [](const Dataset& d) {
        return static_cast<double>(std::count(d.labels.begin(), d.labels.end(), 1));
    };
    const double global = ones(ds) / ds.size();
    for (const Dataset* d : {&s.train, &s.val, &s.test})
        CHECK(std::abs(ones(*d) - global * d->size()) <= 1.0);

    std::multiset<std::pair<double, double>> all, parts;
    for (const auto& p : ds.points) all.insert({p[0], p[1]});
    for (const Dataset* d : {&s.train, &s.val, &s.test})
        for (const auto& p : d->points) parts.insert({p[0], p[1]});
    CHECK(all == parts);

    const Splits again = split(ds, {0.70, 0.05, 0.25}, 11);
    CHECK(again.test.points == s.test.points);

    const Splits big = split(make_moons(252, 0.0, 0), {0.70, 0.05, 0.25}, 0);
    CHECK(big.test.size() == 63);
}

TEST_CASE("split rejects empty parts and bad fractions") {
    CHECK_THROWS_AS(split(make_moons(8, 0.0, 0), {0.70, 0.05, 0.25}, 0), std::invalid_argument);
    CHECK_THROWS_AS(split(make_moons(100, 0.0, 0), {0.7, 0.2, 0.2}, 0), std::invalid_argument);
}

TEST_CASE("metrics") {
    const std::vector<int> y = {1, 0, 1, 1, 0, 0};
    Metrics m = compute_metrics(y, y);
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);

    std::vector<int> flip;
    for (int v : y) flip.push_back(1 - v);
    m = compute_metrics(flip, y);
    CHECK(m.accuracy == 0.0);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);

    m = from_counts(26, 2, 5, 30);
    CHECK(std::abs(m.accuracy - 0.8889) < 5e-5);
    CHECK(std::abs(m.precision - 0.9286) < 5e-5);
    CHECK(std::abs(m.recall - 0.8387) < 5e-5);
    CHECK(std::abs(m.f1 - 0.8814) < 5e-5);

    m = from_counts(24, 3, 7, 29);
    CHECK(std::abs(m.accuracy - 0.8413) < 5e-5);
    CHECK(std::abs(m.precision - 0.8889) < 5e-5);
    CHECK(std::abs(m.recall - 0.7742) < 5e-5);
    CHECK(std::abs(m.f1 - 0.8276) < 5e-5);

    CHECK_THROWS_AS(compute_metrics({1}, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics({}, {}), std::invalid_argument);
}

TEST_CASE("metrics do not depend on sample order") {
    std::vector<int> p = {1, 1, 0, 0, 1, 0, 1};
    std::vector<int> a = {1, 0, 0, 1, 1, 0, 0};
    const Metrics m1 = compute_metrics(p, a);
    std::reverse(p.begin(), p.end());
    std::reverse(a.begin(), a.end());
    const Metrics m2 = compute_metrics(p, a);
    CHECK(m1.accuracy == m2.accuracy);
    CHECK(m1.f1 == m2.f1);
}

TEST_CASE("dataset csv round trip") {
    const Dataset ds = make_moons(20, 0.2, 5);
    std::stringstream ss;
    write_dataset_csv(ss, ds);
    CHECK(ss.str().rfind("x1,x2,label\n", 0) == 0);
    const Dataset back = read_dataset_csv(ss);
    CHECK(back.points == ds.points);
    CHECK(back.labels == ds.labels);
}
