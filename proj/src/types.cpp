#include "snn/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snn {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

StructuralParams StructuralParams::uniform(int d, int L, int P, double tau_v, double theta_v,
                                           double tau_hidden, double theta_hidden, double tau_u,
                                           double theta_u, double mu, double T) {
    StructuralParams sp;
    sp.d = d;
    sp.L = L;
    sp.P = P;
    sp.tau_v = tau_v;
    sp.theta_v = theta_v;
    sp.tau_u = tau_u;
    sp.theta_u = theta_u;
    sp.mu = mu;
    sp.T = T;
    const auto rows = static_cast<std::size_t>(std::max(L, 0));
    const auto cols = static_cast<std::size_t>(std::max(P, 0));
    sp.tau_hidden.assign(rows, std::vector<double>(cols, tau_hidden));
    sp.theta_hidden.assign(rows, std::vector<double>(cols, theta_hidden));
    return sp;
}

StructuralParams StructuralParams::moons_defaults() {
    return uniform(2, 1, 8, 8.0, 0.8, 6.0, 0.25, 10.0, 0.3, 0.2, 60.0);
}

void StructuralParams::validate() const {
    require(L >= 1, "L must be >= 1");
    require(P >= 1, "P must be >= 1");
    require(d >= 1, "d must be >= 1");
    require(positive_finite(tau_v), "tau_v must be positive");
    require(positive_finite(theta_v), "theta_v must be positive");
    require(positive_finite(tau_u), "tau_u must be positive");
    require(positive_finite(theta_u), "theta_u must be positive");
    require(positive_finite(mu), "mu must be positive");
    require(positive_finite(T), "T must be positive");
    require(tau_hidden.size() == static_cast<std::size_t>(L) &&
                theta_hidden.size() == static_cast<std::size_t>(L),
            "hidden constants must have L rows");
    for (int l = 0; l < L; ++l) {
        require(tau_hidden[l].size() == static_cast<std::size_t>(P) &&
                    theta_hidden[l].size() == static_cast<std::size_t>(P),
                "hidden constants must have P columns");
        for (int p = 0; p < P; ++p) {
            require(positive_finite(tau_hidden[l][p]), "hidden tau must be positive");
            require(positive_finite(theta_hidden[l][p]), "hidden theta must be positive");
        }
    }
}

double StructuralParams::min_tau() const {
    double m = std::min(tau_v, tau_u);
    for (const auto& row : tau_hidden)
        for (double t : row) m = std::min(m, t);
    return m;
}

double StructuralParams::default_grid_step() const {
    return std::min({mu / 10.0, min_tau() / 20.0, T / 10000.0});
}

TrainableParams TrainableParams::zeros(const StructuralParams& sp) {
    TrainableParams tp;
    tp.a.assign(static_cast<std::size_t>(sp.d), 0.0);
    tp.omega.assign(static_cast<std::size_t>(sp.L),
                    std::vector<double>(static_cast<std::size_t>(sp.P), 0.0));
    tp.nu.assign(static_cast<std::size_t>(sp.P), 0.0);
    return tp;
}

std::size_t TrainableParams::size() const {
    std::size_t n = a.size() + 1 + nu.size();
    for (const auto& row : omega) n += row.size();
    return n;
}

std::vector<double> TrainableParams::flatten() const {
    std::vector<double> out;
    out.reserve(size());
    out.insert(out.end(), a.begin(), a.end());
    for (const auto& row : omega) out.insert(out.end(), row.begin(), row.end());
    out.push_back(w);
    out.insert(out.end(), nu.begin(), nu.end());
    return out;
}

void TrainableParams::assign(const std::vector<double>& flat) {
    if (flat.size() != size())
        throw std::invalid_argument("flat parameter vector has wrong length");
    std::size_t k = 0;
    for (double& v : a) v = flat[k++];
    for (auto& row : omega)
        for (double& v : row) v = flat[k++];
    w = flat[k++];
    for (double& v : nu) v = flat[k++];
}

void TrainableParams::validate_against(const StructuralParams& sp) const {
    require(a.size() == static_cast<std::size_t>(sp.d), "len(a) must equal d");
    require(omega.size() == static_cast<std::size_t>(sp.L), "omega must have L rows");
    for (const auto& row : omega) {
        require(row.size() == static_cast<std::size_t>(sp.P), "omega rows must have P entries");
        for (double v : row) require(std::isfinite(v), "omega must be finite");
    }
    require(nu.size() == static_cast<std::size_t>(sp.P), "len(nu) must equal P");
    for (double v : a) require(std::isfinite(v), "a must be finite");
    for (double v : nu) require(std::isfinite(v), "nu must be finite");
    require(std::isfinite(w), "w must be finite");
}

bool SpikeTrain::well_formed(double T) const {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0 && times[k] < T)) return false;
        if (k > 0 && !(times[k] > times[k - 1])) return false;
    }
    return true;
}

double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

double readout(const std::vector<double>& u_final, const std::vector<double>& nu,
               double theta_u) {
    if (u_final.size() != nu.size())
        throw std::invalid_argument("readout: u_final and nu differ in length");
    double r = 0.0;
    for (std::size_t p = 0; p < nu.size(); ++p) r += nu[p] * sigmoid(u_final[p] - theta_u);
    return r;
}

}  // namespace snn
