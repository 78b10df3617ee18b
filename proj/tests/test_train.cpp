#include <cmath>
#include <numbers>

#include "doctest.h"
#include "snn/integrator.hpp"
#include "snn/train.hpp"

using namespace snn;

namespace {

// A working moons classifier, set by hand.
TrainableParams hand_params(const StructuralParams& sp) {
    TrainableParams p = TrainableParams::zeros(sp);
    p.a = {3.0 * std::cos(-1.178), 3.0 * std::sin(-1.178)};
    p.omega[0] = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, -1.0, -1.0};
    p.w = 3.0;
    p.nu = {-8.16, -4.25, -0.61, 5.09, 8.78, 12.56, -8.16, -8.16};
    return p;
}

std::vector<Sample> small_batch(std::uint64_t seed, std::size_t n = 4) {
    return to_samples(make_moons(n, 0.0, seed));
}

}  // namespace

TEST_CASE("zeta schedule") {
    MollifierConfig m;
    m.zeta0 = 3.0;
    m.zeta1 = 10.0;
    m.epochs = 11;
    CHECK(zeta_at(5, m) == doctest::Approx(3.0 * std::sqrt(10.0 / 3.0)).epsilon(1e-14));
    CHECK(zeta_at(5, m) == doctest::Approx(5.477).epsilon(1e-4));
    CHECK(zeta_at(0, m) == doctest::Approx(3.0));
    CHECK(zeta_at(10, m) == doctest::Approx(10.0));
    m.epochs = 1;
    CHECK(zeta_at(0, m) == 3.0);

    m.zeta1 = 2.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m.zeta1 = 10.0;
    m.zeta0 = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("only the regularizer acts when no spike is fired") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    TrainableParams p = init_params(sp, 3);
    p.a = {0.1, -0.2};  // |<a, x>| stays below theta_v on the moons
    const std::vector<Sample> batch = small_batch(5, 6);
    LossConfig cfg;
    cfg.gamma = 0.05;
    const LossAndGrad lg = loss_and_grad(batch, p, sp, cfg, 3.0, sp.default_grid_step());

    const std::vector<double> flat = p.flatten();
    for (std::size_t k = 0; k < lg.report.grad_upsilon.size(); ++k)
        CHECK(lg.report.grad_upsilon[k] == 2.0 * cfg.gamma * flat[k]);

    double readout = 0.0;
    for (double v : p.nu) readout += v * sigmoid(-sp.theta_u);
    double mean_bar = 0.0;
    for (const Sample& s : batch) mean_bar += sigmoid(readout) - s.y;
    mean_bar /= static_cast<double>(batch.size());
    for (std::size_t q = 0; q < p.nu.size(); ++q) {
        const double closed = 2.0 * cfg.gamma * p.nu[q] + mean_bar * sigmoid(-sp.theta_u);
        CHECK(std::abs(lg.report.grad_nu[q] - closed) <= 1e-12);
    }
}

TEST_CASE("readout-weight gradient matches the closed form") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    const TrainableParams p = hand_params(sp);
    const std::vector<Sample> batch = small_batch(0, 6);
    const LossConfig cfg;
    const double h = sp.default_grid_step();
    const LossAndGrad lg = loss_and_grad(batch, p, sp, cfg, 3.0, h);

    std::vector<double> closed(p.nu.size());
    for (std::size_t q = 0; q < closed.size(); ++q) closed[q] = 2.0 * cfg.gamma * p.nu[q];
    for (const Sample& s : batch) {
        const NetworkRun run = run_network(s.x, p, sp, h, ResetRule::discharge(3.0), false);
        const double bar = sigmoid(run.out.readout) - s.y;
        for (std::size_t q = 0; q < closed.size(); ++q)
            closed[q] += bar * sigmoid(run.out.u_final[q] - sp.theta_u) / batch.size();
    }
    for (std::size_t q = 0; q < closed.size(); ++q)
        CHECK(std::abs(lg.report.grad_nu[q] - closed[q]) <= 1e-10);
}

TEST_CASE("adjoint gradient agrees with central differences") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    const TrainableParams p = hand_params(sp);
    const LossConfig cfg;
    const double h = sp.default_grid_step();
    for (std::uint64_t seed : {0u, 1u}) {
        const std::vector<Sample> batch = small_batch(seed + 10);
        LossAndGrad lg = loss_and_grad(batch, p, sp, cfg, 3.0, h);
        CHECK(lg.report.grad_upsilon.size() == 11);
        CHECK(lg.report.grad_nu.size() == 8);
        CHECK(std::isnan(lg.report.fd_check));
        const double err = finite_difference_check(batch, p, sp, cfg, 3.0, h, lg.report);
        CHECK(err <= 1e-4);
        CHECK(lg.report.fd_check == err);
        CHECK(lg.loss == doctest::Approx(loss_value(batch, p, sp, cfg, 3.0, h)).epsilon(1e-14));
    }
}

TEST_CASE("duplicating the batch leaves loss and gradient unchanged") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    const TrainableParams p = hand_params(sp);
    const LossConfig cfg;
    std::vector<Sample> batch = small_batch(2, 5);
    const LossAndGrad a = loss_and_grad(batch, p, sp, cfg, 3.0, sp.default_grid_step());
    const std::size_t n = batch.size();
    for (std::size_t i = 0; i < n; ++i) batch.push_back(batch[i]);
    const LossAndGrad b = loss_and_grad(batch, p, sp, cfg, 3.0, sp.default_grid_step());
    CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-13));
    const auto ga = a.report.flat();
    const auto gb = b.report.flat();
    for (std::size_t k = 0; k < ga.size(); ++k) CHECK(std::abs(ga[k] - gb[k]) <= 1e-13);
}

TEST_CASE("loss_and_grad rejects bad input") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    TrainableParams p = hand_params(sp);
    CHECK_THROWS_AS(loss_and_grad({}, p, sp, {}, 3.0, 0.006), std::invalid_argument);
    CHECK_THROWS_AS(loss_and_grad({{{0.0, 0.0}, 2}}, p, sp, {}, 3.0, 0.006),
                    std::invalid_argument);
    p.nu[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(loss_and_grad(small_batch(1), p, sp, {}, 3.0, 0.006), std::invalid_argument);
}

TEST_CASE("mollified forward") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    TrainableParams p = hand_params(sp);
    const double h = sp.default_grid_step();

    SUBCASE("tape cap") {
        CHECK_THROWS_AS(forward_mollified({1.0, 0.0}, p, sp, 3.0, h, 1024), ResourceError);
        try {
            forward_mollified({1.0, 0.0}, p, sp, 3.0, h, 1024);
        } catch (const ResourceError& e) {
            CHECK(e.required == tape_bytes(sp, h));
            CHECK(e.cap == 1024);
        }
    }
    SUBCASE("no crossings means no difference") {
        p.a = {0.2, 0.1};
        const NetworkRun soft = forward_mollified({1.0, 1.0}, p, sp, 3.0, h);
        const NetworkRun hard = run_network({1.0, 1.0}, p, sp, h, ResetRule::hard_reset(), true);
        CHECK(soft.input.states == hard.input.states);
        CHECK(soft.out.readout == hard.out.readout);
    }
    SUBCASE("sharp discharge approaches the hard reset") {
        const NetworkRun soft = forward_mollified({1.0, -0.3}, p, sp, 1e6, h);
        const NetworkRun hard = run_network({1.0, -0.3}, p, sp, h, ResetRule::hard_reset(), true);
        double sup = 0.0;
        for (std::size_t q = 0; q < hard.hidden[0].size(); ++q) {
            REQUIRE(soft.hidden[0][q].states.size() == hard.hidden[0][q].states.size());
            for (std::size_t n = 0; n < hard.hidden[0][q].states.size(); ++n)
                sup = std::max(sup, std::abs(soft.hidden[0][q].states[n] -
                                             hard.hidden[0][q].states[n]));
        }
        CHECK(sup <= 1e-4);
        CHECK(!hard.input.spikes.empty());
    }
}

TEST_CASE("convergence report") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    TrainableParams p = hand_params(sp);
    const double h = sp.default_grid_step();
    const std::vector<double> ladder = {3, 10, 30, 100, 300, 1e4, 1e6};

    SUBCASE("gaps shrink along the ladder") {
        const ConvergenceReport r = verify_mollified_convergence(p, {1.0, -0.3}, sp, ladder, h);
        for (std::size_t i = 1; i < ladder.size(); ++i) {
            CHECK(r.sup_gaps[i] <= r.sup_gaps[i - 1]);
            CHECK(r.spike_gaps[i] <= r.spike_gaps[i - 1]);
        }
        CHECK(r.sup_gaps.back() <= 1e-3 * r.smallest_threshold);
        CHECK(r.spike_gaps.back() <= h);
        CHECK(r.verdict);
    }
    SUBCASE("no crossings gives zero gaps") {
        p.a = {0.1, 0.1};
        const ConvergenceReport r = verify_mollified_convergence(p, {1.0, 1.0}, sp, ladder, h);
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            CHECK(r.sup_gaps[i] == 0.0);
            CHECK(r.spike_gaps[i] == 0.0);
        }
        CHECK(r.verdict);
    }
    SUBCASE("grazing crossing is rejected") {
        StructuralParams slow = sp;
        slow.T = 200.0;
        // Drive barely above threshold: one crossing near t = 98 with slope 5e-7.
        p.a = {sp.theta_v + 4e-6, 0.0};
        CHECK_THROWS_AS(verify_mollified_convergence(p, {1.0, 0.0}, slow, ladder, 0.02),
                        NonTransversal);
    }
    SUBCASE("ladder must increase") {
        CHECK_THROWS_AS(verify_mollified_convergence(p, {1.0, -0.3}, sp, {10, 3}, h),
                        std::invalid_argument);
    }
}

TEST_CASE("initialization is seeded and bounded") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    const TrainableParams a = init_params(sp, 9);
    const TrainableParams b = init_params(sp, 9);
    CHECK(a.flatten() == b.flatten());
    for (double v : a.flatten()) CHECK((v >= -1.0 && v <= 1.0));
    CHECK(a.flatten() != init_params(sp, 10).flatten());
}

TEST_CASE("training") {
    const StructuralParams sp = StructuralParams::moons_defaults();
    const std::vector<Sample> batch = small_batch(4, 8);
    TrainConfig cfg;
    cfg.grid_step = 0.02;

    SUBCASE("single epoch uses zeta0 and is deterministic") {
        cfg.epochs = 1;
        const TrainResult r1 = train(cfg, sp, batch, batch);
        const TrainResult r2 = train(cfg, sp, batch, batch);
        REQUIRE(r1.history.size() == 1);
        CHECK(r1.history[0].zeta == cfg.mollifier.zeta0);
        CHECK(r1.params.flatten() == r2.params.flatten());
        CHECK(r1.history[0].loss == r2.history[0].loss);
        CHECK(!r1.diverged);
    }
    SUBCASE("accepted steps never raise the loss") {
        cfg.epochs = 3;
        cfg.mollifier.zeta1 = cfg.mollifier.zeta0;
        const TrainResult r = train(cfg, sp, batch, {});
        const double start =
            loss_value(batch, init_params(sp, cfg.init_seed), sp, cfg.loss, 3.0, cfg.grid_step);
        CHECK(r.history[0].loss <= start + 1e-6);
        for (std::size_t e = 1; e < r.history.size(); ++e)
            CHECK(r.history[e].loss <= r.history[e - 1].loss + 1e-6);
    }
    SUBCASE("heavy regularization drives the loss to ln 2") {
        // Each step scales the parameters by 1 - 2 gamma step = 0.2.
        cfg.epochs = 8;
        cfg.step = 4e-4;
        cfg.loss.gamma = 1e3;
        const TrainResult r = train(cfg, sp, batch, {});
        double norm = 0.0;
        for (double v : r.params.flatten()) norm += v * v;
        CHECK(norm < 1e-6);
        const double data_loss = r.history.back().loss - cfg.loss.gamma * norm;
        CHECK(data_loss == doctest::Approx(std::numbers::ln2).epsilon(1e-3));
    }
}
