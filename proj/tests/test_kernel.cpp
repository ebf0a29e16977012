#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tdrw/environment.hpp"
#include "tdrw/kernel.hpp"

using namespace tdrw;

namespace {
Vertex vx(int64_t x) { return {x, 0, 0}; }

Environment lazy_zigzag() {
    ZigzagParams p;
    p.eps = 0.5;
    p.b = 2.0 / 3.0;
    p.b_prime = 2.0;
    return zigzag_1d(p);
}
}  // namespace

TEST_CASE("box layout: indexing round trip and exit distances") {
    BoxLayout line = BoxLayout::around(Geometry::line(), vx(5), 3);
    CHECK(line.size() == 7);
    for (int64_t x = 2; x <= 8; ++x) {
        std::size_t i = line.index(vx(x));
        REQUIRE(i != BoxLayout::npos);
        CHECK(line.vertex(i) == vx(x));
    }
    CHECK(line.index(vx(1)) == BoxLayout::npos);
    CHECK(line.index(vx(9)) == BoxLayout::npos);
    CHECK(line.exit_distance() == 4);

    BoxLayout half = BoxLayout::around(Geometry::halfspace(), {0, 0, 0}, 2);
    CHECK(half.size() == 5u * 5u * 3u);  // z clipped at the floor
    CHECK(half.index({0, 0, 3}) == BoxLayout::npos);
    CHECK(half.index({0, 0, 0}) != BoxLayout::npos);
    CHECK(half.exit_distance() == 3);

    BoxLayout cyc = BoxLayout::around(Geometry::cycle(11), {4, 0, 0}, 1);
    CHECK(cyc.size() == 11);  // cycles are always exact
}

TEST_CASE("discrete kernel is binomial on the free line") {
    Environment env = constant_env(Geometry::line(), 1.0);
    PropagationConfig cfg;
    cfg.radius = 6;
    auto snap = discrete_kernel(env, vx(0), 0, 4, cfg).back();
    CHECK(snap.truncation_loss == 0.0);  // mass never reaches the boundary
    CHECK(snap.prob(vx(0)) == doctest::Approx(6.0 / 16.0).epsilon(1e-15));
    CHECK(snap.prob(vx(2)) == doctest::Approx(4.0 / 16.0).epsilon(1e-15));
    CHECK(snap.prob(vx(-4)) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
    CHECK(snap.prob(vx(1)) == 0.0);
    CHECK(snap.prob(vx(40)) == 0.0);  // outside the box
    CHECK(snap.mean(0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(snap.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("absorbing boundary: exact conservation and monotone loss") {
    Environment env = constant_env(Geometry::line(), 1.0);
    PropagationConfig cfg;
    cfg.radius = 3;
    cfg.snapshot_times = {2, 4, 6, 8};
    auto snaps = discrete_kernel(env, vx(0), 0, 10, cfg);
    REQUIRE(snaps.size() == 5);
    double prev = 0.0;
    for (const auto& s : snaps) {
        CHECK(s.total_mass() + s.truncation_loss == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(s.truncation_loss >= prev);
        prev = s.truncation_loss;
    }
    CHECK(snaps.back().truncation_loss > 0.1);  // radius 3 leaks fast
    CHECK(snaps.front().truncation_loss == 0.0);
}

TEST_CASE("variance of the two-step kernel is exact") {
    Environment env = constant_env(Geometry::line(), 1.0);
    PropagationConfig cfg;
    cfg.radius = 5;
    auto snap = discrete_kernel(env, vx(0), 0, 2, cfg).back();
    CHECK(snap.variance(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(snap.mean(0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("kernel reruns are bit-identical") {
    Environment env = lazy_zigzag();
    PropagationConfig cfg;
    cfg.radius = 40;
    auto a = discrete_kernel(env, vx(0), 0, 30, cfg).back();
    auto b = discrete_kernel(env, vx(0), 0, 30, cfg).back();
    REQUIRE(a.mass.size() == b.mass.size());
    for (size_t i = 0; i < a.mass.size(); ++i) CHECK(a.mass[i] == b.mass[i]);
}

TEST_CASE("csrw kernel matches direct Poissonization") {
    Environment env = constant_env(Geometry::line(), 1.0);
    PropagationConfig cfg;
    cfg.radius = 60;
    cfg.tol = 1e-12;
    auto snap = csrw_kernel(env, vx(0), 5.0, cfg).back();
    const int R = 80;
    std::vector<double> p(2 * R + 1, 0.0), q(2 * R + 1, 0.0), acc(2 * R + 1, 0.0);
    p[R] = 1.0;
    double w = std::exp(-5.0), cum = 0.0;
    for (int k = 0; cum < 1.0 - 1e-15 && k < 2 * R - 2; ++k) {
        if (k > 0) {
            w *= 5.0 / k;
            for (int i = 1; i < 2 * R; ++i) q[(size_t)i] = 0.5 * (p[(size_t)i - 1] + p[(size_t)i + 1]);
            q.front() = q.back() = 0.0;
            p.swap(q);
        }
        for (int i = 0; i <= 2 * R; ++i) acc[(size_t)i] += w * p[(size_t)i];
        cum += w;
    }
    double worst = 0.0;
    for (int64_t y = -60; y <= 60; ++y)
        worst = std::max(worst, std::abs(snap.prob(vx(y)) - acc[(size_t)(y + R)]));
    CHECK(worst <= 1e-10);
    CHECK(snap.error_bound() < 1e-9);
}

TEST_CASE("vsrw scaling: weight a at time t equals weight 1 at a*t") {
    PropagationConfig cfg;
    cfg.radius = 50;
    cfg.tol = 1e-10;
    auto fast = vsrw_kernel(constant_env(Geometry::line(), 2.0), vx(0), 3.0, cfg).back();
    auto slow = vsrw_kernel(constant_env(Geometry::line(), 1.0), vx(0), 6.0, cfg).back();
    double worst = 0.0;
    for (int64_t y = -50; y <= 50; ++y)
        worst = std::max(worst, std::abs(fast.prob(vx(y)) - slow.prob(vx(y))));
    CHECK(worst <= 1e-12);
}

TEST_CASE("vsrw zigzag on-diagonal value at t=100") {
    ZigzagParams p;
    p.eps = 0.5;  // loopless
    Environment env = zigzag_1d(p);
    PropagationConfig cfg;
    cfg.radius = 400;
    cfg.tol = 1e-10;
    auto snap = vsrw_kernel(env, vx(0), 100.0, cfg).back();
    CHECK(snap.prob(vx(0)) == doctest::Approx(3.025027325e-2).epsilon(5e-8));
    CHECK(snap.error_bound() < 1e-9);
    // mass cannot reach radius 400 by t=100, so the only loss is the series
    // tail, which stays inside the tol budget
    CHECK(snap.truncation_loss <= cfg.tol);
}

TEST_CASE("ondiagonal series for the discrete free walk") {
    Environment env = constant_env(Geometry::line(), 1.0);
    PropagationConfig cfg;
    cfg.radius = 12;
    auto pts = ondiagonal_series(env, vx(0), Dynamics::discrete, {0.0, 2.0, 4.0}, cfg);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].p == 1.0);
    CHECK(pts[1].p == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pts[2].p == doctest::Approx(0.375).epsilon(1e-15));
    CHECK_THROWS_AS(
        ondiagonal_series(env, vx(0), Dynamics::discrete, {0.5, 2.0}, cfg),
        std::invalid_argument);
    CHECK_THROWS_AS(
        ondiagonal_series(env, vx(0), Dynamics::discrete, {4.0, 2.0}, cfg),
        std::invalid_argument);
}

TEST_CASE("duality on a cycle is exact to solver precision") {
    Environment env =
        cycle_schedule_env(6, {0.0, 1.5}, {{1, 0.5, 2, 1, 0.7, 1.3}, {2, 1, 0.5, 1.5, 1, 0.9}});
    PropagationConfig cfg;
    cfg.radius = 1;
    cfg.tol = 1e-12;
    CHECK(duality_check_vsrw(env, {0, 0, 0}, {2, 0, 0}, 3.0, cfg) <= 1e-12);
    CHECK(duality_max_discrepancy(env, {1, 0, 0}, 3.0, cfg) <= 1e-12);
    CHECK_THROWS_AS(
        duality_check_vsrw(constant_env(Geometry::line(), 1.0), vx(0), vx(1), 3.0, cfg),
        std::invalid_argument);
}

TEST_CASE("poisson upper tail bounds") {
    CHECK(poisson_upper_tail(5.0, 3) == 1.0);  // trivial regime k <= lambda
    double prev = 1.0;
    for (int64_t k = 6; k < 40; ++k) {
        double tail = poisson_upper_tail(5.0, k);
        CHECK(tail > 0.0);
        CHECK(tail <= prev);
        // lower bound: the first term alone
        double lg = -5.0 + k * std::log(5.0) - std::lgamma((double)k + 1.0);
        CHECK(tail >= std::exp(lg) * (1.0 - 1e-12));
        prev = tail;
    }
    CHECK(poisson_upper_tail(2.0, 60) < 1e-50);
}

TEST_CASE("snapshot csv round-trips every mass bit-exactly") {
    Environment env = lazy_zigzag();
    PropagationConfig cfg;
    cfg.radius = 30;
    auto snap = discrete_kernel(env, vx(0), 0, 20, cfg).back();
    std::ostringstream os;
    snapshot_to_csv(snap, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "x,y,z,mass");
    double sum = 0.0;
    size_t rows = 0;
    while (std::getline(is, line)) {
        auto last = line.rfind(',');
        auto first = line.find(',');
        int64_t x = std::stoll(line.substr(0, first));
        double m = std::stod(line.substr(last + 1));
        CHECK(m == snap.prob(vx(x)));  // shortest round-trip representation
        sum += m;
        ++rows;
    }
    CHECK(rows > 10);
    CHECK(sum == doctest::Approx(snap.total_mass()).epsilon(1e-13));
}

TEST_CASE("propagation config validation") {
    Environment env = constant_env(Geometry::line(), 1.0);
    PropagationConfig bad_tol;
    bad_tol.radius = 5;
    bad_tol.tol = 1e-5;
    CHECK_THROWS_AS(discrete_kernel(env, vx(0), 0, 2, bad_tol), std::invalid_argument);
    PropagationConfig bad_radius;
    bad_radius.radius = 0;
    CHECK_THROWS_AS(csrw_kernel(env, vx(0), 1.0, bad_radius), std::invalid_argument);
}

TEST_CASE("vsrw loss bound certifies box escape") {
    ZigzagParams p;
    p.eps = 0.5;
    Environment env = zigzag_1d(p);
    PropagationConfig cfg;
    cfg.radius = 8;
    cfg.tol = 1e-9;
    auto snap = vsrw_kernel(env, vx(0), 20.0, cfg).back();
    CHECK(snap.total_mass() < 1.0);
    CHECK(snap.truncation_loss == doctest::Approx(1.0 - snap.total_mass()).epsilon(1e-11));
    CHECK(snap.loss_bound >= snap.truncation_loss);
    CHECK(snap.loss_bound <= 1.0);
}
