#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "tdrw/chains.hpp"
#include "tdrw/environment.hpp"
#include "tdrw/walkers.hpp"

using namespace tdrw;

namespace {
Environment lazy_zigzag() {
    ZigzagParams p;
    p.eps = 0.5;
    p.b = 2.0 / 3.0;
    p.b_prime = 2.0;
    return zigzag_1d(p);
}
}  // namespace

TEST_CASE("discrete trajectories: one event per step, nearest-neighbor moves") {
    Environment env = lazy_zigzag();
    Trajectory t = simulate_discrete(env, {0, 0, 0}, 0, 500, 9);
    REQUIRE(t.events.size() == 501);
    CHECK(t.events.front() == std::pair<double, Vertex>(0.0, Vertex{0, 0, 0}));
    for (size_t i = 1; i < t.events.size(); ++i) {
        CHECK(t.events[i].first == (double)i);
        int64_t dx = std::abs(t.events[i].second.x - t.events[i - 1].second.x);
        CHECK(dx <= 1);
    }
    Trajectory again = simulate_discrete(env, {0, 0, 0}, 0, 500, 9);
    CHECK(t.events == again.events);
    Trajectory other = simulate_discrete(env, {0, 0, 0}, 0, 500, 10);
    CHECK(t.events != other.events);
}

TEST_CASE("non-lazy walks preserve step parity") {
    Environment env = constant_env(Geometry::line(), 1.0);
    Trajectory t = simulate_discrete(env, {0, 0, 0}, 0, 301, 4);
    int64_t x = t.events.back().second.x;
    CHECK((x + 301) % 2 == 0);
    CHECK(std::abs(x) <= 301);
}

TEST_CASE("holding frequency matches the laziness parameter") {
    ZigzagParams p;
    p.eps = 0.5;
    p.b = 2.0;  // gamma = gamma' = 1/2
    p.b_prime = 2.0;
    Environment env = zigzag_1d(p);
    Trajectory t = simulate_discrete(env, {0, 0, 0}, 0, 20000, 5);
    int64_t stays = 0;
    for (size_t i = 1; i < t.events.size(); ++i)
        if (t.events[i].second == t.events[i - 1].second) ++stays;
    double f = (double)stays / 20000.0;
    CHECK(f == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("zigzag batch speed approaches the solved beta = 1/6") {
    Environment env = lazy_zigzag();
    std::vector<Trajectory> batch;
    for (uint64_t s = 0; s < 50; ++s)
        batch.push_back(simulate_discrete(env, {0, 0, 0}, 0, 20000, 100 + s));
    BatchStats st = trajectory_stats(batch);
    CHECK(st.count == 50);
    CHECK(st.speed_mean == doctest::Approx(1.0 / 6.0).epsilon(0.06));
    CHECK(st.speed_se < 2e-3);
    CHECK(st.max_excursion > 2000);
    CHECK(st.returns.size() == 50);
}

TEST_CASE("speed formula vs simulation across the zigzag parameter grid") {
    auto loop_of = [](double gamma) { return 2.0 * gamma / (1.0 - gamma); };
    for (double eps : {0.3, 0.5})
        for (auto [g, gp] : {std::pair{0.25, 0.5}, std::pair{0.5, 0.25}}) {
            ZigzagParams p;
            p.eps = eps;
            p.b = loop_of(g);
            p.b_prime = loop_of(gp);
            Environment env = zigzag_1d(p);
            SpeedReport sr = ballistic_speed_1d(eps, g, gp);
            CHECK(sr.beta == doctest::Approx(eps * (gp - g) / (g + gp)).epsilon(1e-14));
            std::vector<Trajectory> batch;
            for (uint64_t s = 0; s < 30; ++s)
                batch.push_back(simulate_discrete(env, {0, 0, 0}, 0, 20000, 7000 + s));
            BatchStats st = trajectory_stats(batch);
            REQUIRE(st.speed_se > 0);
            CHECK(std::abs(st.speed_mean - sr.beta) <= 4 * st.speed_se);
        }
}

TEST_CASE("non-lazy zigzag is frozen in one state and moves at drift eps") {
    ZigzagParams p;
    p.eps = 0.5;
    Environment env = zigzag_1d(p);
    CHECK(ballistic_speed_1d(0.5, 0.0, 0.0).beta == 0.5);
    Trajectory t = simulate_discrete(env, {0, 0, 0}, 0, 4000, 13);
    StateTrace trace = classify_states(env, t);
    CHECK(trace.change_times.empty());  // parity of t + x never changes
    CHECK(trace.occupation.at("A+") == (int64_t)t.events.size());
    CHECK((double)t.events.back().second.x / 4000.0 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("csrw: unit jump rate and strictly ordered event times") {
    Environment env = constant_env(Geometry::line(), 1.0);
    Trajectory t = simulate_csrw(env, {0, 0, 0}, 0.0, 1000.0, 3);
    int64_t jumps = (int64_t)t.events.size() - 1;
    CHECK(jumps > 850);
    CHECK(jumps < 1150);
    for (size_t i = 1; i < t.events.size(); ++i) {
        CHECK(t.events[i].first > t.events[i - 1].first);
        CHECK(t.events[i].first < 1000.0);
        CHECK(std::abs(t.events[i].second.x - t.events[i - 1].second.x) == 1);
    }
}

TEST_CASE("vsrw: thinning acceptance bookkeeping") {
    Environment flat = constant_env(Geometry::line(), 3.0);
    VsrwStats stats;
    Trajectory t = simulate_vsrw(flat, {0, 0, 0}, 0.0, 500.0, 21, &stats);
    CHECK(stats.proposals == stats.accepted);  // mu(x) = lambda everywhere
    int64_t jumps = (int64_t)t.events.size() - 1;
    CHECK(jumps == stats.accepted);
    CHECK(jumps > 2700);  // rate 6
    CHECK(jumps < 3300);

    VsrwStats zs;
    simulate_vsrw(lazy_zigzag(), {0, 0, 0}, 0.0, 2000.0, 22, &zs);
    CHECK(zs.accepted < zs.proposals);  // mu ranges over [8/3, 4], lambda = 4
    CHECK(zs.accepted > zs.proposals / 2);
}

TEST_CASE("state labels per family") {
    Environment zig = lazy_zigzag();
    CHECK(state_label(zig, 0.0, {0, 0, 0}) == "A+");
    CHECK(state_label(zig, 0.0, {1, 0, 0}) == "A-");
    CHECK(state_label(zig, 1.0, {0, 0, 0}) == "A-");

    PoissonShiftParams pp;
    pp.breakpoints = {0.0, 4.0};
    Environment pois = poisson_shift_1d(pp);
    CHECK(state_label(pois, 0.0, {0, 0, 0}) == "A1");
    CHECK(state_label(pois, 0.0, {1, 0, 0}) == "A2");
    CHECK(state_label(pois, 0.0, {2, 0, 0}) == "A3");
    CHECK(state_label(pois, 4.0, {1, 0, 0}) == "A1");  // pattern shifted once

    HalfspaceParams hp;
    Environment hs = halfspace_discrete(hp);
    CHECK(state_label(hs, 0.0, {0, 0, 1}) == "A+");
    CHECK(state_label(hs, 0.0, {0, 0, 2}) == "A-");

    Environment flat = constant_env(Geometry::line(), 1.0);
    CHECK_THROWS_AS(state_label(flat, 0.0, {0, 0, 0}), std::domain_error);
}

TEST_CASE("classification bookkeeping sums over all events") {
    Environment env = lazy_zigzag();
    Trajectory t = simulate_discrete(env, {0, 0, 0}, 0, 1000, 17);
    StateTrace trace = classify_states(env, t);
    CHECK(trace.labels.size() == t.events.size());
    int64_t total = 0;
    for (const auto& [lab, n] : trace.occupation) total += n;
    CHECK(total == (int64_t)t.events.size());
    CHECK(trace.occupation.count("A+"));
    CHECK(trace.occupation.count("A-"));
    CHECK(!trace.change_times.empty());
}

TEST_CASE("excursion records of a floor-started trajectory") {
    Trajectory t;
    t.geom = GeometryKind::halfspace3d;
    t.start = {0, 0, 0};
    t.t0 = 0;
    t.events = {{0, {0, 0, 0}}, {1, {0, 0, 1}}, {2, {0, 0, 2}},
                {3, {0, 0, 1}}, {4, {0, 0, 0}}, {5, {0, 0, 1}},
                {6, {0, 0, 0}}};
    ExcursionRecord rec = excursions(t);
    CHECK(rec.sigma == std::vector<double>{0, 4, 6});
    CHECK(rec.durations() == std::vector<double>{4, 2});
    CHECK(rec.vertical == std::vector<int64_t>{0, 1, 2, 1, 0, 1, 0});
    REQUIRE(rec.floor_xy.size() == 3);
    CHECK(rec.increments().size() == 2);

    Trajectory bad = t;
    bad.events.front().second = {0, 0, 2};
    CHECK_THROWS_AS(excursions(bad), std::invalid_argument);
}

TEST_CASE("half-space batch: bulk vertical drift near -eps/3") {
    HalfspaceParams hp;
    hp.eps = 0.5;
    Environment env = halfspace_discrete(hp);
    std::vector<Trajectory> batch;
    for (uint64_t s = 0; s < 20; ++s)
        batch.push_back(simulate_discrete(env, {0, 0, 0}, 0, 20000, 500 + s));
    BatchStats st = trajectory_stats(batch);
    CHECK(st.vdrift_mean == doctest::Approx(-1.0 / 6.0).epsilon(0.08));
    CHECK(st.vdrift_se < 0.01);
    for (const auto& t : batch)
        for (const auto& [time, v] : t.events) CHECK(v.z >= 0);
}

TEST_CASE("csrw shift-pattern speed agrees with the solved chain sign") {
    const double eps = 0.5, c = 2.0, horizon = 2000.0;
    SpeedReport sr = csrw_speed_sign(eps, c);
    CHECK(sr.beta > 0);
    std::vector<double> speeds;
    for (uint64_t e = 0; e < 10; ++e) {
        PoissonShiftParams pp;
        pp.eps = eps;
        pp.c = c;
        pp.breakpoints = poisson_times(c - 1.0, horizon, 900 + e);
        Environment env = poisson_shift_1d(pp);
        for (uint64_t w = 0; w < 10; ++w) {
            Trajectory t = simulate_csrw(env, {0, 0, 0}, 0.0, horizon, 5000 + e * 10 + w);
            speeds.push_back((double)t.events.back().second.x / horizon);
        }
    }
    double m = 0;
    for (double s : speeds) m += s;
    m /= (double)speeds.size();
    double v = 0;
    for (double s : speeds) v += (s - m) * (s - m);
    double se = std::sqrt(v / (speeds.size() - 1) / speeds.size());
    CHECK(m > 0);
    CHECK(m > 2 * se);
    CHECK(std::abs(m - sr.beta) < 6 * se + 1e-3);
}
