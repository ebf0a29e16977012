#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tdrw/env_json.hpp"
#include "tdrw/environment.hpp"

using namespace tdrw;

namespace {
Vertex vx(int64_t x) { return {x, 0, 0}; }
}  // namespace

TEST_CASE("zigzag: phase pattern, loops, laziness") {
    ZigzagParams p;
    p.eps = 0.5;
    p.b = 2.0 / 3.0;  // gamma  = 1/4
    p.b_prime = 2.0;  // gamma' = 1/2
    Environment env = zigzag_1d(p);
    // segment 0: edge (i,i+1) carries 1+eps when i is even
    CHECK(env.conductance(0.0, vx(0), vx(1)) == 1.5);
    CHECK(env.conductance(0.0, vx(1), vx(2)) == 0.5);
    CHECK(env.conductance(0.0, vx(-1), vx(0)) == 0.5);
    // the whole pattern shifts by one every unit of time
    CHECK(env.conductance(1.0, vx(0), vx(1)) == 0.5);
    CHECK(env.conductance(1.7, vx(1), vx(2)) == 1.5);
    // loops follow the site parity
    CHECK(env.loop_weight(0.0, vx(0)) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(env.loop_weight(0.0, vx(1)) == 2.0);
    CHECK(env.loop_weight(1.0, vx(0)) == 2.0);
    // holding probabilities equal the laziness parameters exactly
    CHECK(env.transition_prob(0.0, vx(0), vx(0)) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(env.transition_prob(0.0, vx(1), vx(1)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(zigzag_gamma(p.b) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(zigzag_gamma(p.b_prime) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(env.c1() == 0.5);
    CHECK(env.max_mu_total() == 4.0);
}

TEST_CASE("transition rows are stochastic and conductance symmetric") {
    ZigzagParams p;
    p.eps = 0.5;
    p.b = 2.0 / 3.0;
    p.b_prime = 2.0;
    Environment env = zigzag_1d(p);
    for (double t : {0.0, 0.5, 1.0, 3.25})
        for (int64_t x = -3; x <= 3; ++x) {
            double row = env.transition_prob(t, vx(x), vx(x));
            for (const auto& n : env.geometry().neighbors(vx(x)))
                row += env.transition_prob(t, vx(x), n);
            CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(env.conductance(t, vx(x), vx(x + 1)) == env.conductance(t, vx(x + 1), vx(x)));
        }
    CHECK(env.conductance(0.0, vx(0), vx(2)) == 0.0);  // non-adjacent
    CHECK_THROWS_AS(env.conductance(-0.1, vx(0), vx(1)), std::domain_error);
}

TEST_CASE("zigzag boundaries and segments") {
    ZigzagParams p;
    Environment env = zigzag_1d(p);
    CHECK(env.segment_of(0.0) == 0);
    CHECK(env.segment_of(2.7) == 2);
    auto b = env.boundaries(5.5);
    REQUIRE(b.size() == 5);
    CHECK(b.front() == 1.0);
    CHECK(b.back() == 5.0);
    CHECK_THROWS_AS(zigzag_1d(ZigzagParams{1.5, 0, 0}), std::invalid_argument);
}

TEST_CASE("poisson shift: mod-3 pattern advances at breakpoints") {
    PoissonShiftParams p;
    p.eps = 0.5;
    p.c = 2.0;
    p.breakpoints = {0.0, 5.0};
    Environment env = poisson_shift_1d(p);
    // segment 0: class of edge (i,i+1) is i mod 3 -> {1-eps, 1, 1+eps}
    CHECK(env.conductance(0.0, vx(0), vx(1)) == 0.5);
    CHECK(env.conductance(0.0, vx(1), vx(2)) == 1.0);
    CHECK(env.conductance(0.0, vx(2), vx(3)) == 1.5);
    CHECK(env.conductance(0.0, vx(3), vx(4)) == 0.5);
    CHECK(env.conductance(0.0, vx(-1), vx(0)) == 1.5);
    // one shift after tau_1 = 5 (right-continuous there)
    CHECK(env.conductance(4.999, vx(0), vx(1)) == 0.5);
    CHECK(env.conductance(5.0, vx(0), vx(1)) == 1.5);
    CHECK(env.loop_weight(0.0, vx(0)) == 0.0);
    CHECK(env.c1() == 0.5);
    CHECK(env.max_mu_total() == 2.5);
    CHECK(env.intensity_c() == 2.0);
    // negative eps flips the strong direction but stays elliptic
    p.eps = -0.3;
    Environment env2 = poisson_shift_1d(p);
    CHECK(env2.conductance(0.0, vx(0), vx(1)) == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(env2.c1() == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("poisson_times: reproducible, tau_0 = 0, strictly increasing") {
    auto a = poisson_times(1.0, 100.0, 42);
    auto b = poisson_times(1.0, 100.0, 42);
    auto c = poisson_times(1.0, 100.0, 43);
    CHECK(a == b);
    CHECK(a != c);
    REQUIRE(!a.empty());
    CHECK(a.front() == 0.0);
    for (size_t i = 1; i < a.size(); ++i) {
        CHECK(a[i] > a[i - 1]);
        CHECK(a[i] < 100.0);
    }
    // ~100 events expected at intensity 1; loose sanity band
    CHECK(a.size() > 60u);
    CHECK(a.size() < 150u);
    CHECK_THROWS_AS(poisson_times(0.0, 10.0, 1), std::invalid_argument);
}

TEST_CASE("halfspace discrete: vertical weights from the lower endpoint") {
    HalfspaceParams p;
    p.eps = 0.5;  // non-lazy
    Environment env = halfspace_discrete(p);
    Vertex floor0{0, 0, 0}, up1{0, 0, 1}, up2{0, 0, 2};
    // t=0: site (0,0,1) has odd parity -> up 1+eps, down 1-eps
    CHECK(env.conductance(0.0, up1, up2) == 1.5);
    CHECK(env.conductance(0.0, up1, floor0) == 0.5);
    CHECK(env.conductance(0.0, up1, Vertex{1, 0, 1}) == 1.0);  // bulk horizontal
    CHECK(env.conductance(0.0, floor0, Vertex{1, 0, 0}) == 0.0);  // floor horizontal cut
    CHECK(env.mu_total(0.0, floor0) == 0.5);
    CHECK(env.mu_total(1.0, floor0) == 1.5);  // parity flips with t
    // the walk at the floor always climbs in the non-lazy case
    CHECK(env.transition_prob(0.0, floor0, up1) == 1.0);
}

TEST_CASE("halfspace discrete: laziness relations enforced") {
    // gamma = 1/4: b = 2, f = gamma(1+eps)/(1-gamma) = 0.5
    // gamma' = 1/8: b' = 6/7, f' = (1/8)(1/2)/(7/8) = 1/14
    HalfspaceParams good;
    good.eps = 0.5;
    good.b = 2.0;
    good.b_prime = 6.0 / 7.0;
    good.f = 0.5;
    good.f_prime = 1.0 / 14.0;
    Environment env = halfspace_discrete(good);
    CHECK(halfspace_gamma(good.b) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(env.loop_weight(1.0, {0, 0, 0}) == 0.5);        // odd parity floor -> f
    CHECK(env.loop_weight(0.0, {0, 0, 0}) == doctest::Approx(1.0 / 14.0).epsilon(1e-15));
    CHECK(env.loop_weight(1.0, {0, 0, 2}) == 2.0);  // odd parity interior -> b
    CHECK(env.loop_weight(0.0, {0, 0, 2}) == doctest::Approx(6.0 / 7.0).epsilon(1e-15));

    HalfspaceParams bad = good;
    bad.f = 0.4;  // breaks b/(b+6) = f/(f+1+eps)
    CHECK_THROWS_AS(halfspace_discrete(bad), std::invalid_argument);
    HalfspaceParams swapped = good;  // gamma' > gamma is rejected
    std::swap(swapped.b, swapped.b_prime);
    swapped.f = 3.0 / 14.0;   // matches gamma = 1/8 against 1+eps
    swapped.f_prime = 1.0 / 6.0;  // matches gamma' = 1/4 against 1-eps
    CHECK_THROWS_AS(halfspace_discrete(swapped), std::invalid_argument);
}

TEST_CASE("halfspace csrw: layer parity against the segment index") {
    HalfspaceParams p;
    p.eps = 0.5;
    p.breakpoints = {0.0, 2.0};
    Environment env = halfspace_csrw(p);
    Vertex floor0{0, 0, 0};
    // segment 0: floor horizontal (z=0, even) carries 1 - eps/2
    CHECK(env.conductance(0.0, floor0, Vertex{1, 0, 0}) == 0.75);
    CHECK(env.conductance(0.0, Vertex{0, 0, 1}, Vertex{1, 0, 1}) == 1.25);
    CHECK(env.conductance(0.0, floor0, Vertex{0, 0, 1}) == 0.5);
    CHECK(env.conductance(0.0, Vertex{0, 0, 1}, Vertex{0, 0, 2}) == 1.5);
    // after tau_1 = 2 every layer flips
    CHECK(env.conductance(2.0, floor0, Vertex{1, 0, 0}) == 1.25);
    CHECK(env.conductance(2.0, floor0, Vertex{0, 0, 1}) == 1.5);
    CHECK(env.loop_weight(0.0, floor0) == 0.0);
    CHECK_THROWS_AS(halfspace_csrw(HalfspaceParams{0.5, 0, 0, 0, 0, {}}), std::invalid_argument);
}

TEST_CASE("constant and cycle-schedule environments") {
    Environment c = constant_env(Geometry::line(), 2.0, 0.5);
    CHECK(c.conductance(17.0, vx(0), vx(1)) == 2.0);
    CHECK(c.loop_weight(3.0, vx(5)) == 0.5);
    CHECK(c.mu_total(0.0, vx(0)) == 4.5);
    CHECK(c.boundaries(100.0).empty());
    CHECK(c.max_mu_total() == 4.5);

    Environment cy = cycle_schedule_env(4, {0.0, 1.0}, {{1, 2, 3, 4}, {5, 6, 7, 8}});
    CHECK(cy.conductance(0.5, {0, 0, 0}, {1, 0, 0}) == 1.0);
    CHECK(cy.conductance(0.5, {3, 0, 0}, {0, 0, 0}) == 4.0);
    CHECK(cy.conductance(0.5, {0, 0, 0}, {3, 0, 0}) == 4.0);  // same edge, either order
    CHECK(cy.conductance(1.0, {3, 0, 0}, {0, 0, 0}) == 8.0);
    CHECK(cy.c1() == doctest::Approx(0.125).epsilon(1e-15));
    CHECK_THROWS_AS(cycle_schedule_env(4, {0.0}, {{1, 2, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(cycle_schedule_env(4, {0.5}, {{1, 2, 3, 4}}), std::invalid_argument);
}

TEST_CASE("reversed environment takes left limits of the mirrored schedule") {
    ZigzagParams zp;
    zp.eps = 0.5;
    zp.b = 2.0 / 3.0;
    zp.b_prime = 2.0;
    Environment env = zigzag_1d(zp);
    const double T = 10.0;
    Environment rev = reversed_environment(env, T);
    for (double u : {0.25, 1.5, 3.75, 9.5}) {
        CHECK(rev.conductance(u, vx(0), vx(1)) == env.conductance(T - u, vx(0), vx(1)));
        CHECK(rev.loop_weight(u, vx(2)) == env.loop_weight(T - u, vx(2)));
    }
    auto b = rev.boundaries(T);
    REQUIRE(b.size() == 9);
    CHECK(b.front() == 1.0);

    // piecewise segments: the reversal reads the left limit at the boundary
    Environment cy = cycle_schedule_env(3, {0.0, 2.0, 4.0}, {{1, 1, 1}, {2, 2, 2}, {3, 3, 3}});
    Environment rcy = reversed_environment(cy, 5.0);
    CHECK(rcy.conductance(0.5, {0, 0, 0}, {1, 0, 0}) == 3.0);  // s = 4.5, segment 2
    CHECK(rcy.conductance(1.0, {0, 0, 0}, {1, 0, 0}) == 2.0);  // s = 4, left limit
    CHECK(rcy.conductance(4.0, {0, 0, 0}, {1, 0, 0}) == 1.0);  // s = 1, segment 0
}

TEST_CASE("ellipticity verification over a sampled window") {
    ZigzagParams zp;
    zp.eps = 0.5;
    Environment env = zigzag_1d(zp);
    std::vector<double> times;
    for (int i = 0; i < 16; ++i) times.push_back(0.5 * i);
    Ball box = ball(env.geometry(), {0, 0, 0}, 6);
    EllipticityReport rep = verify_ellipticity(env, times, box);
    CHECK(rep.pass);
    CHECK(rep.min_weight == 0.5);
    CHECK(rep.max_weight == 1.5);
    // a tighter demanded constant must fail and report the witness
    EllipticityReport fail = verify_ellipticity(env, times, box, 0.6);
    CHECK(!fail.pass);
    CHECK(fail.w_fail == 0.5);
}

TEST_CASE("json round trip preserves the schedule") {
    PoissonShiftParams pp;
    pp.eps = -0.3;
    pp.c = 2.0;
    pp.breakpoints = poisson_times(1.0, 50.0, 11);
    Environment env = poisson_shift_1d(pp);
    Environment back = env_from_json(env_to_json(env));
    CHECK(back.family() == EnvFamily::poisson_shift);
    CHECK(back.breakpoints() == env.breakpoints());
    for (double t : {0.0, 7.3, 49.0})
        for (int64_t x = -4; x <= 4; ++x)
            CHECK(back.conductance(t, vx(x), vx(x + 1)) == env.conductance(t, vx(x), vx(x + 1)));

    ZigzagParams zp;
    zp.eps = 0.5;
    zp.b = 2.0 / 3.0;
    zp.b_prime = 2.0;
    Environment rev = reversed_environment(zigzag_1d(zp), 8.0);
    Environment rev_back = env_from_json(env_to_json(rev));
    CHECK(rev_back.family() == EnvFamily::reversed);
    for (double u : {0.1, 3.5, 7.9})
        CHECK(rev_back.conductance(u, vx(0), vx(1)) == rev.conductance(u, vx(0), vx(1)));

    Environment cyc = cycle_schedule_env(5, {0.0, 1.5}, {{1, 2, 3, 4, 5}, {2, 2, 2, 2, 2}});
    Environment cyc_back = env_from_json(env_to_json(cyc));
    CHECK(cyc_back.cycle_weights() == cyc.cycle_weights());
    CHECK(cyc_back.geometry().cycle_n == 5);
}

TEST_CASE("presets: gamma parameterization and seeded streams") {
    nlohmann::json params{{"gamma", 0.25}, {"gamma_prime", 0.5}};
    Environment env = make_preset("zigzag1d", params, 1, 100.0);
    CHECK(env.b() == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(env.b_prime() == doctest::Approx(2.0).epsilon(1e-14));

    nlohmann::json both{{"gamma", 0.25}, {"b", 1.0}};
    CHECK_THROWS_AS(make_preset("zigzag1d", both, 1, 100.0), std::invalid_argument);

    nlohmann::json pois{{"eps", 0.5}, {"c", 2.0}};
    Environment p1 = make_preset("poisson1d", pois, 7, 100.0);
    Environment p2 = make_preset("poisson1d", pois, 7, 100.0);
    Environment p3 = make_preset("poisson1d", pois, 8, 100.0);
    CHECK(p1.breakpoints() == p2.breakpoints());
    CHECK(p1.breakpoints() != p3.breakpoints());
    CHECK(p1.breakpoints().back() < 100.0);

    nlohmann::json hs{{"eps", 0.5}, {"gamma", 0.25}, {"gamma_prime", 0.125}};
    Environment h = make_preset("halfspace-dt", hs, 1, 10.0);
    CHECK(h.b() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(h.f() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(h.b_prime() == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
    CHECK(h.f_prime() == doctest::Approx(1.0 / 14.0).epsilon(1e-12));

    CHECK_THROWS_AS(make_preset("zigzag2d", params, 1, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(make_preset("zigzag1d", nlohmann::json{{"epsilon", 0.5}}, 1, 10.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_preset("zigzag1d", nlohmann::json{{"eps", 1.5}}, 1, 10.0),
                    std::invalid_argument);
}
