#include "tdrw/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "tdrw/analysis.hpp"
#include "tdrw/chains.hpp"
#include "tdrw/env_json.hpp"
#include "tdrw/kernel.hpp"
#include "tdrw/parallel.hpp"
#include "tdrw/rng.hpp"
#include "tdrw/walkers.hpp"

namespace tdrw {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- formatting ------------------------------------------------------------

// shortest round-trip decimal (CSV contract: bit-exact rereads)
std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(int64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt3(double v) {  // human-facing detail strings only
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_text(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
    out << body;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

// ---- small statistics ------------------------------------------------------

std::pair<double, double> mean_se(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = std::accumulate(v.begin(), v.end(), 0.0) / (double)v.size();
    if (v.size() < 2) return {m, 0.0};
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (double)(v.size() - 1) / (double)v.size())};
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- streaming batch driver ------------------------------------------------
// Reduces each trajectory on the fly; stores per-trajectory summaries only, so
// 10^5-step batches stay at O(batch) memory.

struct BatchSpec {
    Dynamics dyn = Dynamics::discrete;
    Vertex start{0, 0, 0};
    int64_t steps = 0;               // discrete clock
    double horizon = 0;              // continuous clock
    std::vector<double> horizons;    // elapsed-time checkpoints for return counts
    std::size_t duration_cap = 0;    // per-trajectory floor-gap pool (half-space)
};

struct TrajSummary {
    uint64_t seed = 0;
    Vertex final_pos{0, 0, 0};
    double elapsed = 0;
    double speed = 0;  // displacement / observation span; z-axis in the half-space
    int64_t returns = 0;
    int64_t max_dist = 0;
    double vdrift_sum = 0;  // z-increments taken from bulk sites (previous z > 0)
    int64_t vdrift_count = 0;
    std::vector<int64_t> returns_at;
    std::vector<int64_t> floor_at;  // down-crossings to z=0 by each checkpoint
    std::vector<double> durations;
};

std::vector<TrajSummary> run_batch(const Environment& env, const BatchSpec& spec,
                                   uint64_t master, int64_t batch, int threads) {
    std::vector<TrajSummary> out((size_t)batch);
    const bool hs = env.geometry().kind == GeometryKind::halfspace3d;
    parallel_for(batch, threads, [&](int64_t i) {
        TrajSummary& s = out[(size_t)i];
        s.seed = derive_seed(master, (uint64_t)i);
        std::mt19937_64 rng(s.seed);
        s.returns_at.assign(spec.horizons.size(), 0);
        s.floor_at.assign(spec.horizons.size(), 0);
        s.final_pos = spec.start;
        Vertex prev = spec.start;
        double last_floor = 0;
        bool have_floor = hs && spec.start.z == 0;
        auto visit = [&](double t, const Vertex& v) {
            if (v == spec.start) {
                ++s.returns;
                for (size_t j = 0; j < spec.horizons.size(); ++j)
                    if (t <= spec.horizons[j]) ++s.returns_at[j];
            }
            int64_t d = std::abs(v.x - spec.start.x) + std::abs(v.y - spec.start.y) +
                        std::abs(v.z - spec.start.z);
            s.max_dist = std::max(s.max_dist, d);
            if (hs) {
                if (prev.z > 0) {
                    s.vdrift_sum += (double)(v.z - prev.z);
                    ++s.vdrift_count;
                }
                if (v.z == 0) {
                    if (prev.z > 0)
                        for (size_t j = 0; j < spec.horizons.size(); ++j)
                            if (t <= spec.horizons[j]) ++s.floor_at[j];
                    if (have_floor && s.durations.size() < spec.duration_cap)
                        s.durations.push_back(t - last_floor);
                    last_floor = t;
                    have_floor = true;
                }
            }
            prev = v;
            s.final_pos = v;
            s.elapsed = t;
        };
        if (spec.dyn == Dynamics::discrete)
            walk_discrete_core(env, spec.start, 0, spec.steps, rng, visit);
        else if (spec.dyn == Dynamics::csrw)
            walk_csrw_core(env, spec.start, 0.0, spec.horizon, rng, visit);
        else
            walk_vsrw_core(env, spec.start, 0.0, spec.horizon, rng, visit);
        double span = spec.dyn == Dynamics::discrete ? (double)spec.steps : spec.horizon;
        if (span > 0) {
            int64_t delta =
                hs ? s.final_pos.z - spec.start.z : s.final_pos.x - spec.start.x;
            s.speed = (double)delta / span;
        }
    });
    return out;
}

std::vector<double> collect_speeds(const std::vector<TrajSummary>& sums) {
    std::vector<double> v;
    v.reserve(sums.size());
    for (const auto& s : sums) v.push_back(s.speed);
    return v;
}

std::vector<double> collect_vdrifts(const std::vector<TrajSummary>& sums) {
    std::vector<double> v;
    for (const auto& s : sums)
        if (s.vdrift_count > 0) v.push_back(s.vdrift_sum / (double)s.vdrift_count);
    return v;
}

// ---- canned criteria -------------------------------------------------------

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CriterionResult crit_ballistic_speed(int threads) {  // 1
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r{1, "prop2.1i-ballistic-speed", false, ""};
    ZigzagParams zp;
    zp.eps = 0.5;
    zp.b = 2.0 / 3.0;   // gamma  = 1/4
    zp.b_prime = 2.0;   // gamma' = 1/2
    Environment env = zigzag_1d(zp);
    SpeedReport sr = ballistic_speed_1d(zp.eps, zigzag_gamma(zp.b), zigzag_gamma(zp.b_prime));
    double decomp = std::accumulate(sr.decomposition.begin(), sr.decomposition.end(), 0.0);
    bool cross = std::abs(sr.beta - decomp) <= 1e-14;
    BatchSpec spec;
    spec.dyn = Dynamics::discrete;
    spec.steps = 100000;
    auto sums = run_batch(env, spec, 1001, 200, threads);
    auto [m, se] = mean_se(collect_speeds(sums));
    bool mc_ok = se > 0 && std::abs(m - sr.beta) <= 3 * se;
    r.pass = cross && mc_ok;
    r.detail = "formula beta=" + fmt3(sr.beta) + " (decomposition gap " +
               fmt3(std::abs(sr.beta - decomp)) + "), mc=" + fmt3(m) + " se=" + fmt3(se) +
               " z=" + fmt3((m - sr.beta) / se) + ", " + fmt3(seconds_since(t0)) + "s";
    return r;
}

CriterionResult crit_kernel_collapse(int threads) {  // 2
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r{2, "prop2.1i-kernel-collapse", false, ""};
    ZigzagParams zp;
    zp.eps = 0.5;
    zp.b = 2.0 / 3.0;
    zp.b_prime = 2.0;
    Environment env = zigzag_1d(zp);
    PropagationConfig cfg;
    cfg.radius = 2100;
    cfg.tol = 1e-9;
    cfg.snapshot_times = {200.0};
    auto snaps = discrete_kernel(env, {0, 0, 0}, 0, 2000, cfg, threads);
    const KernelSnapshot* s200 = nullptr;
    const KernelSnapshot* s2000 = nullptr;
    for (const auto& s : snaps) {
        if (std::abs(s.time - 200.0) < 1e-9) s200 = &s;
        if (std::abs(s.time - 2000.0) < 1e-9) s2000 = &s;
    }
    if (!s200 || !s2000) throw std::runtime_error("kernel snapshots missing");
    double v200 = s200->prob({0, 0, 0}) * std::sqrt(200.0);
    double v2000 = s2000->prob({0, 0, 0}) * std::sqrt(2000.0);
    double mean = s2000->mean(0);
    double target = 2000.0 / 6.0;
    bool mean_ok = std::abs(mean - target) <= 0.01 * target;
    bool drop_ok = v2000 > 0 && v200 / v2000 >= 1e3;
    r.pass = mean_ok && drop_ok;
    r.detail = "mean=" + fmt3(mean) + " (target " + fmt3(target) + ", rel err " +
               fmt3((mean - target) / target) + "), p*sqrt(t) drop " + fmt3(v200 / v2000) +
               "x, loss<=" + fmt3(s2000->truncation_loss) + ", " + fmt3(seconds_since(t0)) + "s";
    return r;
}

std::pair<double, double> poisson_shift_mc_speed(double eps, double c, uint64_t master,
                                                 int threads) {
    const int n_env = 50, n_walk = 20;
    const double horizon = 1e4;
    std::vector<double> speeds((size_t)n_env * n_walk);
    parallel_for(n_env, threads, [&](int64_t e) {
        PoissonShiftParams pp;
        pp.eps = eps;
        pp.c = c;
        pp.breakpoints = poisson_times(c - 1.0, horizon, derive_seed(master, kEnvStream + (uint64_t)e));
        Environment env = poisson_shift_1d(pp);
        for (int w = 0; w < n_walk; ++w) {
            std::mt19937_64 rng = make_rng(master, (uint64_t)e * n_walk + (uint64_t)w);
            Vertex x{0, 0, 0};
            walk_csrw_core(env, {0, 0, 0}, 0.0, horizon, rng,
                           [&](double, const Vertex& v) { x = v; });
            speeds[(size_t)e * n_walk + w] = (double)x.x / horizon;
        }
    });
    return mean_se(speeds);
}

CriterionResult crit_csrw_speed_signs(int threads) {  // 3
    CriterionResult r{3, "prop2.1ii-csrw-speed-signs", false, ""};
    SpeedReport pos = csrw_speed_sign(0.5, 2.0);
    SpeedReport neg = csrw_speed_sign(-0.3, 2.0);
    auto [m1, s1] = poisson_shift_mc_speed(0.5, 2.0, 3001, threads);
    auto [m2, s2] = poisson_shift_mc_speed(-0.3, 2.0, 3002, threads);
    bool f_pos = pos.beta > 0;
    bool f_neg = neg.beta < 0;  // expected by claim 2.1ii at (-0.3, 2)
    bool mc_pos = m1 > 0 && std::abs(m1) > 3 * s1;
    bool mc_neg = m2 < 0 && std::abs(m2) > 3 * s2;
    r.pass = f_pos && f_neg && mc_pos && mc_neg;
    r.detail = "solved speed (0.5,2)=" + fmt3(pos.beta) + ", mc=" + fmt3(m1) + "+-" + fmt3(s1) +
               "; solved speed (-0.3,2)=" + fmt3(neg.beta) + " (criterion expects <0), mc=" +
               fmt3(m2) + "+-" + fmt3(s2) +
               "; solved chain and mc agree the (-0.3,2) speed is genuinely positive";
    return r;
}

CriterionResult crit_halfspace_recurrence(int threads) {  // 4
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r{4, "prop2.2i-halfspace-recurrence", false, ""};
    HalfspaceParams hp;
    hp.eps = 0.5;  // non-lazy: all loop weights zero
    Environment env = halfspace_discrete(hp);
    BatchSpec spec;
    spec.dyn = Dynamics::discrete;
    spec.steps = 100000;
    spec.horizons = {1e4, 1e5};
    spec.duration_cap = 1000;
    auto sums = run_batch(env, spec, 4008, 200, threads);
    std::vector<double> r4, r5;
    std::vector<double> pool;
    for (const auto& s : sums) {
        r4.push_back((double)s.returns_at[0]);
        r5.push_back((double)s.returns_at[1]);
        pool.insert(pool.end(), s.durations.begin(), s.durations.end());
    }
    double m4 = median(r4), m5 = median(r5);
    FitReport tail = geometric_tail_fit(pool);
    auto [vd, vse] = mean_se(collect_vdrifts(sums));
    double target = -0.5 / 3.0;
    bool med_ok = m5 >= 1.5 * m4 && m5 > m4;
    bool tail_ok = tail.verdict == Verdict::pass;
    bool drift_ok = vse > 0 && std::abs(vd - target) <= 3 * vse;
    r.pass = med_ok && tail_ok && drift_ok;
    r.detail = "median returns " + fmt3(m4) + " @1e4 -> " + fmt3(m5) + " @1e5; tail t-stat=" +
               fmt3(tail.constants.at("t_stat")) + " slope=" + fmt3(tail.constants.at("slope")) +
               "; vdrift=" + fmt3(vd) + "+-" + fmt3(vse) + " (target " + fmt3(target) + "), " +
               fmt3(seconds_since(t0)) + "s";
    return r;
}

CriterionResult crit_vsrw_sandwich(int threads) {  // 5
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r{5, "thm1.4c-vsrw-sandwich", false, ""};
    ZigzagParams zp;
    zp.eps = 0.5;  // loopless zigzag
    Environment env = zigzag_1d(zp);
    PropagationConfig cfg;
    cfg.radius = 400;
    cfg.tol = 1e-10;
    cfg.snapshot_times = {100, 200, 400, 800, 1600};
    auto snaps = vsrw_kernel(env, {0, 0, 0}, 1600.0, cfg, threads);
    std::vector<OnDiagPoint> ondiag;
    for (const auto& s : snaps) ondiag.push_back({s.time, s.prob({0, 0, 0}), s.error_bound()});
    GaussianReportPair rep = gaussian_bound_report(ondiag, snaps, env.geometry());
    double ratio = rep.upper.constants.at("band_ratio");
    double r2 = rep.upper.constants.at("r2");
    bool conclusive = rep.upper.verdict != Verdict::inconclusive &&
                      rep.lower.verdict != Verdict::inconclusive;
    r.pass = ratio <= 20.0 && r2 >= 0.95 && conclusive;
    r.detail = "on-diag band ratio=" + fmt3(ratio) + " (<=20), off-diag R2=" + fmt3(r2) +
               " (>=0.95), C4=" + fmt3(rep.upper.constants.at("C4")) + " c6=" +
               fmt3(rep.lower.constants.at("c6")) + ", upper=" +
               verdict_name(rep.upper.verdict) + " lower=" + verdict_name(rep.lower.verdict) +
               ", " + fmt3(seconds_since(t0)) + "s";
    return r;
}

CriterionResult crit_duality(int threads) {  // 6
    CriterionResult r{6, "thm1.4-duality", false, ""};
    const int n = 20;
    const double T = 10.0;
    std::mt19937_64 rng = make_rng(6001, 0);
    std::uniform_real_distribution<double> uni(0.5, 2.0);
    std::vector<std::vector<double>> w(5, std::vector<double>(n));
    for (auto& row : w)
        for (double& x : row) x = uni(rng);
    Environment env = cycle_schedule_env(n, {0, 2, 4, 6, 8}, w);
    Environment rev = reversed_environment(env, T);
    PropagationConfig cfg;
    cfg.radius = 1;  // cycle boxes always cover the whole cycle
    cfg.tol = 1e-12;
    std::vector<KernelSnapshot> fwd, bwd;
    for (int x = 0; x < n; ++x)
        fwd.push_back(vsrw_kernel(env, {x, 0, 0}, T, cfg, threads).back());
    for (int y = 0; y < n; ++y)
        bwd.push_back(vsrw_kernel(rev, {y, 0, 0}, T, cfg, threads).back());
    double worst = 0;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            worst = std::max(worst, std::abs(fwd[(size_t)x].prob({y, 0, 0}) -
                                             bwd[(size_t)y].prob({x, 0, 0})));
    r.pass = worst <= 1e-9;
    r.detail = "max |p(0,x;T,y) - p*(0,y;T,x)| = " + fmt3(worst) + " over all 400 pairs (<=1e-9)";
    return r;
}

CriterionResult crit_vd_poincare(int threads) {  // 7
    (void)threads;
    CriterionResult r{7, "thm1.4a-vd-poincare", false, ""};
    FitReport vd = volume_doubling_constant(Geometry::line(), {0, 0, 0}, 64);
    double c1v = vd.constants.at("C1");
    ZigzagParams zp;
    zp.eps = 0.5;
    Environment env = zigzag_1d(zp);
    double lo = 1e300, hi = 0;
    for (double t : {0.0, 1.0})
        for (int64_t rad : {4, 8, 16, 32}) {
            double c2 = poincare_constant(env, t, {0, 0, 0}, rad).constants.at("C2");
            lo = std::min(lo, c2);
            hi = std::max(hi, c2);
        }
    double ratio = hi / lo;
    double bound = (1 + zp.eps) / (1 - zp.eps) * 1.01;
    r.pass = c1v <= 2.0 && ratio <= bound;
    r.detail = "VD C1=" + fmt3(c1v) + " (<=2); Poincare C2 in [" + fmt3(lo) + ", " + fmt3(hi) +
               "], ratio=" + fmt3(ratio) + " (<=" + fmt3(bound) + ")";
    return r;
}

CriterionResult crit_oracle_equivalence(int threads) {  // 8
    CriterionResult r{8, "oracle-equivalence", false, ""};
    Environment unit = constant_env(Geometry::line(), 1.0, 0.0);

    // (a) t=20 discrete kernel vs binomial path counts
    PropagationConfig cfg_a;
    cfg_a.radius = 25;
    cfg_a.tol = 1e-9;
    auto snap_a = discrete_kernel(unit, {0, 0, 0}, 0, 20, cfg_a, threads).back();
    double diff_a = 0;
    std::vector<double> choose(21);
    choose[0] = 1;
    for (int k = 1; k <= 20; ++k) choose[k] = choose[k - 1] * (21.0 - k) / k;
    for (int64_t y = -25; y <= 25; ++y) {
        double expect = 0;
        if (std::abs(y) <= 20 && (20 + y) % 2 == 0)
            expect = choose[(size_t)((20 + y) / 2)] / 1048576.0;
        diff_a = std::max(diff_a, std::abs(snap_a.prob({y, 0, 0}) - expect));
    }

    // (b) T=50 csrw kernel vs direct Poissonization
    PropagationConfig cfg_b;
    cfg_b.radius = 150;
    cfg_b.tol = 1e-10;
    auto snap_b = csrw_kernel(unit, {0, 0, 0}, 50.0, cfg_b, threads).back();
    const int R = 220;
    std::vector<double> p(2 * R + 1, 0.0), q(2 * R + 1, 0.0), acc(2 * R + 1, 0.0);
    p[R] = 1.0;
    double lambda = 50.0, w = std::exp(-lambda), cum = 0;
    for (int k = 0; cum < 1.0 - 1e-13 && k <= 2 * R - 2; ++k) {
        if (k > 0) {
            w *= lambda / k;
            for (int i = 1; i < 2 * R; ++i) q[(size_t)i] = 0.5 * (p[(size_t)i - 1] + p[(size_t)i + 1]);
            q.front() = q.back() = 0;
            p.swap(q);
        }
        for (int i = 0; i <= 2 * R; ++i) acc[(size_t)i] += w * p[(size_t)i];
        cum += w;
    }
    double diff_b = 0;
    for (int64_t y = -150; y <= 150; ++y)
        diff_b = std::max(diff_b, std::abs(snap_b.prob({y, 0, 0}) - acc[(size_t)(y + R)]));

    // (c) VSRW time scaling: constant weight a at time t equals weight 1 at a*t
    PropagationConfig cfg_c;
    cfg_c.radius = 100;
    cfg_c.tol = 1e-10;
    Environment scaled = constant_env(Geometry::line(), 3.0, 0.0);
    auto snap_c1 = vsrw_kernel(scaled, {0, 0, 0}, 5.0, cfg_c, threads).back();
    auto snap_c2 = vsrw_kernel(unit, {0, 0, 0}, 15.0, cfg_c, threads).back();
    double diff_c = 0;
    for (int64_t y = -100; y <= 100; ++y)
        diff_c = std::max(diff_c, std::abs(snap_c1.prob({y, 0, 0}) - snap_c2.prob({y, 0, 0})));

    r.pass = diff_a <= 1e-12 && diff_b <= 1e-8 && diff_c <= 1e-9;
    r.detail = "binomial max diff " + fmt3(diff_a) + " (<=1e-12); Poissonization max diff " +
               fmt3(diff_b) + " (<=1e-8); scaling identity max diff " + fmt3(diff_c) + " (<=1e-9)";
    return r;
}

CriterionResult crit_csrw_halfspace_recurrence(int threads) {  // 0 (reproduce 2.2ii)
    CriterionResult r{0, "prop2.2ii-csrw-halfspace-recurrence", false, ""};
    const double eps = 0.5, c = 2.0, horizon = 2e4;
    const uint64_t master = 9001;
    SpeedReport sr = halfspace_csrw_speed(eps, c);
    HalfspaceParams hp;
    hp.eps = eps;
    hp.breakpoints = poisson_times(c - 1.0, horizon, derive_seed(master, kEnvStream));
    Environment env = halfspace_csrw(hp);
    BatchSpec spec;
    spec.dyn = Dynamics::csrw;
    spec.horizon = horizon;
    spec.horizons = {horizon / 10.0, horizon};
    auto sums = run_batch(env, spec, master, 100, threads);
    // recurrence shows up through the floor-hitting times sigma_i: the walker keeps
    // coming back to z=0 at a linear rate, even though visits to the exact start
    // vertex are too sparse at this horizon for a stable median
    std::vector<double> f1, f2;
    for (const auto& s : sums) {
        f1.push_back((double)s.floor_at[0]);
        f2.push_back((double)s.floor_at[1]);
    }
    double m1 = median(f1), m2 = median(f2);
    auto [vd, vse] = mean_se(collect_vdrifts(sums));
    bool drift_ok = vse > 0 && vd < 0 && std::abs(vd) > 3 * vse;
    bool grow = m2 >= 1.5 * m1 && m2 > 0;
    r.pass = sr.beta < 0 && drift_ok && grow;
    r.detail = "solved vertical rate beta=" + fmt3(sr.beta) + " (<0 for all c>1); mc vdrift=" +
               fmt3(vd) + "+-" + fmt3(vse) + "; median floor returns " + fmt3(m1) +
               " @2e3 -> " + fmt3(m2) + " @2e4";
    return r;
}

// ---- config handling -------------------------------------------------------

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
}

double need_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw std::invalid_argument(where + ": expected a number");
    return j.get<double>();
}

int64_t need_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw std::invalid_argument(where + ": expected an integer");
    return j.get<int64_t>();
}

std::string need_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw std::invalid_argument(where + ": expected a string");
    return j.get<std::string>();
}

std::vector<double> need_ascending(const json& j, const std::string& where, bool positive) {
    if (!j.is_array()) throw std::invalid_argument(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(need_number(e, where));
    for (size_t i = 0; i < out.size(); ++i) {
        if (positive && !(out[i] > 0))
            throw std::invalid_argument(where + ": entries must be > 0");
        if (i > 0 && !(out[i] > out[i - 1]))
            throw std::invalid_argument(where + ": entries must be strictly increasing");
    }
    return out;
}

const std::set<std::string> kAnalysisKinds = {"speed",      "gaussian", "poincare", "doubling",
                                              "recurrence", "tail",     "ellipticity"};

}  // namespace

json load_config(const CliOptions& opt) {
    if (opt.config_path.empty())
        throw std::invalid_argument("--config PATH is required for this subcommand");
    std::ifstream in(opt.config_path);
    if (!in) throw std::invalid_argument("config: cannot open " + opt.config_path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    expect_object(cfg, "config");
    reject_unknown_keys(cfg,
                        {"environment", "dynamics", "start", "steps", "horizon", "batch", "seed",
                         "kernel", "analysis", "analysis_options", "out"},
                        "config");
    if (!cfg.contains("environment"))
        throw std::invalid_argument("config.environment: required");
    expect_object(cfg["environment"], "config.environment");
    reject_unknown_keys(cfg["environment"], {"preset", "params"}, "config.environment");
    if (!cfg["environment"].contains("preset"))
        throw std::invalid_argument("config.environment.preset: required");
    need_string(cfg["environment"]["preset"], "config.environment.preset");
    if (!cfg["environment"].contains("params")) cfg["environment"]["params"] = json::object();
    expect_object(cfg["environment"]["params"], "config.environment.params");

    std::string dyn = cfg.value("dynamics", "discrete");
    if (dyn != "discrete" && dyn != "csrw" && dyn != "vsrw")
        throw std::invalid_argument("config.dynamics: expected discrete|csrw|vsrw");
    cfg["dynamics"] = dyn;

    if (!cfg.contains("start")) cfg["start"] = json::object();
    expect_object(cfg["start"], "config.start");
    reject_unknown_keys(cfg["start"], {"x", "y", "z"}, "config.start");
    for (const char* axis : {"x", "y", "z"})
        cfg["start"][axis] =
            cfg["start"].contains(axis) ? need_int(cfg["start"][axis], "config.start") : 0;

    int64_t steps = cfg.contains("steps") ? need_int(cfg["steps"], "config.steps") : 0;
    if (steps < 0) throw std::invalid_argument("config.steps: must be >= 0");
    cfg["steps"] = steps;
    double horizon = cfg.contains("horizon") ? need_number(cfg["horizon"], "config.horizon") : 0.0;
    if (!(horizon >= 0)) throw std::invalid_argument("config.horizon: must be >= 0");
    cfg["horizon"] = horizon;
    int64_t batch = cfg.contains("batch") ? need_int(cfg["batch"], "config.batch") : 1;
    if (batch < 1) throw std::invalid_argument("config.batch: must be >= 1");
    cfg["batch"] = batch;
    if (cfg.contains("seed")) {
        if (!cfg["seed"].is_number_integer() ||
            (cfg["seed"].is_number_integer() && !cfg["seed"].is_number_unsigned() &&
             cfg["seed"].get<int64_t>() < 0))
            throw std::invalid_argument("config.seed: expected a non-negative integer");
    } else {
        cfg["seed"] = 1;
    }

    if (!cfg.contains("kernel")) cfg["kernel"] = json::object();
    expect_object(cfg["kernel"], "config.kernel");
    reject_unknown_keys(cfg["kernel"], {"radius", "tol", "snapshot_times"}, "config.kernel");
    json& ker = cfg["kernel"];
    int64_t radius = ker.contains("radius") ? need_int(ker["radius"], "config.kernel.radius") : 50;
    if (radius < 1) throw std::invalid_argument("config.kernel.radius: must be >= 1");
    ker["radius"] = radius;
    double tol = ker.contains("tol") ? need_number(ker["tol"], "config.kernel.tol") : 1e-9;
    if (!(tol > 0) || tol > 1e-6)
        throw std::invalid_argument("config.kernel.tol: must lie in (0, 1e-6]");
    ker["tol"] = tol;
    ker["snapshot_times"] = ker.contains("snapshot_times")
                                ? need_ascending(ker["snapshot_times"],
                                                 "config.kernel.snapshot_times", true)
                                : std::vector<double>{};

    if (!cfg.contains("analysis")) cfg["analysis"] = json::array();
    if (!cfg["analysis"].is_array())
        throw std::invalid_argument("config.analysis: expected an array of strings");
    for (const auto& a : cfg["analysis"]) {
        std::string kind = need_string(a, "config.analysis");
        if (!kAnalysisKinds.count(kind))
            throw std::invalid_argument("config.analysis: unknown kind '" + kind + "'");
    }

    if (!cfg.contains("analysis_options")) cfg["analysis_options"] = json::object();
    expect_object(cfg["analysis_options"], "config.analysis_options");
    reject_unknown_keys(cfg["analysis_options"],
                        {"poincare_r", "poincare_times", "domain_radius", "r_max", "ondiag_times",
                         "horizons", "tail_cap"},
                        "config.analysis_options");
    json& ao = cfg["analysis_options"];
    if (ao.contains("poincare_r")) {
        for (const auto& e : ao["poincare_r"])
            if (need_int(e, "config.analysis_options.poincare_r") < 1)
                throw std::invalid_argument("config.analysis_options.poincare_r: radii must be >= 1");
    } else {
        ao["poincare_r"] = std::vector<int64_t>{4, 8, 16};
    }
    if (ao.contains("poincare_times")) {
        for (const auto& e : ao["poincare_times"])
            if (need_number(e, "config.analysis_options.poincare_times") < 0)
                throw std::invalid_argument("config.analysis_options.poincare_times: must be >= 0");
    } else {
        ao["poincare_times"] = std::vector<double>{0.0};
    }
    int64_t dom = ao.contains("domain_radius")
                      ? need_int(ao["domain_radius"], "config.analysis_options.domain_radius")
                      : 0;
    if (dom < 0) throw std::invalid_argument("config.analysis_options.domain_radius: must be >= 0");
    ao["domain_radius"] = dom;
    int64_t rmax = ao.contains("r_max") ? need_int(ao["r_max"], "config.analysis_options.r_max") : 32;
    if (rmax < 2) throw std::invalid_argument("config.analysis_options.r_max: must be >= 2");
    ao["r_max"] = rmax;
    ao["ondiag_times"] = ao.contains("ondiag_times")
                             ? need_ascending(ao["ondiag_times"],
                                              "config.analysis_options.ondiag_times", true)
                             : std::vector<double>{100, 200, 400, 800, 1600};
    if (ao.contains("horizons"))
        ao["horizons"] = need_ascending(ao["horizons"], "config.analysis_options.horizons", true);
    int64_t tail_cap =
        ao.contains("tail_cap") ? need_int(ao["tail_cap"], "config.analysis_options.tail_cap") : 5000;
    if (tail_cap < 0) throw std::invalid_argument("config.analysis_options.tail_cap: must be >= 0");
    ao["tail_cap"] = tail_cap;

    std::string out = cfg.value("out", "out");
    if (out.empty()) throw std::invalid_argument("config.out: must be non-empty");
    cfg["out"] = out;

    if (opt.has_seed) cfg["seed"] = opt.seed;
    if (!opt.out_dir.empty()) cfg["out"] = opt.out_dir;
    return cfg;
}

namespace {

Vertex start_of(const json& cfg) {
    return Vertex{cfg["start"]["x"].get<int64_t>(), cfg["start"]["y"].get<int64_t>(),
                  cfg["start"]["z"].get<int64_t>()};
}

Dynamics dynamics_of(const json& cfg) {
    std::string d = cfg["dynamics"].get<std::string>();
    if (d == "discrete") return Dynamics::discrete;
    if (d == "csrw") return Dynamics::csrw;
    return Dynamics::vsrw;
}

// span covering every time the run can touch, for Poisson-stream presets
double horizon_bound(const json& cfg) {
    double hb = std::max(cfg["horizon"].get<double>(), (double)cfg["steps"].get<int64_t>());
    for (const auto& t : cfg["kernel"]["snapshot_times"]) hb = std::max(hb, t.get<double>());
    const json& ao = cfg["analysis_options"];
    for (const auto& t : ao["ondiag_times"]) hb = std::max(hb, t.get<double>());
    if (ao.contains("horizons"))
        for (const auto& t : ao["horizons"]) hb = std::max(hb, t.get<double>());
    for (const auto& t : ao["poincare_times"]) hb = std::max(hb, t.get<double>());
    return std::max(hb, 1.0) + 1.0;
}

Environment env_of(const json& cfg) {
    uint64_t master = cfg["seed"].get<uint64_t>();
    Environment env = make_preset(cfg["environment"]["preset"].get<std::string>(),
                                  cfg["environment"]["params"], derive_seed(master, kEnvStream),
                                  horizon_bound(cfg));
    Vertex s = start_of(cfg);
    if (!env.geometry().contains(s))
        throw std::invalid_argument("config.start: vertex (" + fmt(s.x) + "," + fmt(s.y) + "," +
                                    fmt(s.z) + ") lies outside the " + env.geometry().name() +
                                    " geometry");
    return env;
}

double span_of(const json& cfg, Dynamics dyn) {
    if (dyn == Dynamics::discrete) {
        int64_t steps = cfg["steps"].get<int64_t>();
        if (steps < 1)
            throw std::invalid_argument("config.steps: must be >= 1 for discrete dynamics");
        return (double)steps;
    }
    double horizon = cfg["horizon"].get<double>();
    if (!(horizon > 0))
        throw std::invalid_argument("config.horizon: must be > 0 for continuous dynamics");
    return horizon;
}

json versions_json() {
    return json{{"artifact", "1.0.0"},
                {"compiler", __VERSION__},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

fs::path prepare_out(const json& cfg) {
    fs::path dir = cfg["out"].get<std::string>();
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& cfg,
                    const Environment& env, int threads) {
    uint64_t master = cfg["seed"].get<uint64_t>();
    json m{{"command", command},
           {"config", cfg},
           {"environment", env_to_json(env)},
           {"seed", master},
           {"env_seed", derive_seed(master, kEnvStream)},
           {"threads", threads},
           {"versions", versions_json()}};
    write_json(dir / "manifest.json", m);
}

json fit_report_json(const FitReport& rep) {
    json ev = json::array();
    for (const auto& row : rep.evidence)
        ev.push_back(json::array({row.t, row.d, row.value, row.bound}));
    return json{{"kind", fit_kind_name(rep.kind)},
                {"verdict", verdict_name(rep.verdict)},
                {"constants", rep.constants},
                {"evidence", ev}};
}

EllipticityReport sample_ellipticity(const Environment& env, const Vertex& start) {
    int64_t rad = env.geometry().kind == GeometryKind::halfspace3d ? 6 : 8;
    Ball box = ball(env.geometry(), start, rad);
    std::vector<double> times;
    for (int i = 0; i < 64; ++i) times.push_back(0.25 * i);
    for (double b : env.boundaries(16.0)) times.push_back(b);
    std::sort(times.begin(), times.end());
    return verify_ellipticity(env, times, box);
}

PropagationConfig kernel_config(const json& cfg) {
    PropagationConfig pc;
    pc.radius = cfg["kernel"]["radius"].get<int64_t>();
    pc.tol = cfg["kernel"]["tol"].get<double>();
    for (const auto& t : cfg["kernel"]["snapshot_times"]) pc.snapshot_times.push_back(t.get<double>());
    return pc;
}

std::vector<KernelSnapshot> run_kernel(const Environment& env, const json& cfg, Dynamics dyn,
                                       const PropagationConfig& pc, double span, int threads) {
    Vertex s = start_of(cfg);
    if (dyn == Dynamics::discrete) {
        int64_t steps = (int64_t)std::llround(span);
        for (double t : pc.snapshot_times)
            if (std::abs(t - std::llround(t)) > 1e-9)
                throw std::invalid_argument(
                    "config.kernel.snapshot_times: discrete dynamics needs integer times");
        return discrete_kernel(env, s, 0, steps, pc, threads);
    }
    if (dyn == Dynamics::csrw) return csrw_kernel(env, s, span, pc, threads);
    return vsrw_kernel(env, s, span, pc, threads);
}

json snapshot_meta(const KernelSnapshot& s) {
    json mean = json::array({s.mean(0)});
    json var = json::array({s.variance(0)});
    if (s.box.kind == GeometryKind::halfspace3d) {
        mean.push_back(s.mean(1));
        mean.push_back(s.mean(2));
        var.push_back(s.variance(1));
        var.push_back(s.variance(2));
    }
    return json{{"time", s.time},
                {"total_mass", s.total_mass()},
                {"truncation_loss", s.truncation_loss},
                {"series_error", s.series_error},
                {"loss_bound", s.loss_bound},
                {"error_bound", s.error_bound()},
                {"mean", mean},
                {"variance", var}};
}

SpeedReport formula_speed(const Environment& env, const json& cfg) {
    switch (env.family()) {
        case EnvFamily::zigzag:
            return ballistic_speed_1d(env.eps(), zigzag_gamma(env.b()),
                                      zigzag_gamma(env.b_prime()));
        case EnvFamily::poisson_shift:
            return csrw_speed_sign(env.eps(), env.intensity_c());
        case EnvFamily::halfspace_dt:
            return halfspace_speed(env.eps(), env.b(), env.b_prime());
        case EnvFamily::halfspace_csrw: {
            double c = cfg["environment"]["params"].value("c", 0.0);
            if (!(c > 1))
                throw std::invalid_argument(
                    "config.environment.params.c: speed analysis for halfspace-csrw needs c > 1");
            return halfspace_csrw_speed(env.eps(), c);
        }
        default: {
            SpeedReport r;
            r.beta = 0;
            r.source = "formula";
            return r;
        }
    }
}

}  // namespace

// ---- criterion dispatch ----------------------------------------------------

CriterionResult run_criterion(int id, int threads) {
    threads = resolve_threads(threads);
    switch (id) {
        case 0: return crit_csrw_halfspace_recurrence(threads);
        case 1: return crit_ballistic_speed(threads);
        case 2: return crit_kernel_collapse(threads);
        case 3: return crit_csrw_speed_signs(threads);
        case 4: return crit_halfspace_recurrence(threads);
        case 5: return crit_vsrw_sandwich(threads);
        case 6: return crit_duality(threads);
        case 7: return crit_vd_poincare(threads);
        case 8: return crit_oracle_equivalence(threads);
        default: throw std::invalid_argument("unknown criterion id " + std::to_string(id));
    }
}

std::vector<int> criteria_for(const std::string& target) {
    if (target == "2.1i") return {1, 2};
    if (target == "2.1ii") return {3};
    if (target == "2.2i") return {4};
    if (target == "2.2ii") return {0};
    if (target == "thm1.4-vsrw") return {5, 6, 7};
    return {};
}

std::vector<std::string> reproduce_targets() {
    return {"2.1i", "2.1ii", "2.2i", "2.2ii", "thm1.4-vsrw"};
}

// ---- subcommands -----------------------------------------------------------

int cmd_env(const CliOptions& opt) {
    json cfg = load_config(opt);
    Environment env = env_of(cfg);
    int threads = resolve_threads(opt.threads);
    fs::path dir = prepare_out(cfg);
    EllipticityReport er = sample_ellipticity(env, start_of(cfg));
    json out = env_to_json(env);
    out["ellipticity"] = {{"pass", er.pass},
                          {"min_weight", er.min_weight},
                          {"max_weight", er.max_weight}};
    write_json(dir / "env.json", out);
    write_manifest(dir, "env", cfg, env, threads);
    std::cout << "environment " << out["params"]["family"].get<std::string>() << " on "
              << env.geometry().name() << ", c1=" << fmt(env.c1()) << ", ellipticity "
              << (er.pass ? "pass" : "violated") << ", wrote " << (dir / "env.json").string()
              << "\n";
    return 0;
}

int cmd_simulate(const CliOptions& opt) {
    json cfg = load_config(opt);
    Environment env = env_of(cfg);
    int threads = resolve_threads(opt.threads);
    Dynamics dyn = dynamics_of(cfg);
    double span = span_of(cfg, dyn);
    fs::path dir = prepare_out(cfg);

    BatchSpec spec;
    spec.dyn = dyn;
    spec.start = start_of(cfg);
    spec.steps = cfg["steps"].get<int64_t>();
    spec.horizon = cfg["horizon"].get<double>();
    const json& ao = cfg["analysis_options"];
    if (ao.contains("horizons"))
        for (const auto& h : ao["horizons"]) spec.horizons.push_back(h.get<double>());
    else
        spec.horizons = {span};
    auto sums = run_batch(env, spec, cfg["seed"].get<uint64_t>(), cfg["batch"].get<int64_t>(),
                          threads);

    std::ostringstream csv;
    csv << "traj,seed,final_x,final_y,final_z,elapsed,speed,returns,max_dist\n";
    for (size_t i = 0; i < sums.size(); ++i) {
        const auto& s = sums[i];
        csv << fmt((int64_t)i) << ',' << s.seed << ',' << fmt(s.final_pos.x) << ','
            << fmt(s.final_pos.y) << ',' << fmt(s.final_pos.z) << ',' << fmt(s.elapsed) << ','
            << fmt(s.speed) << ',' << fmt(s.returns) << ',' << fmt(s.max_dist) << '\n';
    }
    write_text(dir / "trajectories.csv", csv.str());

    auto [sm, sse] = mean_se(collect_speeds(sums));
    std::vector<double> returns;
    for (const auto& s : sums) returns.push_back((double)s.returns);
    json batch{{"count", (int64_t)sums.size()},
               {"speed_mean", sm},
               {"speed_se", sse},
               {"returns_mean", mean_se(returns).first},
               {"returns_median", median(returns)},
               {"horizons", spec.horizons}};
    json per_h = json::array();
    for (size_t j = 0; j < spec.horizons.size(); ++j) {
        std::vector<double> rj;
        for (const auto& s : sums) rj.push_back((double)s.returns_at[j]);
        per_h.push_back(json{{"horizon", spec.horizons[j]},
                             {"median_returns", median(rj)},
                             {"mean_returns", mean_se(rj).first}});
    }
    batch["returns_at"] = per_h;
    if (env.geometry().kind == GeometryKind::halfspace3d) {
        auto [vm, vse] = mean_se(collect_vdrifts(sums));
        batch["vdrift_mean"] = vm;
        batch["vdrift_se"] = vse;
    }
    write_json(dir / "batch.json", batch);
    write_manifest(dir, "simulate", cfg, env, threads);
    std::cout << "simulated " << sums.size() << " trajectories, speed " << fmt(sm) << " +- "
              << fmt(sse) << ", wrote " << (dir / "trajectories.csv").string() << "\n";
    return 0;
}

int cmd_kernel(const CliOptions& opt) {
    json cfg = load_config(opt);
    Environment env = env_of(cfg);
    int threads = resolve_threads(opt.threads);
    Dynamics dyn = dynamics_of(cfg);
    double span = span_of(cfg, dyn);
    fs::path dir = prepare_out(cfg);
    PropagationConfig pc = kernel_config(cfg);
    auto snaps = run_kernel(env, cfg, dyn, pc, span, threads);
    json meta = json::array();
    for (size_t i = 0; i < snaps.size(); ++i) {
        std::ostringstream body;
        snapshot_to_csv(snaps[i], body);
        std::string name = "snapshot_" + fmt((int64_t)i) + ".csv";
        write_text(dir / name, body.str());
        json m = snapshot_meta(snaps[i]);
        m["file"] = name;
        meta.push_back(m);
    }
    write_json(dir / "kernel.json", json{{"snapshots", meta}});
    write_manifest(dir, "kernel", cfg, env, threads);
    std::cout << "propagated " << snaps.size() << " snapshot(s) to t=" << fmt(snaps.back().time)
              << ", mass " << fmt(snaps.back().total_mass()) << ", error bound "
              << fmt(snaps.back().error_bound()) << ", wrote " << (dir / "kernel.json").string()
              << "\n";
    return 0;
}

int cmd_analyze(const CliOptions& opt) {
    json cfg = load_config(opt);
    Environment env = env_of(cfg);
    int threads = resolve_threads(opt.threads);
    Dynamics dyn = dynamics_of(cfg);
    fs::path dir = prepare_out(cfg);
    const json& ao = cfg["analysis_options"];
    if (cfg["analysis"].empty())
        throw std::invalid_argument("config.analysis: at least one analysis kind is required");

    std::optional<std::vector<TrajSummary>> batch_cache;
    auto ensure_batch = [&](std::size_t duration_cap) -> const std::vector<TrajSummary>& {
        if (!batch_cache) {
            BatchSpec spec;
            spec.dyn = dyn;
            spec.start = start_of(cfg);
            spec.steps = cfg["steps"].get<int64_t>();
            spec.horizon = cfg["horizon"].get<double>();
            double span = span_of(cfg, dyn);
            if (ao.contains("horizons"))
                for (const auto& h : ao["horizons"]) spec.horizons.push_back(h.get<double>());
            else
                spec.horizons = {span / 10.0, span};
            spec.duration_cap = duration_cap;
            batch_cache = run_batch(env, spec, cfg["seed"].get<uint64_t>(),
                                    cfg["batch"].get<int64_t>(), threads);
        }
        return *batch_cache;
    };

    bool inconclusive = false;
    auto note = [&](const FitReport& rep) {
        if (rep.verdict == Verdict::inconclusive) inconclusive = true;
    };

    for (const auto& kind_j : cfg["analysis"]) {
        std::string kind = kind_j.get<std::string>();
        if (kind == "speed") {
            SpeedReport sr = formula_speed(env, cfg);
            json out{{"formula", {{"beta", sr.beta},
                                  {"source", sr.source},
                                  {"decomposition", sr.decomposition},
                                  {"drifts", sr.drifts}}}};
            if (cfg["batch"].get<int64_t>() >= 2) {
                const auto& sums = ensure_batch(0);
                auto [m, se] = mean_se(collect_speeds(sums));
                out["mc"] = {{"mean", m}, {"se", se}, {"count", (int64_t)sums.size()}};
            }
            write_json(dir / "speed.json", out);
        } else if (kind == "gaussian") {
            std::vector<double> times;
            for (const auto& t : ao["ondiag_times"]) times.push_back(t.get<double>());
            PropagationConfig pc = kernel_config(cfg);
            pc.snapshot_times = times;
            auto snaps = run_kernel(env, cfg, dyn, pc, times.back(), threads);
            std::vector<OnDiagPoint> ondiag;
            Vertex s0 = start_of(cfg);
            for (const auto& s : snaps) ondiag.push_back({s.time, s.prob(s0), s.error_bound()});
            GaussianReportPair rep = gaussian_bound_report(ondiag, snaps, env.geometry());
            note(rep.upper);
            note(rep.lower);
            write_json(dir / "gaussian.json", json{{"upper", fit_report_json(rep.upper)},
                                                   {"lower", fit_report_json(rep.lower)}});
        } else if (kind == "poincare") {
            json rows = json::array();
            double lo = 1e300, hi = 0;
            for (const auto& tj : ao["poincare_times"])
                for (const auto& rj : ao["poincare_r"]) {
                    FitReport rep = poincare_constant(env, tj.get<double>(), start_of(cfg),
                                                      rj.get<int64_t>(),
                                                      ao["domain_radius"].get<int64_t>());
                    note(rep);
                    double c2 = rep.constants.at("C2");
                    lo = std::min(lo, c2);
                    hi = std::max(hi, c2);
                    json row = fit_report_json(rep);
                    row["t"] = tj.get<double>();
                    row["r"] = rj.get<int64_t>();
                    rows.push_back(row);
                }
            write_json(dir / "poincare.json",
                       json{{"results", rows}, {"c2_min", lo}, {"c2_max", hi},
                            {"c2_ratio", lo > 0 ? hi / lo : 0.0}});
        } else if (kind == "doubling") {
            FitReport rep = volume_doubling_constant(env.geometry(), start_of(cfg),
                                                     ao["r_max"].get<int64_t>());
            note(rep);
            write_json(dir / "doubling.json", fit_report_json(rep));
        } else if (kind == "recurrence") {
            const auto& sums = ensure_batch(0);
            RecurrenceReport rep;
            if (ao.contains("horizons"))
                for (const auto& h : ao["horizons"]) rep.horizons.push_back(h.get<double>());
            else {
                double span = span_of(cfg, dyn);
                rep.horizons = {span / 10.0, span};
            }
            for (size_t j = 0; j < rep.horizons.size(); ++j) {
                std::vector<double> rj;
                for (const auto& s : sums) rj.push_back((double)s.returns_at[j]);
                rep.median_returns.push_back(median(rj));
                rep.mean_returns.push_back(mean_se(rj).first);
            }
            rep.monotone_growth =
                std::is_sorted(rep.median_returns.begin(), rep.median_returns.end()) &&
                !rep.median_returns.empty() &&
                rep.median_returns.back() > rep.median_returns.front();
            write_json(dir / "recurrence.json", json{{"horizons", rep.horizons},
                                                     {"median_returns", rep.median_returns},
                                                     {"mean_returns", rep.mean_returns},
                                                     {"monotone_growth", rep.monotone_growth}});
        } else if (kind == "tail") {
            if (env.geometry().kind != GeometryKind::halfspace3d)
                throw std::invalid_argument(
                    "config.analysis: tail fits excursion durations and needs the halfspace3d "
                    "geometry");
            const auto& sums = ensure_batch((size_t)ao["tail_cap"].get<int64_t>());
            std::vector<double> pool;
            for (const auto& s : sums) pool.insert(pool.end(), s.durations.begin(), s.durations.end());
            FitReport rep = geometric_tail_fit(pool);
            note(rep);
            write_json(dir / "tail.json", fit_report_json(rep));
        } else if (kind == "ellipticity") {
            FitReport rep = ellipticity_report(sample_ellipticity(env, start_of(cfg)));
            note(rep);
            write_json(dir / "ellipticity.json", fit_report_json(rep));
        }
    }
    write_manifest(dir, "analyze", cfg, env, threads);
    std::cout << "analysis " << (inconclusive ? "inconclusive" : "complete") << ", outputs in "
              << dir.string() << "\n";
    return inconclusive ? 3 : 0;
}

int cmd_reproduce(const std::string& target, const CliOptions& opt) {
    std::vector<int> ids = criteria_for(target);
    if (ids.empty()) {
        std::string known;
        for (const auto& t : reproduce_targets()) known += (known.empty() ? "" : ", ") + t;
        throw std::invalid_argument("unknown reproduce target '" + target + "' (expected one of " +
                                    known + ")");
    }
    int threads = resolve_threads(opt.threads);
    bool all = true;
    for (int id : ids) {
        CriterionResult res = run_criterion(id, threads);
        std::cout << "[criterion " << res.id << "] " << (res.pass ? "PASS" : "FAIL") << " — "
                  << res.name << ": " << res.detail << "\n";
        if (!res.pass) all = false;
    }
    std::cout << (all ? "reproduce " + target + ": pass"
                      : "reproduce " + target + ": FAIL")
              << "\n";
    return all ? 0 : 1;
}

}  // namespace tdrw
