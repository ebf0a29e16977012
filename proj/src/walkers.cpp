#include "tdrw/walkers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdrw {

Trajectory simulate_discrete(const Environment& env, const Vertex& x0, int64_t t0, int64_t steps,
                             uint64_t seed) {
    if (t0 < 0 || steps < 0) throw std::invalid_argument("simulate_discrete: t0, steps must be >= 0");
    Trajectory traj;
    traj.dynamics = Dynamics::discrete;
    traj.geom = env.geometry().kind;
    traj.start = x0;
    traj.t0 = (double)t0;
    traj.seed = seed;
    traj.events.reserve((size_t)steps + 1);
    traj.events.emplace_back((double)t0, x0);
    std::mt19937_64 rng(seed);
    walk_discrete_core(env, x0, t0, steps, rng,
                       [&](double t, const Vertex& v) { traj.events.emplace_back(t, v); });
    return traj;
}

Trajectory simulate_csrw(const Environment& env, const Vertex& x0, double t0, double horizon,
                         uint64_t seed) {
    if (t0 < 0 || horizon < 0) throw std::invalid_argument("simulate_csrw: t0, horizon must be >= 0");
    Trajectory traj;
    traj.dynamics = Dynamics::csrw;
    traj.geom = env.geometry().kind;
    traj.start = x0;
    traj.t0 = t0;
    traj.seed = seed;
    traj.events.emplace_back(t0, x0);
    std::mt19937_64 rng(seed);
    walk_csrw_core(env, x0, t0, horizon, rng,
                   [&](double t, const Vertex& v) { traj.events.emplace_back(t, v); });
    return traj;
}

Trajectory simulate_vsrw(const Environment& env, const Vertex& x0, double t0, double horizon,
                         uint64_t seed, VsrwStats* stats) {
    if (t0 < 0 || horizon < 0) throw std::invalid_argument("simulate_vsrw: t0, horizon must be >= 0");
    Trajectory traj;
    traj.dynamics = Dynamics::vsrw;
    traj.geom = env.geometry().kind;
    traj.start = x0;
    traj.t0 = t0;
    traj.seed = seed;
    traj.events.emplace_back(t0, x0);
    std::mt19937_64 rng(seed);
    walk_vsrw_core(
        env, x0, t0, horizon, rng,
        [&](double t, const Vertex& v) { traj.events.emplace_back(t, v); }, stats);
    return traj;
}

std::string state_label(const Environment& env, double t, const Vertex& v) {
    switch (env.family()) {
        case EnvFamily::zigzag: {
            int64_t m = env.segment_of(t);
            return ((m + v.x) % 2 + 2) % 2 == 0 ? "A+" : "A-";
        }
        case EnvFamily::halfspace_dt: {
            int64_t m = env.segment_of(t);
            return ((m + v.x + v.y + v.z) % 2 + 2) % 2 == 1 ? "A+" : "A-";
        }
        case EnvFamily::poisson_shift: {
            int64_t k = env.segment_of(t);
            switch (((v.x - k) % 3 + 3) % 3) {
                case 0: return "A1";
                case 1: return "A2";
                default: return "A3";
            }
        }
        case EnvFamily::halfspace_csrw: {
            int64_t n = env.segment_of(t);
            return ((n + v.z) % 2 + 2) % 2 == 1 ? "A+" : "A-";
        }
        default:
            throw std::domain_error("state_label: unsupported environment family");
    }
}

StateTrace classify_states(const Environment& env, const Trajectory& traj) {
    StateTrace trace;
    trace.labels.reserve(traj.events.size());
    std::string prev;
    for (const auto& [t, v] : traj.events) {
        std::string lab = state_label(env, t, v);
        trace.occupation[lab]++;
        if (!prev.empty() && lab != prev) trace.change_times.push_back(t);
        prev = lab;
        trace.labels.emplace_back(t, std::move(lab));
    }
    return trace;
}

ExcursionRecord excursions(const Trajectory& traj) {
    if (traj.events.empty()) throw std::invalid_argument("excursions: empty trajectory");
    if (traj.events.front().second.z != 0)
        throw std::invalid_argument("excursions: trajectory must start on the floor");
    ExcursionRecord rec;
    rec.vertical.reserve(traj.events.size());
    for (const auto& [t, v] : traj.events) {
        rec.vertical.push_back(v.z);
        if (v.z == 0) {
            rec.sigma.push_back(t);
            rec.floor_xy.push_back({v.x, v.y});
        }
    }
    return rec;
}

BatchStats trajectory_stats(const std::vector<Trajectory>& trajs) {
    if (trajs.empty()) throw std::domain_error("trajectory_stats: empty batch");
    for (const auto& t : trajs)
        if (t.dynamics != trajs.front().dynamics)
            throw std::invalid_argument("trajectory_stats: mixed dynamics in batch");
    BatchStats out;
    out.count = trajs.size();
    std::vector<double> speeds, vdrifts;
    for (const auto& traj : trajs) {
        const auto& ev = traj.events;
        double elapsed = ev.back().first - traj.t0;
        bool half = traj.geom == GeometryKind::halfspace3d;
        double disp = half ? double(ev.back().second.z - traj.start.z)
                           : double(ev.back().second.x - traj.start.x);
        if (elapsed > 0) speeds.push_back(disp / elapsed);
        int64_t ret = 0, maxd = 0;
        double vnum = 0, vcnt = 0;
        for (size_t i = 1; i < ev.size(); ++i) {
            const Vertex& v = ev[i].second;
            if (v == traj.start) ret++;
            int64_t d = std::abs(v.x - traj.start.x) + std::abs(v.y - traj.start.y) +
                        std::abs(v.z - traj.start.z);
            maxd = std::max(maxd, d);
            if (ev[i - 1].second.z > 0) {
                vnum += double(v.z - ev[i - 1].second.z);
                vcnt += 1;
            }
        }
        if (vcnt > 0) vdrifts.push_back(vnum / vcnt);
        out.returns.push_back(ret);
        out.max_excursion = std::max(out.max_excursion, maxd);
    }
    auto mean_se = [](const std::vector<double>& xs, double& m, double& se) {
        if (xs.empty()) return;
        double s = 0;
        for (double x : xs) s += x;
        m = s / xs.size();
        double v = 0;
        for (double x : xs) v += (x - m) * (x - m);
        se = xs.size() > 1 ? std::sqrt(v / (xs.size() - 1) / xs.size()) : 0;
    };
    mean_se(speeds, out.speed_mean, out.speed_se);
    mean_se(vdrifts, out.vdrift_mean, out.vdrift_se);
    double rsum = 0;
    for (auto r : out.returns) rsum += (double)r;
    out.returns_mean = rsum / out.returns.size();
    return out;
}

}  // namespace tdrw
