#pragma once
// Trajectory sampling for the three dynamics, plus state classification,
// excursion extraction and batch statistics. The stepping cores are templates
// over an observer so large batches can stream without storing paths.

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tdrw/environment.hpp"
#include "tdrw/geometry.hpp"

namespace tdrw {

enum class Dynamics { discrete, csrw, vsrw };

struct Trajectory {
    Dynamics dynamics = Dynamics::discrete;
    GeometryKind geom = GeometryKind::line;
    Vertex start;
    double t0 = 0;
    uint64_t seed = 0;
    std::vector<std::pair<double, Vertex>> events;  // first entry is (t0, start)
};

struct StateTrace {
    std::vector<std::pair<double, std::string>> labels;  // one per trajectory event
    std::map<std::string, int64_t> occupation;           // N_t per label
    std::vector<double> change_times;                    // T_k
};

struct ExcursionRecord {
    std::vector<double> sigma;                     // floor-return times, sigma_0 = t0
    std::vector<std::array<int64_t, 2>> floor_xy;  // M_n: horizontal position at sigma_n
    std::vector<int64_t> vertical;                 // R_t: z coordinate per event
    std::vector<double> durations() const {
        std::vector<double> d;
        for (size_t i = 1; i < sigma.size(); ++i) d.push_back(sigma[i] - sigma[i - 1]);
        return d;
    }
    std::vector<std::array<int64_t, 2>> increments() const {  // D_n
        std::vector<std::array<int64_t, 2>> d;
        for (size_t i = 1; i < floor_xy.size(); ++i)
            d.push_back({floor_xy[i][0] - floor_xy[i - 1][0], floor_xy[i][1] - floor_xy[i - 1][1]});
        return d;
    }
};

struct BatchStats {
    size_t count = 0;
    double speed_mean = 0, speed_se = 0;    // per-trajectory displacement / elapsed
    double vdrift_mean = 0, vdrift_se = 0;  // half-space: mean vertical step off the floor
    double returns_mean = 0;
    std::vector<int64_t> returns;  // visits to the start vertex after t0, per trajectory
    int64_t max_excursion = 0;     // farthest graph distance from start seen in the batch
};

// ---- stepping cores --------------------------------------------------------

// one discrete move: sample from P^(t)(x, .) including the loop entry
inline Vertex discrete_step(const Environment& env, double t, const Vertex& x,
                            std::mt19937_64& rng) {
    thread_local std::vector<Vertex> nbrs;
    nbrs = env.geometry().neighbors(x);
    thread_local std::vector<double> cum;
    cum.assign(nbrs.size(), 0.0);
    double mu = 0.0;
    for (size_t i = 0; i < nbrs.size(); ++i) {
        mu += env.conductance(t, x, nbrs[i]);
        cum[i] = mu;
    }
    mu += env.loop_weight(t, x);  // the trailing interval [sum of edges, mu) is the stay
    double u = std::uniform_real_distribution<double>(0.0, mu)(rng);
    for (size_t i = 0; i < nbrs.size(); ++i)
        if (u < cum[i]) return nbrs[i];
    return x;
}

template <class Visit>
void walk_discrete_core(const Environment& env, const Vertex& x0, int64_t t0, int64_t steps,
                        std::mt19937_64& rng, Visit&& visit) {
    Vertex x = x0;
    for (int64_t s = 0; s < steps; ++s) {
        x = discrete_step(env, (double)(t0 + s), x, rng);
        visit((double)(t0 + s + 1), x);
    }
}

template <class Visit>
void walk_csrw_core(const Environment& env, const Vertex& x0, double t0, double horizon,
                    std::mt19937_64& rng, Visit&& visit) {
    std::exponential_distribution<double> hold(1.0);
    Vertex x = x0;
    double t = t0;
    for (;;) {
        t += hold(rng);
        if (t >= t0 + horizon) break;
        x = discrete_step(env, t, x, rng);  // right-continuous schedule value at t
        visit(t, x);
    }
}

struct VsrwStats {
    int64_t proposals = 0, accepted = 0;
};

template <class Visit>
void walk_vsrw_core(const Environment& env, const Vertex& x0, double t0, double horizon,
                    std::mt19937_64& rng, Visit&& visit, VsrwStats* stats = nullptr) {
    double lam = env.max_mu_total();
    std::exponential_distribution<double> hold(lam);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vertex x = x0;
    double t = t0;
    for (;;) {
        t += hold(rng);
        if (t >= t0 + horizon) break;
        if (stats) stats->proposals++;
        // thinning: accept with probability mu^(t)(x)/lam
        if (unif(rng) * lam >= env.mu_total(t, x)) continue;
        if (stats) stats->accepted++;
        x = discrete_step(env, t, x, rng);
        visit(t, x);
    }
}

// ---- trajectory ops --------------------------------------------------------

Trajectory simulate_discrete(const Environment& env, const Vertex& x0, int64_t t0, int64_t steps,
                             uint64_t seed);
Trajectory simulate_csrw(const Environment& env, const Vertex& x0, double t0, double horizon,
                         uint64_t seed);
Trajectory simulate_vsrw(const Environment& env, const Vertex& x0, double t0, double horizon,
                         uint64_t seed, VsrwStats* stats = nullptr);

// environment-specific state labels (A+/A- or A1/A2/A3) per event
StateTrace classify_states(const Environment& env, const Trajectory& traj);

// state label at a single (time, vertex); used by classify_states and the CSV export
std::string state_label(const Environment& env, double t, const Vertex& v);

// vertical-coordinate excursions of a half-space trajectory
ExcursionRecord excursions(const Trajectory& traj);

BatchStats trajectory_stats(const std::vector<Trajectory>& trajs);

}  // namespace tdrw
