#pragma once
// Time-dependent conductance environments: piecewise-constant, right-continuous
// schedules over a fixed geometry. Families cover the four counterexample
// constructions plus time-independent baselines and an explicit per-segment
// cycle schedule used by the duality checks.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdrw/geometry.hpp"

namespace tdrw {

enum class EnvFamily {
    constant,
    zigzag,
    poisson_shift,
    halfspace_dt,
    halfspace_csrw,
    cycle_schedule,
    reversed,
};

struct ZigzagParams {
    double eps = 0.5;
    double b = 0.0;        // loop weight in the (1-eps, b, 1+eps) phase
    double b_prime = 0.0;  // loop weight in the (1+eps, b', 1-eps) phase
};

struct PoissonShiftParams {
    double eps = 0.5;
    double c = 2.0;                   // intensity parameter; shifts occur at rate c-1
    std::vector<double> breakpoints;  // tau_0 = 0 < tau_1 < ...
};

struct HalfspaceParams {
    double eps = 0.5;
    double b = 0.0, b_prime = 0.0;    // interior loops (discrete variant)
    double f = 0.0, f_prime = 0.0;    // floor loops (discrete variant)
    std::vector<double> breakpoints;  // csrw variant only
};

class Environment {
  public:
    // ---- schedule queries -------------------------------------------------
    // mu^(t)(x,y); symmetric; 0 for non-adjacent pairs; loop weight when x==y
    double conductance(double t, const Vertex& x, const Vertex& y) const;
    // hot-path variant: caller guarantees x~y (distinct, adjacent) and t >= 0
    double conductance_unchecked(double t, const Vertex& x, const Vertex& y) const {
        return edge_weight(t, x, y);
    }
    double loop_weight(double t, const Vertex& x) const;
    // mu^(t)(x) = sum of incident edge weights plus the loop
    double mu_total(double t, const Vertex& x) const;
    // P^(t)(x,y) = mu^(t)(x,y)/mu^(t)(x); includes the self entry
    double transition_prob(double t, const Vertex& x, const Vertex& y) const;

    const Geometry& geometry() const { return geom_; }
    EnvFamily family() const { return family_; }
    double c1() const { return c1_; }

    // segment index of the schedule at time t (floor(t) for the unit-step
    // families, breakpoint interval otherwise; 0 for constant schedules)
    int64_t segment_of(double t) const;
    // schedule-change times strictly inside (0, up_to), sorted
    std::vector<double> boundaries(double up_to) const;
    // global upper bound on mu_total over all (t, x) — VSRW thinning rate
    double max_mu_total() const;

    // ---- parameter access (serialization, classifiers) --------------------
    double eps() const { return eps_; }
    double b() const { return b_; }
    double b_prime() const { return bp_; }
    double f() const { return f_; }
    double f_prime() const { return fp_; }
    double weight() const { return weight_; }
    double loop() const { return loop_; }
    double intensity_c() const { return c_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<std::vector<double>>& cycle_weights() const { return cycle_weights_; }
    const Environment* inner() const { return inner_.get(); }
    double reversal_horizon() const { return horizon_; }

    // ---- constructors (free functions below are the public API) ------------
    friend Environment zigzag_1d(const ZigzagParams&);
    friend Environment poisson_shift_1d(const PoissonShiftParams&);
    friend Environment halfspace_discrete(const HalfspaceParams&);
    friend Environment halfspace_csrw(const HalfspaceParams&);
    friend Environment constant_env(const Geometry&, double, double);
    friend Environment cycle_schedule_env(int, std::vector<double>, std::vector<std::vector<double>>);
    friend Environment reversed_environment(const Environment&, double);

  private:
    Environment() = default;
    double edge_weight(double t, const Vertex& a, const Vertex& b) const;

    Geometry geom_;
    EnvFamily family_ = EnvFamily::constant;
    double eps_ = 0, b_ = 0, bp_ = 0, f_ = 0, fp_ = 0;
    double weight_ = 1, loop_ = 0, c_ = 0, c1_ = 1;
    std::vector<double> breakpoints_;
    std::vector<std::vector<double>> cycle_weights_;  // [segment][edge i: (i,i+1 mod n)]
    std::shared_ptr<const Environment> inner_;        // reversed only
    double horizon_ = 0;                              // reversed only
};

// the four counterexample constructions
Environment zigzag_1d(const ZigzagParams& p);
Environment poisson_shift_1d(const PoissonShiftParams& p);
Environment halfspace_discrete(const HalfspaceParams& p);
Environment halfspace_csrw(const HalfspaceParams& p);
// baselines & plumbing
Environment constant_env(const Geometry& g, double w, double loop = 0.0);
Environment cycle_schedule_env(int n, std::vector<double> breakpoints,
                               std::vector<std::vector<double>> weights);
// schedule u -> mu^((T-u)-), rcll-adjusted (segment boundaries mirrored)
Environment reversed_environment(const Environment& env, double T);

// successive jump times of a Poisson process: tau_0 = 0, i.i.d. exp(intensity)
// gaps, truncated at the horizon; reproducible from the seed
std::vector<double> poisson_times(double intensity, double horizon, uint64_t seed);

// ---- ellipticity ----------------------------------------------------------
struct EllipticityReport {
    double min_weight = 0, max_weight = 0;
    bool pass = false;
    // first violation, when pass == false
    double t_fail = 0;
    Vertex x_fail, y_fail;
    double w_fail = 0;
};

// checks every non-loop edge incident to the box over the sampled times
// against [c1, 1/c1]; weight-0 pairs are structural non-edges and are skipped
EllipticityReport verify_ellipticity(const Environment& env,
                                     const std::vector<double>& sample_times, const Ball& box,
                                     std::optional<double> c1_override = std::nullopt);

// laziness helpers: gamma = b/(b+2) on the line, b/(b+6) in the half-space
inline double zigzag_gamma(double b) { return b / (b + 2.0); }
inline double halfspace_gamma(double b) { return b / (b + 6.0); }

}  // namespace tdrw
