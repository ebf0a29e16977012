#pragma once
// Exact (to stated tolerance) heat kernels for all three dynamics, computed by
// time-ordered propagation on a finite box with absorbing boundary.  Escaped
// mass is tracked explicitly, so reported masses are provable lower bounds and
// sum(mass) + truncation_loss = 1 holds to floating-point accuracy.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "tdrw/environment.hpp"
#include "tdrw/walkers.hpp"

namespace tdrw {

// Dense index layout for the propagation box around a center vertex.
// line: x in [cx-R, cx+R]; halfspace3d: cube of side 2R+1 clipped at z=0;
// cycle: the whole cycle (kernels there are exact, no truncation).
struct BoxLayout {
    GeometryKind kind = GeometryKind::line;
    Vertex center;
    int64_t radius = 0;
    int64_t x_lo = 0, y_lo = 0, z_lo = 0;
    int64_t nx = 1, ny = 1, nz = 1;

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    static BoxLayout around(const Geometry& g, const Vertex& center, int64_t radius);
    std::size_t size() const {
        return (std::size_t)nx * (std::size_t)ny * (std::size_t)nz;
    }
    std::size_t index(const Vertex& v) const;  // npos when outside the box
    Vertex vertex(std::size_t idx) const;
    // smallest number of unit jumps that can take the center outside
    int64_t exit_distance() const;
};

struct PropagationConfig {
    int64_t radius = 1;                  // box half-width; ignored on cycles
    double tol = 1e-9;                   // uniformization series budget, (0, 1e-6]
    std::vector<double> snapshot_times;  // recorded in addition to the final time
};

struct KernelSnapshot {
    double time = 0.0;
    BoxLayout box;
    std::vector<double> mass;      // indexed by box; p(0,x0; time, .)
    double truncation_loss = 0.0;  // exact mass missing from `mass` (box escape
                                   // plus truncated series terms)
    double series_error = 0.0;     // accumulated uniformization tail bound
    double loss_bound = 0.0;       // max(truncation_loss, analytic Poisson tail)

    double total_mass() const;
    double prob(const Vertex& v) const;  // 0 outside the box
    double error_bound() const { return truncation_loss + series_error; }
    double mean(int axis) const;      // sum of coordinate * mass (axis 0/1/2)
    double variance(int axis) const;  // central second moment along axis
};

// forward Chapman-Kolmogorov iteration of P^(t), one unit step at a time
std::vector<KernelSnapshot> discrete_kernel(const Environment& env, const Vertex& x0,
                                            int64_t t0, int64_t steps,
                                            const PropagationConfig& cfg, int threads = 0);
// solves dp/dt = L^C_t p by per-segment uniformization at rate 1
std::vector<KernelSnapshot> csrw_kernel(const Environment& env, const Vertex& x0,
                                        double horizon, const PropagationConfig& cfg,
                                        int threads = 0);
// solves dp/dt = L^V_t p; per-segment rate Lambda = max over box of mu_t(x)
std::vector<KernelSnapshot> vsrw_kernel(const Environment& env, const Vertex& x0,
                                        double horizon, const PropagationConfig& cfg,
                                        int threads = 0);

// |p(0,x;T,y) - p*(0,y;T,x)| where p* runs in the time-reversed environment.
// Requires a finite cycle so both sides are exact.
double duality_check_vsrw(const Environment& env, const Vertex& x, const Vertex& y,
                          double horizon, const PropagationConfig& cfg, int threads = 0);
// worst duality discrepancy over all endpoints y for a fixed x
double duality_max_discrepancy(const Environment& env, const Vertex& x, double horizon,
                               const PropagationConfig& cfg, int threads = 0);

struct OnDiagPoint {
    double t = 0.0;
    double p = 0.0;    // p(0,x0;t,x0)
    double err = 0.0;  // truncation_loss + series_error at that time
};

// one propagation to max(times) with snapshots at each requested time
std::vector<OnDiagPoint> ondiagonal_series(const Environment& env, const Vertex& x0,
                                           Dynamics dyn, const std::vector<double>& times,
                                           const PropagationConfig& cfg, int threads = 0);

// P(Poisson(lambda) >= k), used for the certified escape bound
double poisson_upper_tail(double lambda, int64_t k);

// CSV rows "x,y,z,mass" with a header line
void snapshot_to_csv(const KernelSnapshot& snap, std::ostream& os);

}  // namespace tdrw
