#pragma once
// Fit-and-verdict reports on top of the chain formulas (chains.hpp): Gaussian
// bound checks, Poincaré and volume-doubling constants, excursion tail fits,
// recurrence diagnostics.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tdrw/environment.hpp"
#include "tdrw/kernel.hpp"
#include "tdrw/walkers.hpp"

namespace tdrw {

enum class FitKind { gaussian_upper, gaussian_lower, poincare, doubling, ellipticity, tail };
enum class Verdict { pass, violated, inconclusive };

const char* fit_kind_name(FitKind k);
const char* verdict_name(Verdict v);

struct EvidenceRow {
    double t = 0.0;
    double d = 0.0;
    double value = 0.0;
    double bound = 0.0;
};

struct FitReport {
    FitKind kind = FitKind::tail;
    std::map<std::string, double> constants;
    Verdict verdict = Verdict::pass;
    std::vector<EvidenceRow> evidence;
};

// Least squares on log P(duration > k); pass iff the slope is significantly
// negative (t-stat < -3).  The first 5 excursions are dropped as burn-in.
// Needs at least 1000 completed excursions.
FitReport geometric_tail_fit(const std::vector<double>& durations);

struct GaussianReportPair {
    FitReport upper;  // C4, C5 of the off-diagonal envelope
    FitReport lower;  // c6, c7
};

// Evidence: v(t,d) = p(0,x0;t,y) * nu(B(x0, floor(sqrt t))) over sites with
// d(x0,y) <= min(2 sqrt t, t) and mass >= 1e-7.  The on-diagonal product is
// compared against its value at the earliest time; leaving that band by a
// factor > 10 flags a violation.  Inconclusive when kernel error bounds reach
// 1% of the smallest examined mass.
GaussianReportPair gaussian_bound_report(const std::vector<OnDiagPoint>& ondiag,
                                         const std::vector<KernelSnapshot>& snaps,
                                         const Geometry& geom);

// Optimal C2 of the Poincaré inequality at time t: largest generalized
// eigenvalue of (variance form over B(x0,r), Dirichlet form over the domain
// ball), divided by r^2.  domain_radius defaults to 2r.  Dense solve; the
// domain ball is capped at 4000 vertices.
FitReport poincare_constant(const Environment& env, double t, const Vertex& x0, int64_t r,
                            int64_t domain_radius = 0);

// C1 = max over r <= r_max/2 of nu(B(x0,2r)) / nu(B(x0,r))
FitReport volume_doubling_constant(const Geometry& geom, const Vertex& x0, int64_t r_max);

struct RecurrenceReport {
    std::vector<double> horizons;
    std::vector<double> median_returns;
    std::vector<double> mean_returns;
    bool monotone_growth = false;  // medians non-decreasing with strict overall growth
    double alpha = 0.0;            // decay exponent of p(t,0) ~ t^-alpha (series form)
    bool has_alpha = false;
};

// visits to the start vertex per trajectory, summarized per horizon
RecurrenceReport recurrence_diagnostic(const std::vector<Trajectory>& trajs,
                                       const std::vector<double>& horizons);
// decay-exponent form: fits ln p against ln t
RecurrenceReport recurrence_diagnostic(const std::vector<OnDiagPoint>& ondiag);

FitReport ellipticity_report(const EllipticityReport& rep);

}  // namespace tdrw
