#pragma once
// Finite state chains attached to the walker constructions: the two-state
// zigzag/half-space chain, the three-state shift chain, and the half-space
// CSRW chain, together with their stationary vectors and speed formulas.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tdrw {

struct FiniteChain {
    std::vector<std::string> labels;
    Eigen::MatrixXd q;  // row-stochastic
};

// unique stationary vector of an irreducible chain (throws otherwise);
// residual ||pi^T q - pi^T||_inf <= 1e-12 guaranteed
Eigen::VectorXd stationary(const FiniteChain& chain);

// q = [[1-g, g], [g', 1-g']] with stationary (g', g)/(g+g'); labels A+, A-
FiniteChain two_state_chain(double gamma, double gamma_p);

// the three-state chain of the shifting 3-periodic pattern; labels A1, A2, A3
FiniteChain three_state_chain(double eps, double c);
// per-jump drift scaled by 1/c, as displayed: [-e/c, e/((2-e)c), e/((2+e)c)]
Eigen::Vector3d three_state_drift(double eps, double c);
// the source's proportional invariant vector, exactly as printed (its first
// component is negative at eps=0, c>1; the numerical solve is authoritative)
Eigen::Vector3d three_state_displayed_vector(double eps, double c);

struct PiComparison {
    Eigen::Vector3d solved;            // stationary() output
    Eigen::Vector3d displayed_raw;     // vector as printed
    Eigen::Vector3d displayed_scaled;  // printed vector scaled to sum 1
    double max_abs_diff = 0;           // between solved and displayed_scaled
};
PiComparison three_state_pi_comparison(double eps, double c);

// two-state chain of the half-space CSRW (bulk transition probabilities)
FiniteChain halfspace_csrw_chain(double eps, double c);

struct SpeedReport {
    double beta = 0;                    // signed speed (or per-epoch drift, see source)
    std::vector<double> decomposition;  // per-state pi(s) * Delta(s) contributions
    std::vector<double> drifts;         // per-state Delta(s)
    std::string source;                 // formula | monte-carlo | kernel-mean
};

// beta = eps (gamma' - gamma) / (gamma + gamma'); cross-checked against the
// stationary() decomposition to 1e-14; gamma = gamma' = 0 returns drift eps
SpeedReport ballistic_speed_1d(double eps, double gamma, double gamma_p);

// speed of the shift-pattern CSRW: c * pi . Delta with pi from stationary()
SpeedReport csrw_speed_sign(double eps, double c);

// vertical speed of the discrete half-space walk:
// (2e/(6+b)) pi(A+) - (2e/(6+b')) pi(A-); non-lazy b=b'=0 returns -e/3
SpeedReport halfspace_speed(double eps, double b, double b_prime);

// per-epoch vertical drift of the half-space CSRW chain (negative for all
// c > 1, eps in (0,1)); time speed is c * beta
SpeedReport halfspace_csrw_speed(double eps, double c);

}  // namespace tdrw
