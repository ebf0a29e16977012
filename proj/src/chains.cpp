#include "tdrw/chains.hpp"

#include <cmath>
#include <stdexcept>

namespace tdrw {

Eigen::VectorXd stationary(const FiniteChain& chain) {
    const auto& q = chain.q;
    long n = q.rows();
    if (n < 1 || q.cols() != n) throw std::invalid_argument("stationary: square matrix required");
    for (long i = 0; i < n; ++i)
        if (std::abs(q.row(i).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("stationary: rows must sum to 1");
    // pi^T (q - I) = 0 with sum(pi) = 1: replace last column of (q - I)^T by ones
    Eigen::MatrixXd A = (q.transpose() - Eigen::MatrixXd::Identity(n, n));
    A.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < n) throw std::invalid_argument("stationary: chain is reducible");
    Eigen::VectorXd pi = lu.solve(rhs);
    if (pi.minCoeff() <= 0) throw std::invalid_argument("stationary: chain is reducible");
    pi /= pi.sum();
    double resid = ((pi.transpose() * q).transpose() - pi).cwiseAbs().maxCoeff();
    if (resid > 1e-12) throw std::runtime_error("stationary: residual too large");
    return pi;
}

FiniteChain two_state_chain(double gamma, double gamma_p) {
    if (gamma < 0 || gamma >= 1 || gamma_p < 0 || gamma_p >= 1)
        throw std::invalid_argument("two_state_chain: gamma, gamma' must lie in [0,1)");
    if (gamma == 0 && gamma_p == 0)
        throw std::invalid_argument("two_state_chain: degenerate gamma = gamma' = 0");
    FiniteChain c;
    c.labels = {"A+", "A-"};
    c.q.resize(2, 2);
    c.q << 1 - gamma, gamma, gamma_p, 1 - gamma_p;
    return c;
}

FiniteChain three_state_chain(double eps, double c) {
    if (!(c > 1)) throw std::invalid_argument("three_state_chain: c must be > 1");
    if (!(eps > -1 && eps < 1)) throw std::invalid_argument("three_state_chain: eps must lie in (-1,1)");
    FiniteChain ch;
    ch.labels = {"A1", "A2", "A3"};
    ch.q = Eigen::MatrixXd::Zero(3, 3);
    double q12 = (1 - eps) / (2 * c);
    double q23 = 1.0 / ((2 - eps) * c);
    double q31 = (1 + eps) / ((2 + eps) * c);
    ch.q(0, 1) = q12;
    ch.q(0, 2) = 1 - q12;
    ch.q(1, 2) = q23;
    ch.q(1, 0) = 1 - q23;
    ch.q(2, 0) = q31;
    ch.q(2, 1) = 1 - q31;
    return ch;
}

Eigen::Vector3d three_state_drift(double eps, double c) {
    return {-eps / c, eps / ((2 - eps) * c), eps / ((2 + eps) * c)};
}

Eigen::Vector3d three_state_displayed_vector(double eps, double c) {
    double c2 = c * c, e2 = eps * eps;
    return {2 * ((-4 * c2 + 2 * c - 1) + (c - 1) * eps + c2 * e2),
            (2 - eps) * ((4 * c2 - 2 * c + 1) + (2 * c2 - 2 * c) * eps - e2),
            (2 + eps) * ((4 * c2 - 2 * c + 1) + (-2 * c2 + 3 * c - 1) * eps - c * e2)};
}

PiComparison three_state_pi_comparison(double eps, double c) {
    PiComparison out;
    out.solved = stationary(three_state_chain(eps, c));
    out.displayed_raw = three_state_displayed_vector(eps, c);
    double s = out.displayed_raw.sum();
    out.displayed_scaled = s != 0 ? Eigen::Vector3d(out.displayed_raw / s) : out.displayed_raw;
    out.max_abs_diff = (out.solved - out.displayed_scaled).cwiseAbs().maxCoeff();
    return out;
}

FiniteChain halfspace_csrw_chain(double eps, double c) {
    if (!(c > 1)) throw std::invalid_argument("halfspace_csrw_chain: c must be > 1");
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("halfspace_csrw_chain: eps must lie in (0,1)");
    FiniteChain ch;
    ch.labels = {"A+", "A-"};
    ch.q.resize(2, 2);
    double qpm = (c - 1) / c + 1.0 / ((3 + eps) * c);
    double qmp = (c - 1) / c + 1.0 / ((3 - eps) * c);
    ch.q << 1 - qpm, qpm, qmp, 1 - qmp;
    return ch;
}

SpeedReport ballistic_speed_1d(double eps, double gamma, double gamma_p) {
    SpeedReport rep;
    rep.source = "formula";
    if (gamma == 0 && gamma_p == 0) {
        // non-lazy: the walk keeps one state; the drift is eps itself
        rep.beta = eps;
        rep.drifts = {eps, -eps};
        rep.decomposition = {eps, 0.0};
        return rep;
    }
    double dp = eps * (1 - gamma);
    double dm = -eps * (1 - gamma_p);
    Eigen::VectorXd pi = stationary(two_state_chain(gamma, gamma_p));
    double closed = eps * (gamma_p - gamma) / (gamma_p + gamma);
    double decomposed = dp * pi(0) + dm * pi(1);
    if (std::abs(closed - decomposed) > 1e-14)
        throw std::runtime_error("ballistic_speed_1d: formula/decomposition mismatch");
    rep.beta = closed;
    rep.drifts = {dp, dm};
    rep.decomposition = {dp * pi(0), dm * pi(1)};
    return rep;
}

SpeedReport csrw_speed_sign(double eps, double c) {
    Eigen::VectorXd pi = stationary(three_state_chain(eps, c));
    Eigen::Vector3d delta = three_state_drift(eps, c);
    SpeedReport rep;
    rep.source = "formula";
    rep.beta = c * pi.dot(delta);
    rep.drifts = {delta(0), delta(1), delta(2)};
    rep.decomposition = {c * pi(0) * delta(0), c * pi(1) * delta(1), c * pi(2) * delta(2)};
    return rep;
}

SpeedReport halfspace_speed(double eps, double b, double b_prime) {
    SpeedReport rep;
    rep.source = "formula";
    if (b == 0 && b_prime == 0) {
        // started in A- the non-lazy walk keeps that state; vertical drift -2e/6
        rep.beta = -eps / 3.0;
        rep.drifts = {2 * eps / 6.0, -2 * eps / 6.0};
        rep.decomposition = {0.0, -eps / 3.0};
        return rep;
    }
    double gamma = b / (b + 6.0), gamma_p = b_prime / (b_prime + 6.0);
    if (!(gamma_p < gamma)) throw std::invalid_argument("halfspace_speed: requires gamma' < gamma");
    Eigen::VectorXd pi = stationary(two_state_chain(gamma, gamma_p));
    double dp = 2 * eps / (6 + b);
    double dm = -2 * eps / (6 + b_prime);
    rep.beta = dp * pi(0) + dm * pi(1);
    rep.drifts = {dp, dm};
    rep.decomposition = {dp * pi(0), dm * pi(1)};
    if (!(rep.beta < 0)) throw std::runtime_error("halfspace_speed: beta must be negative");
    return rep;
}

SpeedReport halfspace_csrw_speed(double eps, double c) {
    Eigen::VectorXd pi = stationary(halfspace_csrw_chain(eps, c));
    double dp = 2 * eps / ((6 + 2 * eps) * c);
    double dm = -2 * eps / ((6 - 2 * eps) * c);
    SpeedReport rep;
    rep.source = "formula";
    rep.beta = dp * pi(0) + dm * pi(1);
    rep.drifts = {dp, dm};
    rep.decomposition = {dp * pi(0), dm * pi(1)};
    return rep;
}

}  // namespace tdrw
