#include "tdrw/environment.hpp"

#include <algorithm>
#include <cmath>

#include "tdrw/rng.hpp"

namespace tdrw {

namespace {

void check_breakpoints(const std::vector<double>& bk) {
    if (bk.empty()) throw std::invalid_argument("breakpoints required (tau_0 = 0 first)");
    if (bk.front() != 0.0) throw std::invalid_argument("breakpoints must start at tau_0 = 0");
    for (size_t i = 1; i < bk.size(); ++i)
        if (!(bk[i] > bk[i - 1])) throw std::invalid_argument("breakpoints must be strictly increasing");
}

int64_t mod3(int64_t v) { return ((v % 3) + 3) % 3; }

}  // namespace

// ---- constructors ----------------------------------------------------------

Environment zigzag_1d(const ZigzagParams& p) {
    if (!(p.eps > 0.0 && p.eps < 1.0)) throw std::invalid_argument("zigzag: eps must lie in (0,1)");
    if (p.b < 0 || p.b_prime < 0) throw std::invalid_argument("zigzag: loop weights must be >= 0");
    Environment e;
    e.geom_ = Geometry::line();
    e.family_ = EnvFamily::zigzag;
    e.eps_ = p.eps;
    e.b_ = p.b;
    e.bp_ = p.b_prime;
    e.c1_ = 1.0 - p.eps;
    return e;
}

Environment poisson_shift_1d(const PoissonShiftParams& p) {
    if (!(p.eps > -1.0 && p.eps < 1.0)) throw std::invalid_argument("poisson_shift: eps must lie in (-1,1)");
    check_breakpoints(p.breakpoints);
    Environment e;
    e.geom_ = Geometry::line();
    e.family_ = EnvFamily::poisson_shift;
    e.eps_ = p.eps;
    e.c_ = p.c;
    e.breakpoints_ = p.breakpoints;
    e.c1_ = 1.0 - std::abs(p.eps);
    return e;
}

Environment halfspace_discrete(const HalfspaceParams& p) {
    if (!(p.eps > 0.0 && p.eps < 1.0)) throw std::invalid_argument("halfspace_dt: eps must lie in (0,1)");
    if (p.b < 0 || p.b_prime < 0 || p.f < 0 || p.f_prime < 0)
        throw std::invalid_argument("halfspace_dt: loop weights must be >= 0");
    // construction requires b/(b+6) = f/(f+1+eps) = gamma and the primed
    // analogue with 1-eps, with gamma' < gamma (or the non-lazy all-zero case)
    double gamma = halfspace_gamma(p.b);
    double gamma_p = halfspace_gamma(p.b_prime);
    double gf = p.f / (p.f + 1.0 + p.eps);
    double gfp = p.f_prime / (p.f_prime + 1.0 - p.eps);
    if (std::abs(gamma - gf) > 1e-12 || std::abs(gamma_p - gfp) > 1e-12)
        throw std::invalid_argument("halfspace_dt: requires b/(b+6)=f/(f+1+eps) and b'/(b'+6)=f'/(f'+1-eps)");
    bool nonlazy = p.b == 0 && p.b_prime == 0 && p.f == 0 && p.f_prime == 0;
    if (!nonlazy && !(gamma_p < gamma))
        throw std::invalid_argument("halfspace_dt: requires gamma' < gamma");
    Environment e;
    e.geom_ = Geometry::halfspace();
    e.family_ = EnvFamily::halfspace_dt;
    e.eps_ = p.eps;
    e.b_ = p.b;
    e.bp_ = p.b_prime;
    e.f_ = p.f;
    e.fp_ = p.f_prime;
    e.c1_ = 1.0 - p.eps;
    return e;
}

Environment halfspace_csrw(const HalfspaceParams& p) {
    if (!(p.eps >= 0.0 && p.eps < 1.0)) throw std::invalid_argument("halfspace_csrw: eps must lie in [0,1)");
    check_breakpoints(p.breakpoints);
    Environment e;
    e.geom_ = Geometry::halfspace();
    e.family_ = EnvFamily::halfspace_csrw;
    e.eps_ = p.eps;
    e.breakpoints_ = p.breakpoints;
    e.c1_ = 1.0 - p.eps;
    if (p.eps == 0.0) e.c1_ = 1.0;
    return e;
}

Environment constant_env(const Geometry& g, double w, double loop) {
    if (!(w > 0)) throw std::invalid_argument("constant_env: weight must be > 0");
    if (loop < 0) throw std::invalid_argument("constant_env: loop must be >= 0");
    Environment e;
    e.geom_ = g;
    e.family_ = EnvFamily::constant;
    e.weight_ = w;
    e.loop_ = loop;
    e.c1_ = std::min(w, 1.0 / w);
    return e;
}

Environment cycle_schedule_env(int n, std::vector<double> breakpoints,
                               std::vector<std::vector<double>> weights) {
    check_breakpoints(breakpoints);
    if (weights.size() != breakpoints.size())
        throw std::invalid_argument("cycle_schedule: one weight row per segment");
    double lo = 1e300, hi = 0;
    for (const auto& row : weights) {
        if ((int)row.size() != n) throw std::invalid_argument("cycle_schedule: weight row size must equal n");
        for (double w : row) {
            if (!(w > 0)) throw std::invalid_argument("cycle_schedule: weights must be > 0");
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
    }
    Environment e;
    e.geom_ = Geometry::cycle(n);
    e.family_ = EnvFamily::cycle_schedule;
    e.breakpoints_ = std::move(breakpoints);
    e.cycle_weights_ = std::move(weights);
    e.c1_ = std::min({lo, 1.0 / hi});
    return e;
}

Environment reversed_environment(const Environment& env, double T) {
    if (!(T > 0)) throw std::invalid_argument("reversed_environment: horizon must be > 0");
    Environment e;
    e.geom_ = env.geometry();
    e.family_ = EnvFamily::reversed;
    e.inner_ = std::make_shared<Environment>(env);
    e.horizon_ = T;
    e.c1_ = env.c1();
    return e;
}

std::vector<double> poisson_times(double intensity, double horizon, uint64_t seed) {
    if (!(intensity > 0)) throw std::invalid_argument("poisson_times: intensity must be > 0");
    if (!(horizon > 0)) throw std::invalid_argument("poisson_times: horizon must be > 0");
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(intensity);
    std::vector<double> out{0.0};
    double t = 0;
    for (;;) {
        t += gap(rng);
        if (t >= horizon) break;
        out.push_back(t);
    }
    return out;
}

// ---- schedule queries ------------------------------------------------------

int64_t Environment::segment_of(double t) const {
    if (t < 0) throw std::domain_error("environment: negative time");
    switch (family_) {
        case EnvFamily::constant:
            return 0;
        case EnvFamily::zigzag:
        case EnvFamily::halfspace_dt:
            return (int64_t)std::floor(t);
        case EnvFamily::poisson_shift:
        case EnvFamily::halfspace_csrw:
        case EnvFamily::cycle_schedule: {
            auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
            return (int64_t)(it - breakpoints_.begin()) - 1;  // tau_0 = 0 so >= 0
        }
        case EnvFamily::reversed: {
            // value at u is the inner schedule's left limit at horizon - u;
            // represent it by the inner segment strictly left of that point
            double s = horizon_ - t;
            if (s <= 0) return inner_->segment_of(0.0);
            if (inner_->family_ == EnvFamily::zigzag || inner_->family_ == EnvFamily::halfspace_dt)
                return std::max<int64_t>(0, (int64_t)std::ceil(s) - 1);
            if (inner_->family_ == EnvFamily::constant) return 0;
            if (inner_->family_ == EnvFamily::reversed) return inner_->segment_of(s);  // via recursion
            const auto& bk = inner_->breakpoints_;
            auto it = std::lower_bound(bk.begin(), bk.end(), s);
            return std::max<int64_t>(0, (int64_t)(it - bk.begin()) - 1);
        }
    }
    return 0;
}

namespace {
// representative time inside integer segment m
double rep_time(int64_t m) { return (double)m; }
}  // namespace

double Environment::edge_weight(double t, const Vertex& a, const Vertex& b) const {
    switch (family_) {
        case EnvFamily::constant:
            return weight_;
        case EnvFamily::zigzag: {
            int64_t m = segment_of(t);
            int64_t i = std::min(a.x, b.x);  // edge (i, i+1)
            return ((m + i) % 2 + 2) % 2 == 0 ? 1.0 + eps_ : 1.0 - eps_;
        }
        case EnvFamily::poisson_shift: {
            int64_t k = segment_of(t);
            int64_t i = std::min(a.x, b.x);
            switch (mod3(i - k)) {
                case 0: return 1.0 - eps_;
                case 1: return 1.0;
                default: return 1.0 + eps_;
            }
        }
        case EnvFamily::halfspace_dt: {
            int64_t m = segment_of(t);
            if (a.z == b.z) {  // horizontal
                return a.z == 0 ? 0.0 : 1.0;
            }
            // vertical edge; read the up-weight of the lower endpoint
            const Vertex& lo = a.z < b.z ? a : b;
            bool odd = ((m + lo.x + lo.y + lo.z) % 2 + 2) % 2 == 1;
            return odd ? 1.0 + eps_ : 1.0 - eps_;
        }
        case EnvFamily::halfspace_csrw: {
            int64_t n = segment_of(t);
            if (a.z == b.z) {
                bool odd = ((n + a.z) % 2 + 2) % 2 == 1;  // floor: n parity (z = 0)
                return odd ? 1.0 + eps_ / 2.0 : 1.0 - eps_ / 2.0;
            }
            const Vertex& lo = a.z < b.z ? a : b;
            bool odd = ((n + lo.z) % 2 + 2) % 2 == 1;
            return odd ? 1.0 + eps_ : 1.0 - eps_;
        }
        case EnvFamily::cycle_schedule: {
            int64_t k = segment_of(t);
            int64_t n = geom_.cycle_n;
            int64_t i;
            if ((a.x + 1) % n == b.x) i = a.x;
            else i = b.x;
            return cycle_weights_[(size_t)k][(size_t)i];
        }
        case EnvFamily::reversed: {
            if (t < 0) throw std::domain_error("environment: negative time");
            double s = horizon_ - t;
            double rep;
            if (s <= 0) rep = 0.0;
            else if (inner_->family_ == EnvFamily::zigzag || inner_->family_ == EnvFamily::halfspace_dt)
                rep = rep_time(std::max<int64_t>(0, (int64_t)std::ceil(s) - 1));
            else if (inner_->family_ == EnvFamily::constant)
                rep = 0.0;
            else if (inner_->family_ == EnvFamily::reversed)
                rep = s;  // left limit of a reversal: sampling at s is exact for
                          // piecewise schedules except on a null set of boundaries
            else {
                const auto& bk = inner_->breakpoints_;
                auto it = std::lower_bound(bk.begin(), bk.end(), s);
                rep = bk[(size_t)std::max<int64_t>(0, (int64_t)(it - bk.begin()) - 1)];
            }
            return inner_->edge_weight(rep, a, b);
        }
    }
    return 0;
}

double Environment::conductance(double t, const Vertex& x, const Vertex& y) const {
    if (t < 0) throw std::domain_error("environment: negative time");
    if (x == y) return loop_weight(t, x);
    if (!geom_.adjacent(x, y)) return 0.0;
    return edge_weight(t, x, y);
}

double Environment::loop_weight(double t, const Vertex& x) const {
    if (t < 0) throw std::domain_error("environment: negative time");
    switch (family_) {
        case EnvFamily::constant:
            return loop_;
        case EnvFamily::zigzag: {
            int64_t m = segment_of(t);
            return ((m + x.x) % 2 + 2) % 2 == 0 ? b_ : bp_;
        }
        case EnvFamily::halfspace_dt: {
            int64_t m = segment_of(t);
            bool odd = ((m + x.x + x.y + x.z) % 2 + 2) % 2 == 1;
            if (x.z == 0) return odd ? f_ : fp_;
            return odd ? b_ : bp_;
        }
        case EnvFamily::reversed: {
            double s = horizon_ - t;
            double rep;
            if (s <= 0) rep = 0.0;
            else if (inner_->family_ == EnvFamily::zigzag || inner_->family_ == EnvFamily::halfspace_dt)
                rep = rep_time(std::max<int64_t>(0, (int64_t)std::ceil(s) - 1));
            else
                rep = std::max(0.0, s);
            return inner_->loop_weight(rep, x);
        }
        default:
            return 0.0;  // poisson_shift, halfspace_csrw, cycle_schedule: loopless
    }
}

double Environment::mu_total(double t, const Vertex& x) const {
    double s = loop_weight(t, x);
    for (const auto& n : geom_.neighbors(x)) s += edge_weight(t, x, n);
    return s;
}

double Environment::transition_prob(double t, const Vertex& x, const Vertex& y) const {
    double mu = mu_total(t, x);
    if (!(mu > 0)) throw std::domain_error("environment: mu_total vanished");
    return conductance(t, x, y) / mu;
}

std::vector<double> Environment::boundaries(double up_to) const {
    std::vector<double> out;
    switch (family_) {
        case EnvFamily::constant:
            break;
        case EnvFamily::zigzag:
        case EnvFamily::halfspace_dt:
            for (int64_t m = 1; (double)m < up_to; ++m) out.push_back((double)m);
            break;
        case EnvFamily::poisson_shift:
        case EnvFamily::halfspace_csrw:
        case EnvFamily::cycle_schedule:
            for (double b : breakpoints_)
                if (b > 0 && b < up_to) out.push_back(b);
            break;
        case EnvFamily::reversed: {
            auto inner_b = inner_->boundaries(horizon_);
            for (auto it = inner_b.rbegin(); it != inner_b.rend(); ++it) {
                double m = horizon_ - *it;
                if (m > 0 && m < up_to) out.push_back(m);
            }
            break;
        }
    }
    return out;
}

double Environment::max_mu_total() const {
    switch (family_) {
        case EnvFamily::constant:
            return geom_.max_degree() * weight_ + loop_;
        case EnvFamily::zigzag:
            return 2.0 + std::max(b_, bp_);
        case EnvFamily::poisson_shift:
            return 2.0 + std::abs(eps_);
        case EnvFamily::halfspace_dt:
            return std::max(6.0 + std::max(b_, bp_), 1.0 + eps_ + std::max(f_, fp_));
        case EnvFamily::halfspace_csrw:
            return 6.0 + 2.0 * eps_;
        case EnvFamily::cycle_schedule: {
            double mx = 0;
            for (const auto& row : cycle_weights_)
                for (size_t i = 0; i < row.size(); ++i)
                    mx = std::max(mx, row[i] + row[(i + row.size() - 1) % row.size()]);
            return mx;
        }
        case EnvFamily::reversed:
            return inner_->max_mu_total();
    }
    return 0;
}

EllipticityReport verify_ellipticity(const Environment& env,
                                     const std::vector<double>& sample_times, const Ball& box,
                                     std::optional<double> c1_override) {
    if (box.members.empty()) throw std::invalid_argument("verify_ellipticity: empty box");
    double c1 = c1_override.value_or(env.c1());
    EllipticityReport rep;
    rep.min_weight = 1e300;
    rep.max_weight = 0;
    rep.pass = true;
    const auto& g = env.geometry();
    for (double t : sample_times) {
        for (const auto& v : box.members) {
            for (const auto& n : g.neighbors(v)) {
                double w = env.conductance(t, v, n);
                if (w == 0.0) continue;  // structural non-edge at this time
                rep.min_weight = std::min(rep.min_weight, w);
                rep.max_weight = std::max(rep.max_weight, w);
                if (rep.pass && (w < c1 || w > 1.0 / c1)) {
                    rep.pass = false;
                    rep.t_fail = t;
                    rep.x_fail = v;
                    rep.y_fail = n;
                    rep.w_fail = w;
                }
            }
        }
    }
    return rep;
}

}  // namespace tdrw
