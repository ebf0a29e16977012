#include "tdrw/kernel.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include "tdrw/parallel.hpp"

namespace tdrw {

namespace {

double kahan_sum(const std::vector<double>& v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

void check_config(const PropagationConfig& cfg) {
    if (cfg.radius < 1) throw std::invalid_argument("propagation config: radius must be >= 1");
    if (!(cfg.tol > 0.0) || cfg.tol > 1e-6)
        throw std::invalid_argument("propagation config: tol must lie in (0, 1e-6]");
}

}  // namespace

// ---------------------------------------------------------------------------
// box layout

BoxLayout BoxLayout::around(const Geometry& g, const Vertex& center, int64_t radius) {
    if (!g.contains(center)) throw std::invalid_argument("box center outside geometry");
    if (radius < 1) throw std::invalid_argument("box radius must be >= 1");
    BoxLayout b;
    b.kind = g.kind;
    b.center = center;
    b.radius = radius;
    switch (g.kind) {
        case GeometryKind::line:
            b.x_lo = center.x - radius;
            b.nx = 2 * radius + 1;
            break;
        case GeometryKind::cycle:
            b.x_lo = 0;
            b.nx = g.cycle_n;
            break;
        case GeometryKind::halfspace3d:
            b.x_lo = center.x - radius;
            b.y_lo = center.y - radius;
            b.z_lo = std::max<int64_t>(0, center.z - radius);
            b.nx = 2 * radius + 1;
            b.ny = 2 * radius + 1;
            b.nz = center.z + radius - b.z_lo + 1;
            break;
    }
    return b;
}

std::size_t BoxLayout::index(const Vertex& v) const {
    switch (kind) {
        case GeometryKind::line: {
            int64_t ix = v.x - x_lo;
            if (ix < 0 || ix >= nx) return npos;
            return (std::size_t)ix;
        }
        case GeometryKind::cycle: {
            int64_t ix = ((v.x % nx) + nx) % nx;
            return (std::size_t)ix;
        }
        case GeometryKind::halfspace3d: {
            int64_t ix = v.x - x_lo, iy = v.y - y_lo, iz = v.z - z_lo;
            if (ix < 0 || ix >= nx || iy < 0 || iy >= ny || iz < 0 || iz >= nz) return npos;
            return ((std::size_t)ix * (std::size_t)ny + (std::size_t)iy) * (std::size_t)nz +
                   (std::size_t)iz;
        }
    }
    return npos;
}

Vertex BoxLayout::vertex(std::size_t idx) const {
    switch (kind) {
        case GeometryKind::line:
            return {x_lo + (int64_t)idx, 0, 0};
        case GeometryKind::cycle:
            return {(int64_t)idx, 0, 0};
        case GeometryKind::halfspace3d: {
            int64_t iz = (int64_t)(idx % (std::size_t)nz);
            std::size_t rest = idx / (std::size_t)nz;
            int64_t iy = (int64_t)(rest % (std::size_t)ny);
            int64_t ix = (int64_t)(rest / (std::size_t)ny);
            return {x_lo + ix, y_lo + iy, z_lo + iz};
        }
    }
    return {};
}

int64_t BoxLayout::exit_distance() const {
    switch (kind) {
        case GeometryKind::line:
            return std::min(center.x - x_lo, x_lo + nx - 1 - center.x) + 1;
        case GeometryKind::cycle:
            return std::numeric_limits<int64_t>::max();  // nothing outside
        case GeometryKind::halfspace3d: {
            int64_t d = std::min(center.x - x_lo, x_lo + nx - 1 - center.x);
            d = std::min(d, std::min(center.y - y_lo, y_lo + ny - 1 - center.y));
            d = std::min(d, z_lo + nz - 1 - center.z);
            if (z_lo > 0) d = std::min(d, center.z - z_lo);  // floor face can leak too
            return d + 1;
        }
    }
    return 1;
}

// ---------------------------------------------------------------------------
// snapshot accessors

double KernelSnapshot::total_mass() const { return kahan_sum(mass); }

double KernelSnapshot::prob(const Vertex& v) const {
    std::size_t i = box.index(v);
    return i == BoxLayout::npos ? 0.0 : mass[i];
}

double KernelSnapshot::mean(int axis) const {
    double s = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] == 0.0) continue;
        Vertex v = box.vertex(i);
        int64_t c = axis == 0 ? v.x : axis == 1 ? v.y : v.z;
        s += (double)c * mass[i];
    }
    return s;
}

double KernelSnapshot::variance(int axis) const {
    double m = mean(axis), s = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] == 0.0) continue;
        Vertex v = box.vertex(i);
        int64_t c = axis == 0 ? v.x : axis == 1 ? v.y : v.z;
        s += ((double)c - m) * ((double)c - m) * mass[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Poisson helpers

double poisson_upper_tail(double lambda, int64_t k) {
    if (k <= 0) return 1.0;
    if (lambda <= 0.0) return 0.0;
    if ((double)k <= lambda) return 1.0;  // bound is vacuous there anyway
    // sum pmf from k upward; start in log space, then multiply incrementally
    double lp = -lambda + (double)k * std::log(lambda) - std::lgamma((double)k + 1.0);
    double term = std::exp(lp);
    if (term == 0.0) return 0.0;
    double s = 0.0;
    for (int64_t j = k; j < k + 100000; ++j) {
        s += term;
        term *= lambda / (double)(j + 1);
        if (term < s * 1e-18) {
            // remaining terms are dominated by a geometric series
            double r = lambda / (double)(j + 2);
            if (r < 1.0) s += term / (1.0 - r);
            break;
        }
    }
    return std::min(1.0, s);
}

// ---------------------------------------------------------------------------
// propagation engine

namespace {

constexpr std::size_t kNpos = BoxLayout::npos;

// static box adjacency plus per-time conductance tables
struct Cells {
    const Environment* env = nullptr;
    BoxLayout box;
    std::size_t n = 0;
    std::vector<Vertex> verts;
    std::vector<std::array<std::size_t, 6>> nbr;  // box index, kNpos = outside
    std::vector<std::array<Vertex, 6>> nbr_v;
    std::vector<uint8_t> deg;
    std::vector<std::size_t> edge_cells;  // cells with at least one outside slot
    // per-time tables (load(t))
    std::vector<std::array<double, 6>> w;  // conductance to each neighbor slot
    std::vector<double> loop_w, mu, out_w;
    double loaded_t = -1.0;
    int64_t loaded_seg = -1;

    Cells(const Environment& e, const BoxLayout& b) : env(&e), box(b), n(b.size()) {
        verts.resize(n);
        nbr.resize(n);
        nbr_v.resize(n);
        deg.resize(n);
        w.resize(n);
        loop_w.resize(n);
        mu.resize(n);
        out_w.resize(n);
        std::vector<Vertex> scratch;
        for (std::size_t i = 0; i < n; ++i) {
            Vertex v = box.vertex(i);
            verts[i] = v;
            env->geometry().neighbors_into(v, scratch);
            deg[i] = (uint8_t)scratch.size();
            bool edge = false;
            for (std::size_t s = 0; s < scratch.size(); ++s) {
                nbr_v[i][s] = scratch[s];
                std::size_t j = box.index(scratch[s]);
                nbr[i][s] = j;
                if (j == kNpos) edge = true;
            }
            if (edge) edge_cells.push_back(i);
        }
    }

    // refresh conductance tables for the schedule segment containing t
    void load(double t) {
        int64_t seg = env->segment_of(t);
        if (seg == loaded_seg && loaded_t >= 0.0) return;
        loaded_seg = seg;
        loaded_t = t;
        for (std::size_t i = 0; i < n; ++i) {
            const Vertex& v = verts[i];
            double lw = env->loop_weight(t, v);
            double tot = lw, outw = 0.0;
            for (uint8_t s = 0; s < deg[i]; ++s) {
                double ww = env->conductance_unchecked(t, v, nbr_v[i][s]);
                w[i][s] = ww;
                tot += ww;
                if (nbr[i][s] == kNpos) outw += ww;
            }
            loop_w[i] = lw;
            mu[i] = tot;
            out_w[i] = outw;
        }
    }

    double lambda_max() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, mu[i]);
        return m;
    }

    // one application of P^(t): p_out = P^T p_in restricted to the box.
    // Returns the exact outflow (mass absorbed outside); 0.0 when no mass
    // touches the boundary ring.
    double step_p(const std::vector<double>& p_in, std::vector<double>& p_out,
                  int threads) const {
        const auto& self = *this;
        parallel_for((int64_t)n, threads, [&](int64_t ii) {
            std::size_t i = (std::size_t)ii;
            double acc = p_in[i] * self.loop_w[i] / self.mu[i];
            for (uint8_t s = 0; s < self.deg[i]; ++s) {
                std::size_t j = self.nbr[i][s];
                if (j != kNpos) acc += p_in[j] * self.w[i][s] / self.mu[j];
            }
            p_out[i] = acc;
        });
        double out = 0.0;
        for (std::size_t i : edge_cells)
            if (p_in[i] != 0.0) out += p_in[i] * out_w[i] / mu[i];
        return out;
    }

    // one application of S = I + L^V/Lambda (loops invisible)
    double step_s(const std::vector<double>& p_in, std::vector<double>& p_out, double lambda,
                  int threads) const {
        const auto& self = *this;
        parallel_for((int64_t)n, threads, [&](int64_t ii) {
            std::size_t i = (std::size_t)ii;
            double off = self.mu[i] - self.loop_w[i];
            double acc = p_in[i] * (1.0 - off / lambda);
            for (uint8_t s = 0; s < self.deg[i]; ++s) {
                std::size_t j = self.nbr[i][s];
                if (j != kNpos) acc += p_in[j] * self.w[i][s] / lambda;
            }
            p_out[i] = acc;
        });
        double out = 0.0;
        for (std::size_t i : edge_cells)
            if (p_in[i] != 0.0) out += p_in[i] * out_w[i] / lambda;
        return out;
    }
};

struct LossState {
    double truncation = 0.0;
    double series = 0.0;
    double lambda_elapsed = 0.0;  // integral of the uniformization rate so far
};

KernelSnapshot make_snapshot(double time, const BoxLayout& box, const std::vector<double>& p,
                             const LossState& loss) {
    KernelSnapshot s;
    s.time = time;
    s.box = box;
    s.mass = p;
    s.truncation_loss = loss.truncation;
    s.series_error = loss.series;
    double analytic = 0.0;
    int64_t d = box.exit_distance();
    if (loss.lambda_elapsed > 0.0 && d != std::numeric_limits<int64_t>::max())
        analytic = poisson_upper_tail(loss.lambda_elapsed, d);
    s.loss_bound = std::max(loss.truncation, analytic);
    return s;
}

// Poisson(lambda) series: acc = sum_k w_k M^k p, truncated at tail < tol_seg.
// apply(src, dst) performs one matrix application and returns the outflow.
template <class Apply>
void run_series(double lambda, double tol_seg, std::vector<double>& p, std::vector<double>& cur,
                std::vector<double>& nxt, Apply&& apply, LossState& loss) {
    if (lambda <= 0.0) return;
    double before = kahan_sum(p);
    double wk = std::exp(-lambda);
    double cum = wk;
    cur = p;
    std::vector<double>& acc = p;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = wk * cur[i];
    int64_t k = 0;
    // hard cap: generous headroom past the mean of the Poisson weights
    int64_t k_cap = (int64_t)(lambda + 12.0 * std::sqrt(lambda + 1.0) + 200.0);
    while (1.0 - cum >= tol_seg && k < k_cap) {
        ++k;
        apply(cur, nxt);
        cur.swap(nxt);
        wk *= lambda / (double)k;
        cum += wk;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += wk * cur[i];
    }
    double after = kahan_sum(acc);
    loss.truncation += std::max(0.0, before - after);
    loss.series += std::max(0.0, 1.0 - cum);
    loss.lambda_elapsed += lambda;
}

// segment cut points for [0, horizon]: schedule boundaries + snapshot times,
// each segment further split so rate*length stays within the safe exp() range
std::vector<double> build_cuts(const Environment& env, double horizon,
                               const std::vector<double>& snaps, double est_rate) {
    std::vector<double> cuts = env.boundaries(horizon);
    for (double s : snaps)
        if (s > 0.0 && s < horizon) cuts.push_back(s);
    cuts.push_back(horizon);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               cuts.end());
    const double lambda_cap = 128.0;
    std::vector<double> out;
    double prev = 0.0;
    for (double c : cuts) {
        double len = c - prev;
        int64_t parts = std::max<int64_t>(1, (int64_t)std::ceil(est_rate * len / lambda_cap));
        for (int64_t j = 1; j < parts; ++j) out.push_back(prev + len * (double)j / (double)parts);
        out.push_back(c);
        prev = c;
    }
    return out;
}

bool is_snapshot_time(double t, const std::vector<double>& snaps) {
    for (double s : snaps)
        if (std::abs(s - t) < 1e-9) return true;
    return false;
}

std::vector<KernelSnapshot> continuous_kernel(const Environment& env, const Vertex& x0,
                                              double horizon, const PropagationConfig& cfg,
                                              bool vsrw, int threads) {
    check_config(cfg);
    if (horizon < 0.0) throw std::invalid_argument("kernel horizon must be >= 0");
    if (!env.geometry().contains(x0)) throw std::invalid_argument("start vertex outside geometry");
    threads = resolve_threads(threads);
    BoxLayout box = BoxLayout::around(env.geometry(), x0, cfg.radius);
    Cells cells(env, box);
    int gather_threads = cells.n >= 20000 ? threads : 1;

    std::vector<double> p(cells.n, 0.0), cur(cells.n), nxt(cells.n);
    p[box.index(x0)] = 1.0;
    LossState loss;
    std::vector<KernelSnapshot> result;
    if (horizon == 0.0) {
        result.push_back(make_snapshot(0.0, box, p, loss));
        return result;
    }

    double est_rate = vsrw ? std::max(1.0, env.max_mu_total()) : 1.0;
    std::vector<double> cuts = build_cuts(env, horizon, cfg.snapshot_times, est_rate);
    double tol_seg = cfg.tol / (double)cuts.size();

    double t = 0.0;
    for (double c : cuts) {
        double len = c - t;
        cells.load(t);
        double lambda, rate;
        if (vsrw) {
            rate = cells.lambda_max();
            lambda = rate * len;
        } else {
            rate = 1.0;
            lambda = len;
        }
        if (lambda > 0.0) {
            if (vsrw) {
                run_series(
                    lambda, tol_seg, p, cur, nxt,
                    [&](const std::vector<double>& a, std::vector<double>& b) {
                        return cells.step_s(a, b, rate, gather_threads);
                    },
                    loss);
            } else {
                run_series(
                    lambda, tol_seg, p, cur, nxt,
                    [&](const std::vector<double>& a, std::vector<double>& b) {
                        return cells.step_p(a, b, gather_threads);
                    },
                    loss);
            }
        }
        t = c;
        if (is_snapshot_time(t, cfg.snapshot_times) || c == cuts.back())
            result.push_back(make_snapshot(t, box, p, loss));
    }
    // collapse a duplicate when the final cut was itself a snapshot time
    if (result.size() >= 2 && std::abs(result.back().time - result[result.size() - 2].time) < 1e-9)
        result.erase(result.end() - 2);
    return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// public kernels

std::vector<KernelSnapshot> discrete_kernel(const Environment& env, const Vertex& x0,
                                            int64_t t0, int64_t steps,
                                            const PropagationConfig& cfg, int threads) {
    check_config(cfg);
    if (t0 < 0 || steps < 0) throw std::invalid_argument("discrete kernel: t0, steps must be >= 0");
    if (!env.geometry().contains(x0)) throw std::invalid_argument("start vertex outside geometry");
    threads = resolve_threads(threads);
    BoxLayout box = BoxLayout::around(env.geometry(), x0, cfg.radius);
    Cells cells(env, box);
    int gather_threads = cells.n >= 20000 ? threads : 1;

    std::vector<double> p(cells.n, 0.0), nxt(cells.n);
    p[box.index(x0)] = 1.0;
    LossState loss;
    std::vector<KernelSnapshot> result;
    if (steps == 0) {
        result.push_back(make_snapshot((double)t0, box, p, loss));
        return result;
    }
    for (int64_t k = 0; k < steps; ++k) {
        double t = (double)(t0 + k);
        cells.load(t);
        loss.truncation += cells.step_p(p, nxt, gather_threads);
        p.swap(nxt);
        double now = (double)(t0 + k + 1);
        if (k + 1 == steps || is_snapshot_time(now, cfg.snapshot_times))
            result.push_back(make_snapshot(now, box, p, loss));
    }
    return result;
}

std::vector<KernelSnapshot> csrw_kernel(const Environment& env, const Vertex& x0, double horizon,
                                        const PropagationConfig& cfg, int threads) {
    return continuous_kernel(env, x0, horizon, cfg, /*vsrw=*/false, threads);
}

std::vector<KernelSnapshot> vsrw_kernel(const Environment& env, const Vertex& x0, double horizon,
                                        const PropagationConfig& cfg, int threads) {
    return continuous_kernel(env, x0, horizon, cfg, /*vsrw=*/true, threads);
}

double duality_check_vsrw(const Environment& env, const Vertex& x, const Vertex& y, double horizon,
                          const PropagationConfig& cfg, int threads) {
    if (env.geometry().kind != GeometryKind::cycle)
        throw std::invalid_argument("duality check requires a finite cycle (exact kernels)");
    auto fwd = vsrw_kernel(env, x, horizon, cfg, threads);
    Environment rev = reversed_environment(env, horizon);
    auto bwd = vsrw_kernel(rev, y, horizon, cfg, threads);
    return std::abs(fwd.back().prob(y) - bwd.back().prob(x));
}

double duality_max_discrepancy(const Environment& env, const Vertex& x, double horizon,
                               const PropagationConfig& cfg, int threads) {
    if (env.geometry().kind != GeometryKind::cycle)
        throw std::invalid_argument("duality check requires a finite cycle (exact kernels)");
    auto fwd = vsrw_kernel(env, x, horizon, cfg, threads);
    Environment rev = reversed_environment(env, horizon);
    double worst = 0.0;
    for (int64_t yy = 0; yy < env.geometry().cycle_n; ++yy) {
        Vertex y{yy, 0, 0};
        auto bwd = vsrw_kernel(rev, y, horizon, cfg, threads);
        worst = std::max(worst, std::abs(fwd.back().prob(y) - bwd.back().prob(x)));
    }
    return worst;
}

std::vector<OnDiagPoint> ondiagonal_series(const Environment& env, const Vertex& x0,
                                           Dynamics dyn, const std::vector<double>& times,
                                           const PropagationConfig& cfg, int threads) {
    if (times.empty()) return {};
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("ondiagonal_series: times must be strictly increasing");
    if (times.front() < 0.0) throw std::invalid_argument("ondiagonal_series: negative time");

    std::vector<OnDiagPoint> out;
    std::vector<double> positive(times.begin(), times.end());
    if (positive.front() == 0.0) {
        out.push_back({0.0, 1.0, 0.0});
        positive.erase(positive.begin());
    }
    if (positive.empty()) return out;

    PropagationConfig c2 = cfg;
    c2.snapshot_times = positive;
    std::vector<KernelSnapshot> snaps;
    if (dyn == Dynamics::discrete) {
        for (double t : positive)
            if (std::abs(t - (double)std::llround(t)) > 1e-9)
                throw std::invalid_argument(
                    "ondiagonal_series: discrete dynamics needs integer times");
        snaps = discrete_kernel(env, x0, 0, (int64_t)std::llround(positive.back()), c2, threads);
    } else if (dyn == Dynamics::csrw) {
        snaps = csrw_kernel(env, x0, positive.back(), c2, threads);
    } else {
        snaps = vsrw_kernel(env, x0, positive.back(), c2, threads);
    }
    for (double t : positive) {
        const KernelSnapshot* hit = nullptr;
        for (const auto& s : snaps)
            if (std::abs(s.time - t) < 1e-9) hit = &s;
        if (!hit) throw std::logic_error("ondiagonal_series: missing snapshot");
        out.push_back({t, hit->prob(x0), hit->error_bound()});
    }
    return out;
}

void snapshot_to_csv(const KernelSnapshot& snap, std::ostream& os) {
    // shortest round-trip decimals so the file rereads bit-exactly
    char buf[40];
    os << "x,y,z,mass\n";
    for (std::size_t i = 0; i < snap.mass.size(); ++i) {
        if (snap.mass[i] == 0.0) continue;
        Vertex v = snap.box.vertex(i);
        auto res = std::to_chars(buf, buf + sizeof buf, snap.mass[i]);
        os << v.x << ',' << v.y << ',' << v.z << ',' << std::string_view(buf, res.ptr - buf)
           << '\n';
    }
}

}  // namespace tdrw
