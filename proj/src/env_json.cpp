#include "tdrw/env_json.hpp"

#include <stdexcept>

namespace tdrw {

using nlohmann::json;

namespace {

const char* family_name(EnvFamily f) {
    switch (f) {
        case EnvFamily::constant: return "constant";
        case EnvFamily::zigzag: return "zigzag";
        case EnvFamily::poisson_shift: return "poisson_shift";
        case EnvFamily::halfspace_dt: return "halfspace_dt";
        case EnvFamily::halfspace_csrw: return "halfspace_csrw";
        case EnvFamily::cycle_schedule: return "cycle_schedule";
        case EnvFamily::reversed: return "reversed";
    }
    return "?";
}

double get_num(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw std::invalid_argument("field '" + key + "' must be a number");
    return obj[key].get<double>();
}

std::vector<double> get_vec(const json& obj, const std::string& key) {
    std::vector<double> out;
    if (!obj.contains(key)) return out;
    if (!obj[key].is_array()) throw std::invalid_argument("field '" + key + "' must be an array");
    for (const auto& v : obj[key]) {
        if (!v.is_number()) throw std::invalid_argument("field '" + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

// gamma = b/(b+2) on the line, b/(b+6) on the half-space
double loop_from_gamma(double gamma, double flux) {
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("gamma must lie in [0, 1)");
    return flux * gamma / (1.0 - gamma);
}

}  // namespace

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
    if (!obj.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
    }
}

json env_to_json(const Environment& env) {
    json doc;
    doc["geometry"] = env.geometry().name();
    doc["c1"] = env.c1();
    json p;
    p["family"] = family_name(env.family());
    switch (env.family()) {
        case EnvFamily::constant:
            p["weight"] = env.weight();
            p["loop"] = env.loop();
            break;
        case EnvFamily::zigzag:
            p["eps"] = env.eps();
            p["b"] = env.b();
            p["b_prime"] = env.b_prime();
            break;
        case EnvFamily::poisson_shift:
            p["eps"] = env.eps();
            p["c"] = env.intensity_c();
            break;
        case EnvFamily::halfspace_dt:
        case EnvFamily::halfspace_csrw:
            p["eps"] = env.eps();
            if (env.family() == EnvFamily::halfspace_dt) {
                p["b"] = env.b();
                p["b_prime"] = env.b_prime();
                p["f"] = env.f();
                p["f_prime"] = env.f_prime();
            }
            break;
        case EnvFamily::cycle_schedule:
            p["n"] = env.geometry().cycle_n;
            p["weights"] = env.cycle_weights();
            break;
        case EnvFamily::reversed:
            p["horizon"] = env.reversal_horizon();
            p["inner"] = env_to_json(*env.inner());
            break;
    }
    if (env.geometry().kind == GeometryKind::cycle && env.family() != EnvFamily::cycle_schedule)
        p["n"] = env.geometry().cycle_n;
    doc["params"] = p;
    doc["breakpoints"] = env.breakpoints();
    return doc;
}

Environment env_from_json(const json& doc) {
    reject_unknown_keys(doc, {"geometry", "c1", "params", "breakpoints"}, "environment");
    if (!doc.contains("params") || !doc["params"].is_object())
        throw std::invalid_argument("environment: missing params object");
    const json& p = doc["params"];
    if (!p.contains("family") || !p["family"].is_string())
        throw std::invalid_argument("environment: params.family must be a string");
    std::string fam = p["family"].get<std::string>();
    std::vector<double> breaks = get_vec(doc, "breakpoints");
    std::string geom_name =
        doc.contains("geometry") ? doc["geometry"].get<std::string>() : std::string("line");

    auto geometry_of = [&](void) -> Geometry {
        if (geom_name == "line") return Geometry::line();
        if (geom_name == "halfspace3d") return Geometry::halfspace();
        if (geom_name == "cycle") {
            if (!p.contains("n")) throw std::invalid_argument("cycle geometry needs params.n");
            return Geometry::cycle(p["n"].get<int>());
        }
        throw std::invalid_argument("environment: unknown geometry '" + geom_name + "'");
    };

    if (fam == "constant") {
        reject_unknown_keys(p, {"family", "weight", "loop", "n"}, "params");
        return constant_env(geometry_of(), get_num(p, "weight", 1.0), get_num(p, "loop", 0.0));
    }
    if (fam == "zigzag") {
        reject_unknown_keys(p, {"family", "eps", "b", "b_prime"}, "params");
        ZigzagParams zp;
        zp.eps = get_num(p, "eps", 0.5);
        zp.b = get_num(p, "b", 0.0);
        zp.b_prime = get_num(p, "b_prime", 0.0);
        return zigzag_1d(zp);
    }
    if (fam == "poisson_shift") {
        reject_unknown_keys(p, {"family", "eps", "c"}, "params");
        PoissonShiftParams pp;
        pp.eps = get_num(p, "eps", 0.5);
        pp.c = get_num(p, "c", 2.0);
        pp.breakpoints = breaks;
        return poisson_shift_1d(pp);
    }
    if (fam == "halfspace_dt") {
        reject_unknown_keys(p, {"family", "eps", "b", "b_prime", "f", "f_prime"}, "params");
        HalfspaceParams hp;
        hp.eps = get_num(p, "eps", 0.5);
        hp.b = get_num(p, "b", 0.0);
        hp.b_prime = get_num(p, "b_prime", 0.0);
        hp.f = get_num(p, "f", 0.0);
        hp.f_prime = get_num(p, "f_prime", 0.0);
        return halfspace_discrete(hp);
    }
    if (fam == "halfspace_csrw") {
        reject_unknown_keys(p, {"family", "eps"}, "params");
        HalfspaceParams hp;
        hp.eps = get_num(p, "eps", 0.5);
        hp.breakpoints = breaks;
        return halfspace_csrw(hp);
    }
    if (fam == "cycle_schedule") {
        reject_unknown_keys(p, {"family", "n", "weights"}, "params");
        if (!p.contains("n") || !p.contains("weights"))
            throw std::invalid_argument("cycle_schedule needs params.n and params.weights");
        std::vector<std::vector<double>> w = p["weights"].get<std::vector<std::vector<double>>>();
        return cycle_schedule_env(p["n"].get<int>(), breaks, std::move(w));
    }
    if (fam == "reversed") {
        reject_unknown_keys(p, {"family", "horizon", "inner"}, "params");
        if (!p.contains("inner")) throw std::invalid_argument("reversed needs params.inner");
        Environment inner = env_from_json(p["inner"]);
        return reversed_environment(inner, get_num(p, "horizon", 0.0));
    }
    throw std::invalid_argument("environment: unknown family '" + fam + "'");
}

Environment make_preset(const std::string& name, const json& params, uint64_t env_seed,
                        double horizon) {
    if (name == "zigzag1d") {
        reject_unknown_keys(params, {"eps", "b", "b_prime", "gamma", "gamma_prime"}, "params");
        ZigzagParams zp;
        zp.eps = get_num(params, "eps", 0.5);
        if (params.contains("gamma")) {
            if (params.contains("b"))
                throw std::invalid_argument("zigzag1d: give either b or gamma, not both");
            zp.b = loop_from_gamma(get_num(params, "gamma", 0.0), 2.0);
        } else {
            zp.b = get_num(params, "b", 0.0);
        }
        if (params.contains("gamma_prime")) {
            if (params.contains("b_prime"))
                throw std::invalid_argument("zigzag1d: give either b_prime or gamma_prime");
            zp.b_prime = loop_from_gamma(get_num(params, "gamma_prime", 0.0), 2.0);
        } else {
            zp.b_prime = get_num(params, "b_prime", 0.0);
        }
        return zigzag_1d(zp);
    }
    if (name == "poisson1d") {
        reject_unknown_keys(params, {"eps", "c", "breakpoints"}, "params");
        PoissonShiftParams pp;
        pp.eps = get_num(params, "eps", 0.5);
        pp.c = get_num(params, "c", 2.0);
        pp.breakpoints = get_vec(params, "breakpoints");
        if (pp.breakpoints.empty())
            pp.breakpoints = poisson_times(pp.c - 1.0, horizon, env_seed);
        return poisson_shift_1d(pp);
    }
    if (name == "halfspace-dt") {
        reject_unknown_keys(params, {"eps", "b", "b_prime", "f", "f_prime", "gamma", "gamma_prime"},
                            "params");
        HalfspaceParams hp;
        hp.eps = get_num(params, "eps", 0.5);
        if (params.contains("gamma") || params.contains("gamma_prime")) {
            if (params.contains("b") || params.contains("f") || params.contains("b_prime") ||
                params.contains("f_prime"))
                throw std::invalid_argument("halfspace-dt: give loops or gammas, not both");
            double g = get_num(params, "gamma", 0.0);
            double gp = get_num(params, "gamma_prime", 0.0);
            hp.b = loop_from_gamma(g, 6.0);
            hp.b_prime = loop_from_gamma(gp, 6.0);
            // floor loops from f/(f+1+eps) = gamma, f'/(f'+1-eps) = gamma'
            hp.f = loop_from_gamma(g, 1.0 + hp.eps);
            hp.f_prime = loop_from_gamma(gp, 1.0 - hp.eps);
        } else {
            hp.b = get_num(params, "b", 0.0);
            hp.b_prime = get_num(params, "b_prime", 0.0);
            hp.f = get_num(params, "f", 0.0);
            hp.f_prime = get_num(params, "f_prime", 0.0);
        }
        return halfspace_discrete(hp);
    }
    if (name == "halfspace-csrw") {
        reject_unknown_keys(params, {"eps", "c", "breakpoints"}, "params");
        HalfspaceParams hp;
        hp.eps = get_num(params, "eps", 0.5);
        double c = get_num(params, "c", 2.0);
        if (c <= 1.0) throw std::invalid_argument("halfspace-csrw: c must be > 1");
        hp.breakpoints = get_vec(params, "breakpoints");
        if (hp.breakpoints.empty())
            hp.breakpoints = poisson_times(c - 1.0, horizon, env_seed);
        return halfspace_csrw(hp);
    }
    if (name == "constant") {
        reject_unknown_keys(params, {"weight", "loop", "geometry", "n"}, "params");
        Geometry g = Geometry::line();
        if (params.contains("geometry")) {
            std::string gn = params["geometry"].get<std::string>();
            if (gn == "line")
                g = Geometry::line();
            else if (gn == "halfspace3d")
                g = Geometry::halfspace();
            else if (gn == "cycle")
                g = Geometry::cycle(params.contains("n") ? params["n"].get<int>() : 0);
            else
                throw std::invalid_argument("constant: unknown geometry '" + gn + "'");
        }
        return constant_env(g, get_num(params, "weight", 1.0), get_num(params, "loop", 0.0));
    }
    throw std::invalid_argument("unknown environment preset '" + name + "'");
}

}  // namespace tdrw
