#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdrw/runner.hpp"

namespace {

// exit contract: 0 ok, 2 validation, 3 inconclusive analysis, 1 reproduce fail
// or runtime error; every error also lands on stderr as structured JSON
int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json{{"error", "validation"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", "runtime"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "random walks among time-dependent conductances: environments, trajectory "
        "simulation, exact kernels, heat-kernel analysis"};
    app.require_subcommand(1);

    tdrw::CliOptions opt;
    std::string target;
    int rc = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "experiment config (JSON)");
        sub->add_option("--seed", opt.seed, "master seed override");
        sub->add_option("--threads", opt.threads,
                        "worker threads (default: TDRW_THREADS, then hardware)");
        sub->add_option("--out", opt.out_dir, "output directory override");
    };
    auto run = [&](CLI::App* sub, const std::function<int()>& body) {
        sub->callback([&, sub, body] {
            opt.has_seed = sub->count("--seed") > 0;
            rc = guarded(body);
        });
    };

    CLI::App* env = app.add_subcommand("env", "build and validate an environment");
    add_common(env);
    run(env, [&] { return tdrw::cmd_env(opt); });

    CLI::App* sim = app.add_subcommand("simulate", "run a trajectory batch");
    add_common(sim);
    run(sim, [&] { return tdrw::cmd_simulate(opt); });

    CLI::App* ker = app.add_subcommand("kernel", "propagate the exact transition kernel");
    add_common(ker);
    run(ker, [&] { return tdrw::cmd_kernel(opt); });

    CLI::App* ana = app.add_subcommand("analyze", "run requested analyses on the configured setup");
    add_common(ana);
    run(ana, [&] { return tdrw::cmd_analyze(opt); });

    CLI::App* rep = app.add_subcommand("reproduce", "run the canned experiment for a claim id");
    rep->add_option("target", target, "one of 2.1i, 2.1ii, 2.2i, 2.2ii, thm1.4-vsrw")->required();
    add_common(rep);
    run(rep, [&] { return tdrw::cmd_reproduce(target, opt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << nlohmann::json{{"error", "validation"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
    return rc;
}
