#pragma once
// Config-driven experiment runner behind the CLI: subcommand entry points,
// canned reproduction experiments, manifest writing.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace tdrw {

struct CliOptions {
    std::string config_path;
    bool has_seed = false;
    uint64_t seed = 0;
    int threads = 0;      // 0: TDRW_THREADS env var, then hardware
    std::string out_dir;  // overrides "out" from the config when non-empty
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

// Canned desk-scale experiments, ids 1..8. Id 0 is the half-space CSRW
// recurrence check used by `reproduce 2.2ii` only.
CriterionResult run_criterion(int id, int threads = 0);

// Criterion ids behind a reproduction target; empty means unknown target.
std::vector<int> criteria_for(const std::string& target);
std::vector<std::string> reproduce_targets();

// Parsed + validated config with defaults filled in and CLI overrides applied.
// Throws std::invalid_argument with a field-level message on bad input.
nlohmann::json load_config(const CliOptions& opt);

int cmd_env(const CliOptions& opt);
int cmd_simulate(const CliOptions& opt);
int cmd_kernel(const CliOptions& opt);
int cmd_analyze(const CliOptions& opt);
int cmd_reproduce(const std::string& target, const CliOptions& opt);

}  // namespace tdrw
