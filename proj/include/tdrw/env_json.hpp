#pragma once
// JSON environment descriptors ({geometry, c1, params{...}, breakpoints[...]})
// and the named presets addressable from the CLI.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "tdrw/environment.hpp"

namespace tdrw {

nlohmann::json env_to_json(const Environment& env);
Environment env_from_json(const nlohmann::json& doc);

// presets: zigzag1d, poisson1d, halfspace-dt, halfspace-csrw, constant.
// env_seed drives the Poisson breakpoint draw (when none are supplied) on the
// breakpoint families; horizon bounds that draw.
Environment make_preset(const std::string& name, const nlohmann::json& params,
                        uint64_t env_seed, double horizon);

// throws std::invalid_argument naming the first unknown key
void reject_unknown_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                         const std::string& where);

}  // namespace tdrw
