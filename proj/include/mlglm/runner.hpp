#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mlglm {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Parsed, schema-validated run configuration. Unknown keys anywhere in the
// document are rejected with their field path.
struct RunConfig;

// Applies a dotted-path override ("model.beta=2", "saddle.tol=1e-8",
// "model.layers[0].alpha=0.5") to a raw config document.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Executes the task described by the (already loaded) config document and
// writes report.json plus the task's CSV artifacts under out_dir. Returns
// the report document.
nlohmann::json run_config(const nlohmann::json& doc, const std::string& out_dir);

// Convenience wrapper: load file, apply overrides, optionally force seed /
// threads, run. `overrides` are --set assignments.
nlohmann::json run(const std::string& config_path, const std::string& out_dir,
                   const std::vector<std::string>& overrides = {},
                   std::int64_t seed_override = -1, int threads_override = 0);

}  // namespace mlglm
