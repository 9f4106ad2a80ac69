#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "mlglm/errors.hpp"
#include "mlglm/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mlglm: free-energy limits of multi-layer GLMs (variational "
               "formula, Hopf/HJ verification, exact finite-n Monte Carlo)"};
  app.set_version_flag("--version", std::string(mlglm::kVersion));

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  long long seed = -1;
  int threads = 0;

  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "Output directory (default: config output.dir or '.')");
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--threads", threads, "Worker thread count (default: hardware)");
  app.add_option("--set", overrides, "Ad-hoc override dotted.key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto report = mlglm::run(config_path, out_dir, overrides, seed, threads);
    std::printf("%s\n", report["results"].dump(2).c_str());
    return 0;
  } catch (const mlglm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mlglm::NonConvergenceError& e) {
    std::fprintf(stderr, "non-convergence: %s\n", e.what());
    return 4;
  } catch (const mlglm::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
