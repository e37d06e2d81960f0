#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bdflow/commands.hpp"
#include "bdflow/errors.hpp"

namespace {

// 0 ok, 2 config validation, 3 solver failure, 4 verification failure.
enum ExitCode { kOk = 0, kConfigError = 2, kSolverError = 3, kVerifyFailed = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bdflow — boundary diffusion flow laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
    if (config_required) opt->required();
    sub->add_option("--out", out_override, "output directory (overrides config)");
  };

  auto* steady = app.add_subcommand("steady", "solve the stationary profile");
  auto* evolve = app.add_subcommand("evolve", "march the flow and export the trajectory");
  auto* spectrum = app.add_subcommand("spectrum", "linearized spectrum at the steady state");
  auto* rates = app.add_subcommand("rates", "convergence-rate fits and eigenmode expansion");
  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  for (auto* sub : {steady, evolve, spectrum, rates}) add_common(sub, true);
  add_common(verify, false);

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<bdflow::RunConfig> config;
    if (!config_path.empty()) config = bdflow::load_config(config_path);

    std::filesystem::path out_dir = "out";
    if (config) out_dir = config->out_dir;
    if (!out_override.empty()) out_dir = out_override;
    std::filesystem::create_directories(out_dir);

    if (steady->parsed()) {
      bdflow::cmd_steady(*config, out_dir);
    } else if (evolve->parsed()) {
      bdflow::cmd_evolve(*config, out_dir);
    } else if (spectrum->parsed()) {
      bdflow::cmd_spectrum(*config, out_dir);
    } else if (rates->parsed()) {
      bdflow::cmd_rates(*config, out_dir);
    } else if (verify->parsed()) {
      const bool ok = bdflow::cmd_verify(config ? &*config : nullptr, out_dir);
      if (!ok) return kVerifyFailed;
    }
  } catch (const bdflow::ValidationError& e) {
    std::fprintf(stderr, "config/validation error: %s\n", e.what());
    return kConfigError;
  } catch (const bdflow::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverError;
  }
  return kOk;
}
