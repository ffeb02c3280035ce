// mmg: batch driver for multi-memory game learning experiments.
//
//   mmg run <config>       run an experiment from a config file
//   mmg preset <name>      run a shipped preset (fig2 | fig3 | fig4 | figA1)
//   mmg verify <suite>     run a verification suite
//
// Exit codes: 0 success / PASS, 1 config error, 2 numerical failure or
// aborted run, 3 verification FAIL.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmgames/config.hpp"
#include "mmgames/errors.hpp"
#include "mmgames/presets.hpp"
#include "mmgames/runner.hpp"
#include "mmgames/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerifyFail = 3;

struct Overrides {
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string out;
  double t_max = 0.0;
  bool has_t_max = false;

  void Apply(mmg::ExperimentConfig& cfg) const {
    if (has_seed) cfg.seed = seed;
    if (!out.empty()) cfg.out = out;
    if (has_t_max) cfg.t_max = t_max;
  }
};

void AddOverrideFlags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "override run.seed")->each([&](const std::string&) {
    ov.has_seed = true;
  });
  cmd->add_option("--out", ov.out, "override run.out (output CSV path)");
  cmd->add_option("--t-max", ov.t_max, "override run.t_max")->each([&](const std::string&) {
    ov.has_t_max = true;
  });
}

int Execute(mmg::ExperimentConfig cfg, const Overrides& ov) {
  ov.Apply(cfg);
  const mmg::RunResult result = mmg::RunExperiment(cfg);
  const std::vector<std::string> paths = mmg::WriteOutputs(result, cfg);
  for (const std::string& p : paths) std::cout << "wrote " << p << "\n";
  if (!result.main.completed) {
    std::cerr << "run aborted: " << result.main.failure << " (partial output written)\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int RunVerify(const std::string& suite, int trials, int m_max, int n_max, double grid_step,
              std::uint64_t seed) {
  mmg::VerifyReport rep;
  if (suite == "equivalence") {
    rep = mmg::VerifyEquivalence(trials < 0 ? 50 : trials, m_max, n_max, seed);
  } else if (suite == "stationary") {
    rep = mmg::VerifyStationary(trials < 0 ? 100 : trials, seed);
  } else if (suite == "nash") {
    rep = mmg::VerifyNash(trials < 0 ? 20 : trials, grid_step, seed);
  } else if (suite == "gradient") {
    rep = mmg::VerifyGradient(trials < 0 ? 20 : trials, seed);
  } else {
    throw mmg::ConfigError("unknown verify suite '" + suite +
                           "' (equivalence | stationary | nash | gradient)");
  }
  for (const std::string& line : rep.lines) std::cout << line << "\n";
  std::cout << rep.summary << "\n";
  return rep.pass ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-memory game learning dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides run_ov;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "config file")->required();
  AddOverrideFlags(run, run_ov);

  std::string preset_name;
  bool list_presets = false;
  Overrides preset_ov;
  CLI::App* preset = app.add_subcommand("preset", "run a shipped preset");
  preset->add_option("name", preset_name, "preset name (fig2 | fig3 | fig4 | figA1)");
  preset->add_flag("--list", list_presets, "list preset names and exit");
  AddOverrideFlags(preset, preset_ov);

  std::string suite;
  int trials = -1, m_max = 3, n_max = 2;
  double grid_step = 0.01;
  std::uint64_t verify_seed = 1;
  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "equivalence | stationary | nash | gradient")->required();
  verify->add_option("--trials", trials, "number of random trials (suite default when omitted)");
  verify->add_option("--m-max", m_max, "largest action count (equivalence)");
  verify->add_option("--n-max", n_max, "largest memory length (equivalence)");
  verify->add_option("--grid-step", grid_step, "deviation grid step (nash)");
  verify->add_option("--seed", verify_seed, "base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return Execute(mmg::LoadConfigFile(config_path), run_ov);
    if (preset->parsed()) {
      if (list_presets) {
        for (const std::string& name : mmg::PresetNames()) std::cout << name << "\n";
        return kExitOk;
      }
      if (preset_name.empty())
        throw mmg::ConfigError("preset: name required (or --list)");
      return Execute(mmg::PresetConfig(preset_name), preset_ov);
    }
    return RunVerify(suite, trials, m_max, n_max, grid_step, verify_seed);
  } catch (const mmg::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumerical;
  }
}
