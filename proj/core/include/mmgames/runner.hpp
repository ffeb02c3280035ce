#ifndef MMGAMES_RUNNER_HPP
#define MMGAMES_RUNNER_HPP

#include <string>
#include <utility>
#include <vector>

#include "mmgames/config.hpp"
#include "mmgames/game.hpp"
#include "mmgames/metrics.hpp"
#include "mmgames/rng.hpp"

namespace mmg {

struct TrajectoryPoint {
  double t = 0.0;
  std::vector<double> x;  // full coordinates, state-major action-minor
  std::vector<double> y;
  MetricSample metrics;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  bool completed = true;
  std::string failure;  // set when the run aborted mid-way
};

// companion run of one approximate-field order next to a continuous-mmga run
struct ComparisonRun {
  int order = 0;
  Trajectory trajectory;
  // deviation-space error against the main run, one value per shared sample
  std::vector<double> error;
};

struct RunResult {
  Trajectory main;
  Trajectory reference;  // meaningful iff has_reference
  bool has_reference = false;
  std::vector<ComparisonRun> comparisons;
  std::vector<std::string> log_lines;  // sidecar log content, deterministic
};

// Runs the configured experiment in memory: main trajectory, optional
// reference clone (with the distance metric filled into the main samples)
// and optional approximate-field comparisons (with per-sample errors).
// Solver failures end the affected trajectory early with completed = false.
RunResult RunExperiment(const ExperimentConfig& cfg);

// Writes the main CSV at cfg.out, companions at <stem>_reference.csv /
// <stem>_approx<k>.csv, and the sidecar log at <out>.log. Values are printed
// with 17 significant digits. Returns the paths written, main CSV first.
std::vector<std::string> WriteOutputs(const RunResult& result, const ExperimentConfig& cfg);

// initial profiles per an init block; consumes rng draws for the random kinds
std::pair<StrategyProfile, StrategyProfile> MakeInitialProfiles(const InitSpec& init,
                                                                const GameSpec& game, Rng& rng);

// plain reader for round-trip checks: one header row, then rows of reals
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable ReadCsv(const std::string& path);

}  // namespace mmg

#endif
