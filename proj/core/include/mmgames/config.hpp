#ifndef MMGAMES_CONFIG_HPP
#define MMGAMES_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmgames/game.hpp"

namespace mmg {

// how the initial profiles of one run are produced
struct InitSpec {
  std::string kind = "constant";  // constant | explicit | nash-plus-delta | random-interior
  double x_value = 0.5;           // constant: first-action probability per state
  double y_value = 0.5;
  std::vector<double> x_rows;     // explicit: num_states * m entries, state-major
  std::vector<double> y_rows;
  std::vector<double> delta;      // nash-plus-delta: explicit deviations (4 entries)
  std::vector<double> epsilon;    //   (epsilon defaults to delta when omitted)
  double delta_scale = 0.05;      // nash-plus-delta: U[-scale, scale] draw per state
};

// Flat key-value experiment description with dotted sections:
//   game.*  run.*  init.*  reference.*  compare.*  metrics.*
// Parsed from structured text; every validation error names its key.
struct ExperimentConfig {
  // game.*
  int m = 0;
  int n = 0;
  std::vector<double> payoff_x;  // row-major m x m
  std::vector<double> payoff_y;  // optional; defaults to -payoff_x
  bool zero_sum_declared = false;
  bool zero_sum_value = false;

  // run.*
  std::string algorithm;  // mmrd | mmga | continuous-mmga | approx-1 | approx-2 | approx-3
  double eta = 1e-3;
  double gamma = 0.0;     // finite-difference probe; required for mmga
  double step_size = 1e-2;
  double t_max = 100.0;
  std::size_t record_every = 1;
  std::uint64_t seed = 1;
  std::string out = "trajectory.csv";

  // init.* and the optional reference.* clone for sensitivity runs
  InitSpec init;
  InitSpec reference;
  bool has_reference = false;

  // compare.*: approximate-field companion runs (continuous-mmga only)
  std::vector<int> compare_orders;

  // metrics.*
  std::string kl_reference = "none";  // none | nash2x1 | uniform
  std::size_t max_eig_every = 0;      // every k-th recorded sample; 0 disables
  std::string max_eig_mode = "real";  // real | modulus
  double max_eig_fd_step = 1e-6;

  GameSpec Game() const;  // validated GameSpec from the game.* fields
};

// Parses and validates; source_name prefixes error messages (file name or
// "<preset fig3>"). Unknown keys, malformed values and inconsistent
// combinations throw ConfigError naming the offending key.
ExperimentConfig ParseConfig(std::istream& in, const std::string& source_name);
ExperimentConfig ParseConfig(const std::string& text, const std::string& source_name);
ExperimentConfig LoadConfigFile(const std::string& path);

}  // namespace mmg

#endif
