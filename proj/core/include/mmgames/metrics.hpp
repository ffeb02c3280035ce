#ifndef MMGAMES_METRICS_HPP
#define MMGAMES_METRICS_HPP

#include <limits>

#include "mmgames/dynamics.hpp"
#include "mmgames/game.hpp"

namespace mmg {

// one row of recorded observables along a trajectory; NaN marks metrics that
// are disabled or failed at this sample (failures are logged by the runner)
struct MetricSample {
  double t = 0.0;
  double u_st = std::numeric_limits<double>::quiet_NaN();
  double min_prob = std::numeric_limits<double>::quiet_NaN();
  double kl = std::numeric_limits<double>::quiet_NaN();
  double distance = std::numeric_limits<double>::quiet_NaN();
  double max_eig = std::numeric_limits<double>::quiet_NaN();
};

// L(p) = log p - log(1 - p); throws NumericalError at the boundary
double Logit(double p);

// mean absolute logit displacement over the free coordinates (actions
// 0..m-2 of every state) of one player's profile:
//   D(x', x) = (1/K) sum |L(x'_i) - L(x_i)|,  K = num_states (m - 1)
// for two actions and one memory this is (1/4) sum_{i=1..4} |...|
double StrategyDistance(const StrategyProfile& a, const StrategyProfile& b);

// per-state-averaged Kullback-Leibler divergence from a reference profile:
//   (1/|S|) sum_s sum_a ref^{a|s} log(ref^{a|s} / x^{a|s})
double KlFromNash(const StrategyProfile& ref, const StrategyProfile& x);

// Largest eigenvalue (real part by default, modulus on request) of the
// Jacobian of the joint field in free coordinates, built column by column
// with central differences of step fd_step. The free-coordinate dimension
// 2 num_states (m-1) is capped at 512; larger systems throw ConfigError.
double MaxJacobianEigenvalue(const StrategyProfile& x, const StrategyProfile& y,
                             const JointFieldFn& field, double fd_step = 1e-6,
                             bool use_modulus = false);

}  // namespace mmg

#endif
