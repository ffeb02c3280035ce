#ifndef MMGAMES_DYNAMICS_HPP
#define MMGAMES_DYNAMICS_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mmgames/game.hpp"
#include "mmgames/markov.hpp"
#include "mmgames/rng.hpp"

namespace mmg {

// interior floor applied when clamping strategies away from the simplex
// boundary; clamp events are counted and surfaced to the caller
inline constexpr double kInteriorEps = 1e-12;

// sampled-play state of the two learners
struct JointState {
  StrategyProfile x, y;
  std::size_t current_state = 0;
};

struct MmrdStepInfo {
  int a = 0;
  int b = 0;
  std::size_t next_state = 0;
  int clamps = 0;  // entries raised to the interior floor during this step
};

// One round of the sampled replicator update: play (a, b) from the current
// state, move to s' = successor(s, a, b), reinforce the realized actions of
// both players by eta * pi(e_{s'}) (each against their own payoff), then
// renormalize the touched rows. pi is evaluated under the pre-update
// strategies.
MmrdStepInfo MmrdStep(JointState& js, const GameSpec& spec, double eta, Rng& rng,
                      const PiOptions& opt = {});

// One synchronous gradient-ascent update of both players:
//   Delta^{a|s} = (u^st(Norm(x + gamma e^{a|s}), y) - u^st(x, y)) / gamma
//   x^{a|s} <- x^{a|s} (1 + eta Delta^{a|s}), then Norm
// and symmetrically for y against v^st, both measured at the pre-update
// profiles. Throws NumericalError when a multiplier 1 + eta Delta turns
// nonpositive (step size too large). Returns the number of clamped entries.
int MmgaStep(StrategyProfile& x, StrategyProfile& y, const GameSpec& spec, double eta,
             double gamma);

// Reduced two-action variant (m = 2, n = 1 only) that parametrizes each row
// by its first-action probability and skips renormalization:
//   Delta_i = (1 - x_i) (u^st(x + gamma e_i, y) - u^st(x, y)) / gamma
//   x_i <- x_i (1 + eta Delta_i)
// Coordinates are clamped to [eps, 1 - eps]; returns the clamp count.
int MmgaTwoActionStep(std::array<double, 4>& x, std::array<double, 4>& y, const GameSpec& spec,
                      double eta, double gamma, double eps = kInteriorEps);

// time derivatives of both profiles, state-major like StrategyProfile::probs
struct FieldEvaluation {
  std::vector<double> dx, dy;
};

// replicator flow dx^{a|s} = p_s^st x^{a|s} (pi(p^{a|s}) - sum_a' x^{a'|s} pi(p^{a'|s}))
FieldEvaluation MmrdField(const StrategyProfile& x, const StrategyProfile& y,
                          const GameSpec& spec, const PiOptions& opt = {});

enum class GradientMode { Exact, FiniteDifference };

// gradient-ascent flow dx^{a|s} = x^{a|s} g^{a|s} with g either the exact
// stationary-payoff gradient or its finite-difference measurement; the two
// modes follow entirely separate evaluation routes
FieldEvaluation MmgaField(const StrategyProfile& x, const StrategyProfile& y,
                          const GameSpec& spec, GradientMode mode = GradientMode::Exact,
                          double gamma = 1e-6, const PiOptions& opt = {});

using JointFieldFn =
    std::function<FieldEvaluation(const StrategyProfile&, const StrategyProfile&)>;

struct Rk4Options {
  double h = 1e-2;          // fixed step size
  double t_max = 100.0;
  std::size_t record_every = 1;
  double clamp_eps = kInteriorEps;
};

struct IntegrationResult {
  StrategyProfile x, y;
  std::size_t steps = 0;
  int clamp_events = 0;   // total clamped entries (stage and post-step)
  bool completed = true;
  std::string failure;    // set when the field failed mid-run
};

using TrajectoryObserver =
    std::function<void(double, const StrategyProfile&, const StrategyProfile&)>;
using ClampLogger = std::function<void(double, int)>;

// Classic fixed-step RK4 on the joint coordinates. The observer runs at t = 0,
// after every record_every-th step and at the final step; clamp_log, when set,
// is called after any step that required interior clamping. On a field failure
// the result carries the last valid state with completed = false.
IntegrationResult Rk4Integrate(StrategyProfile x, StrategyProfile y, const JointFieldFn& field,
                               const Rk4Options& opt, const TrajectoryObserver& observer = {},
                               const ClampLogger& clamp_log = {});

}  // namespace mmg

#endif
