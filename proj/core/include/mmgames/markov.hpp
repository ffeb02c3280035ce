#ifndef MMGAMES_MARKOV_HPP
#define MMGAMES_MARKOV_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "mmgames/game.hpp"

namespace mmg {

// Column-stochastic transition matrix over memorized states,
//   M_{i'i} = x^{a|s_i} y^{b|s_i}   when s_{i'} = ab s_i^-.
// Column i has its m^2 entries stored densely as prob[i*m^2 + a*m + b]; the
// successor indices are pure arithmetic, so no index array is kept. For n = 1
// distinct (a,b) can reach coinciding successors only if m = 1, but Apply()
// accumulates anyway, which also covers rounding-free column sums.
class TransitionMatrix {
 public:
  TransitionMatrix(const StrategyProfile& x, const StrategyProfile& y, const GameSpec& spec);

  std::size_t N = 0;
  int m = 0;
  std::vector<double> prob;  // N * m^2

  std::size_t Successor(std::size_t i, int a, int b) const {
    return (static_cast<std::size_t>(a) * m + b) * succ_base + i / mm;
  }

  // out = M in; out must have size N
  void Apply(const double* in, double* out) const;
  std::vector<double> Apply(const std::vector<double>& in) const;

  double ColumnSum(std::size_t i) const;

  // overwrite column i with the probabilities induced by the given rows
  void SetColumn(std::size_t i, const double* x_row, const double* y_row);

 private:
  std::size_t succ_base = 0;  // m^{2(n-1)}
  std::size_t mm = 0;         // m^2
};

struct StationaryDistribution {
  std::vector<double> p;
  double residual = 0.0;       // ||p - Mp||_1 where evaluated
  std::size_t iterations = 0;  // 0 for the non-iterative solvers
};

// Power iteration from the uniform vector; stops when the L1 difference of
// successive iterates falls below tol, then reports the true residual.
// Throws NumericalError when max_iter is exhausted.
StationaryDistribution StationaryPower(const TransitionMatrix& M, double tol = 1e-13,
                                       std::size_t max_iter = 10'000'000);

// Closed-form stationary state of two-action one-memory games; x[i], y[i] are
// the first-action probabilities per state. Throws NumericalError when the
// normalizer vanishes (non-ergodic corner input).
StationaryDistribution StationaryClosedForm2x1(const std::array<double, 4>& x,
                                               const std::array<double, 4>& y);
StationaryDistribution StationaryClosedForm2x1(const StrategyProfile& x, const StrategyProfile& y);

// Dense LU solve of (I - M) p = 0 with a normalization row. Exact to solver
// precision at any (m, n); the in-loop workhorse where the closed form does
// not apply.
StationaryDistribution StationaryDirect(const TransitionMatrix& M);

// dispatcher used by the dynamics loops: closed form at (2,1), LU otherwise
// (power iteration for state spaces too large to factor densely)
StationaryDistribution Stationary(const StrategyProfile& x, const StrategyProfile& y,
                                  const GameSpec& spec);

// u^st = p^st . u
double StationaryPayoff(const StationaryDistribution& p, const std::vector<double>& u);

struct PiOptions {
  double tol = 1e-12;              // stop when ||M^t(p0 - p^st)||_1 <= tol
  std::size_t max_terms = 1'000'000;
};

// p^{a|s}: the expected next-state distribution when X plays a from state s
// while Y follows its strategy; mass y^{b|s} on successor(s, a, b)
std::vector<double> ActionConditionedDistribution(int a, std::size_t s, const StrategyProfile& y,
                                                  const GameSpec& spec);
// Y-side counterpart: mass x^{a|s} on successor(s, a, b)
std::vector<double> ActionConditionedDistributionY(int b, std::size_t s, const StrategyProfile& x,
                                                   const GameSpec& spec);

// Shared context for one (x, y): the transition matrix, its stationary state
// and both payoff vectors. All pi evaluations and gradients for a fixed
// profile pair run off one of these.
class MarkovSystem {
 public:
  MarkovSystem(const StrategyProfile& x, const StrategyProfile& y, const GameSpec& spec);

  TransitionMatrix M;
  StationaryDistribution pst;
  std::vector<double> u, v;  // last-round payoff vectors of X and Y

  double Ust() const;
  double Vst() const;

  // pi(p0, x, y) = sum_t M^t(p0 - p^st) . w, accumulated term by term
  // (w = u for X, v for Y); throws NumericalError past max_terms
  double Pi(const std::vector<double>& p0, Player player, const PiOptions& opt = {}) const;
};

// free-function form; builds a MarkovSystem internally
double ExpectedFuturePayoff(const std::vector<double>& p0, const StrategyProfile& x,
                            const StrategyProfile& y, const GameSpec& spec,
                            Player player = Player::X, const PiOptions& opt = {});

// Gradient of the stationary payoff in the post-normalization directions,
// one value per (action, state).
struct GradientField {
  std::size_t num_states = 0;
  int m = 0;
  std::vector<double> g;  // num_states * m, state-major

  double At(std::size_t s, int a) const { return g[s * m + a]; }
  double& At(std::size_t s, int a) { return g[s * m + a]; }
};

// g^{a|s_i} = p_i^st ( pi(p^{a|s_i}) - sum_a' x^{a'|s_i} pi(p^{a'|s_i}) );
// the identity route (player = X differentiates u^st by x, Y its v^st by y)
GradientField PayoffGradientExact(const StrategyProfile& x, const StrategyProfile& y,
                                  const GameSpec& spec, Player player = Player::X,
                                  const PiOptions& opt = {});

// forward difference (u^st(Norm(x + gamma e^{a|s}), y) - u^st(x, y)) / gamma,
// the same measurement the discretized gradient-ascent update plays out
GradientField PayoffGradientFd(const StrategyProfile& x, const StrategyProfile& y,
                               const GameSpec& spec, double gamma,
                               Player player = Player::X);

// central-difference variant used by the verification suites
GradientField PayoffGradientCentralFd(const StrategyProfile& x, const StrategyProfile& y,
                                      const GameSpec& spec, double gamma,
                                      Player player = Player::X);

}  // namespace mmg

#endif
