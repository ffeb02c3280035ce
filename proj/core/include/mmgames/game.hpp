#ifndef MMGAMES_GAME_HPP
#define MMGAMES_GAME_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "mmgames/errors.hpp"

namespace mmg {

enum class Player { X, Y };

// one round of joint play, (a, b)
using ActionPair = std::pair<int, int>;

// Two-player m-action game repeated with n rounds of memory.
// The memorized state is the sequence of the last n action pairs; there are
// m^{2n} of them. States are indexed 0-based with the newest pair most
// significant, so the last-round payoff vector is constant on blocks of
// m^{2n-2} consecutive indices.
class GameSpec {
 public:
  // zero-sum construction, V = -U
  GameSpec(int m, int n, std::vector<double> payoff_x);
  GameSpec(int m, int n, std::vector<double> payoff_x, std::vector<double> payoff_y);

  int m = 0;  // actions per player
  int n = 0;  // memory depth
  std::vector<double> payoff_x;  // row-major m x m, U(a,b)
  std::vector<double> payoff_y;  // V(a,b)
  bool zero_sum = false;

  std::size_t N() const { return num_states; }
  double U(int a, int b) const { return payoff_x[static_cast<std::size_t>(a) * m + b]; }
  double V(int a, int b) const { return payoff_y[static_cast<std::size_t>(a) * m + b]; }

  // index = sum_k (a_k m + b_k) m^{2(n-k)}, pairs ordered newest first
  std::size_t StateIndex(const std::vector<ActionPair>& pairs) const;
  std::vector<ActionPair> StatePairs(std::size_t i) const;

  // next state when (a,b) is played from state i: newest pair prepended, oldest dropped
  std::size_t Successor(std::size_t i, int a, int b) const {
    return (static_cast<std::size_t>(a) * m + b) * succ_base + i / (static_cast<std::size_t>(m) * m);
  }

  // u_i = U(newest pair of s_i), length m^{2n}
  std::vector<double> PayoffVector(Player p) const;

  static GameSpec MatchingPennies(int n = 1);
  static GameSpec RockPaperScissors(int n = 1);  // win +1, lose -1, tie 0
  // antisymmetric circulant: each action beats its successor (+1), loses to its
  // predecessor (-1), 0 elsewhere; uniform mixing is the Nash equilibrium
  static GameSpec CyclicGame(int m, int n = 1);

 private:
  std::size_t num_states = 0;
  std::size_t succ_base = 0;  // m^{2(n-1)}
};

// Per-state mixed actions of one player: row s is the distribution x^{.|s}.
class StrategyProfile {
 public:
  StrategyProfile() = default;
  StrategyProfile(std::size_t num_states, int m, double fill);

  static StrategyProfile Uniform(const GameSpec& spec);
  // first action gets p, the remaining m-1 actions share 1-p equally
  // (for m = 2 this is the state-independent profile x = p * 1)
  static StrategyProfile ConstantFirstAction(const GameSpec& spec, double p);

  std::size_t num_states = 0;
  int m = 0;
  std::vector<double> probs;  // num_states * m, state-major

  double At(std::size_t s, int a) const { return probs[s * m + a]; }
  double& At(std::size_t s, int a) { return probs[s * m + a]; }
  const double* Row(std::size_t s) const { return probs.data() + s * m; }
  double* Row(std::size_t s) { return probs.data() + s * m; }

  // throws ConfigError unless every row is nonnegative and sums to 1 within tol
  void CheckValid(double tol = 1e-12) const;

  double MinEntry() const;

  void NormalizeRow(std::size_t s);  // degenerate (nonpositive-sum) rows throw

  // entries below eps raised to eps and the row renormalized; returns the
  // number of touched entries so callers can log clamp events
  int ClampInterior(double eps);
};

// Norm(x): divide every row by its sum; rows with nonpositive sum are an
// error rather than silently uniformized
StrategyProfile Norm(StrategyProfile raw);

}  // namespace mmg

#endif
