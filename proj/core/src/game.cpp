#include "mmgames/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmg {

namespace {

std::size_t CheckedStateCount(int m, int n) {
  if (m < 2) throw ConfigError("GameSpec: need at least 2 actions, got m=" + std::to_string(m));
  if (n < 1) throw ConfigError("GameSpec: need memory depth >= 1, got n=" + std::to_string(n));
  // reject m^{2n} > 2^20: dense linear algebra beyond this is out of scale
  double bits = 2.0 * n * std::log2(static_cast<double>(m));
  if (bits > 20.0 + 1e-9) {
    throw ConfigError("GameSpec: state count m^(2n) exceeds 2^20 (m=" + std::to_string(m) +
                      ", n=" + std::to_string(n) + ")");
  }
  std::size_t count = 1;
  for (int k = 0; k < 2 * n; k++) count *= static_cast<std::size_t>(m);
  return count;
}

}  // namespace

GameSpec::GameSpec(int m_, int n_, std::vector<double> payoff_x_)
    : m(m_), n(n_), payoff_x(std::move(payoff_x_)), zero_sum(true) {
  num_states = CheckedStateCount(m, n);
  succ_base = num_states / (static_cast<std::size_t>(m) * m);
  if (payoff_x.size() != static_cast<std::size_t>(m) * m) {
    throw ConfigError("GameSpec: payoff matrix must be m x m");
  }
  payoff_y.resize(payoff_x.size());
  std::transform(payoff_x.begin(), payoff_x.end(), payoff_y.begin(), [](double v) { return -v; });
}

GameSpec::GameSpec(int m_, int n_, std::vector<double> payoff_x_, std::vector<double> payoff_y_)
    : m(m_), n(n_), payoff_x(std::move(payoff_x_)), payoff_y(std::move(payoff_y_)), zero_sum(false) {
  num_states = CheckedStateCount(m, n);
  succ_base = num_states / (static_cast<std::size_t>(m) * m);
  if (payoff_x.size() != static_cast<std::size_t>(m) * m ||
      payoff_y.size() != static_cast<std::size_t>(m) * m) {
    throw ConfigError("GameSpec: payoff matrices must be m x m");
  }
  zero_sum = true;
  for (std::size_t i = 0; i < payoff_x.size(); i++) {
    if (payoff_y[i] != -payoff_x[i]) {
      zero_sum = false;
      break;
    }
  }
}

std::size_t GameSpec::StateIndex(const std::vector<ActionPair>& pairs) const {
  if (pairs.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("StateIndex: expected " + std::to_string(n) + " action pairs");
  }
  std::size_t idx = 0;
  for (const auto& [a, b] : pairs) {
    if (a < 0 || a >= m || b < 0 || b >= m) {
      throw ConfigError("StateIndex: action index out of range");
    }
    idx = idx * (static_cast<std::size_t>(m) * m) + (static_cast<std::size_t>(a) * m + b);
  }
  return idx;
}

std::vector<ActionPair> GameSpec::StatePairs(std::size_t i) const {
  if (i >= num_states) throw ConfigError("StatePairs: state index out of range");
  std::vector<ActionPair> pairs(n);
  const std::size_t mm = static_cast<std::size_t>(m) * m;
  for (int k = n - 1; k >= 0; k--) {  // oldest pair is the least significant digit
    std::size_t digit = i % mm;
    pairs[k] = {static_cast<int>(digit / m), static_cast<int>(digit % m)};
    i /= mm;
  }
  return pairs;
}

std::vector<double> GameSpec::PayoffVector(Player p) const {
  const std::vector<double>& mat = (p == Player::X) ? payoff_x : payoff_y;
  std::vector<double> u(num_states);
  for (std::size_t i = 0; i < num_states; i++) {
    std::size_t newest = i / succ_base;  // (a*m + b) of the newest pair
    u[i] = mat[newest];
  }
  return u;
}

GameSpec GameSpec::MatchingPennies(int n) {
  return GameSpec(2, n, {1.0, -1.0, -1.0, 1.0});
}

GameSpec GameSpec::RockPaperScissors(int n) {
  return GameSpec(3, n,
                  {0.0, -1.0, 1.0,
                   1.0, 0.0, -1.0,
                   -1.0, 1.0, 0.0});
}

GameSpec GameSpec::CyclicGame(int m, int n) {
  std::vector<double> u(static_cast<std::size_t>(m) * m, 0.0);
  for (int a = 0; a < m; a++) {
    u[static_cast<std::size_t>(a) * m + (a + 1) % m] = -1.0;
    u[static_cast<std::size_t>(a) * m + (a + m - 1) % m] = 1.0;
  }
  return GameSpec(m, n, std::move(u));
}

StrategyProfile::StrategyProfile(std::size_t num_states_, int m_, double fill)
    : num_states(num_states_), m(m_), probs(num_states_ * m_, fill) {}

StrategyProfile StrategyProfile::Uniform(const GameSpec& spec) {
  return StrategyProfile(spec.N(), spec.m, 1.0 / spec.m);
}

StrategyProfile StrategyProfile::ConstantFirstAction(const GameSpec& spec, double p) {
  if (p <= 0.0 || p >= 1.0) throw ConfigError("ConstantFirstAction: p must be in (0,1)");
  StrategyProfile x(spec.N(), spec.m, (1.0 - p) / (spec.m - 1));
  for (std::size_t s = 0; s < x.num_states; s++) x.At(s, 0) = p;
  return x;
}

void StrategyProfile::CheckValid(double tol) const {
  for (std::size_t s = 0; s < num_states; s++) {
    double sum = 0.0;
    for (int a = 0; a < m; a++) {
      double v = At(s, a);
      if (v < 0.0) throw ConfigError("StrategyProfile: negative probability at state " + std::to_string(s));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ConfigError("StrategyProfile: row " + std::to_string(s) + " sums to " + std::to_string(sum));
    }
  }
}

double StrategyProfile::MinEntry() const {
  double mn = 1.0;
  for (double v : probs) mn = std::min(mn, v);
  return mn;
}

void StrategyProfile::NormalizeRow(std::size_t s) {
  double sum = 0.0;
  for (int a = 0; a < m; a++) sum += At(s, a);
  if (!(sum > 0.0)) {
    throw ConfigError("Norm: degenerate row " + std::to_string(s) + " (sum " + std::to_string(sum) + ")");
  }
  for (int a = 0; a < m; a++) At(s, a) /= sum;
}

int StrategyProfile::ClampInterior(double eps) {
  int clamped = 0;
  for (std::size_t s = 0; s < num_states; s++) {
    bool touched = false;
    for (int a = 0; a < m; a++) {
      if (At(s, a) < eps) {
        At(s, a) = eps;
        touched = true;
        clamped++;
      }
    }
    if (touched) NormalizeRow(s);
  }
  return clamped;
}

StrategyProfile Norm(StrategyProfile raw) {
  for (std::size_t s = 0; s < raw.num_states; s++) raw.NormalizeRow(s);
  return raw;
}

}  // namespace mmg
