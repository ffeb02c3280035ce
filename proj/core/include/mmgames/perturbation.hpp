#ifndef MMGAMES_PERTURBATION_HPP
#define MMGAMES_PERTURBATION_HPP

#include <array>
#include <utility>

#include "mmgames/game.hpp"

namespace mmg {

// the reduced two-action one-memory coordinates: one probability per state
using Vec4 = std::array<double, 4>;

// true iff both u1, u4 are larger than both u2, u3, or both are smaller
// (u flattened row-major: u1 = U(0,0), u2 = U(0,1), u3 = U(1,0), u4 = U(1,1))
bool Assumption1Check(const Vec4& u);

// the unique Nash equilibrium of a two-action zero-sum game under the
// assumption above; both players mix the same way at every state
struct NashPoint2x1 {
  double x_star = 0.0;
  double y_star = 0.0;
  double u_star = 0.0;

  // zero-memory interpretation: the constant profile over the 4 states
  StrategyProfile XProfile() const;
  StrategyProfile YProfile() const;
};

//   x* = (-u3 + u4) / (u1 - u2 - u3 + u4)
//   y* = (-u2 + u4) / (u1 - u2 - u3 + u4)
//   u* = (u1 u4 - u2 u3) / (u1 - u2 - u3 + u4)
// throws ConfigError when Assumption1Check fails
NashPoint2x1 Nash2x1(const Vec4& u);

// deviations from the equilibrium: delta = x - x* 1, epsilon = y - y* 1,
// in first-action probabilities per state
struct DeviationState {
  Vec4 delta{};
  Vec4 epsilon{};
};

DeviationState DeviationCoords(const Vec4& x, const Vec4& y, const NashPoint2x1& nash);
// inverse of DeviationCoords: the first-action probabilities (x, y)
std::pair<Vec4, Vec4> StrategiesAt(const DeviationState& d, const NashPoint2x1& nash);

// Fixed vectors entering every expansion term around the equilibrium:
//   x_star_vec = (x*, x*, xt*, xt*), y_star_vec = (y*, yt*, y*, yt*),
//   p_star = x_star_vec o y_star_vec (the equilibrium stationary state),
//   sign vectors 1x, 1y, 1z = 1x o 1y, and the payoff contraction u.1z.
struct ExpansionConstants {
  explicit ExpansionConstants(const Vec4& u);

  Vec4 u{};
  NashPoint2x1 nash;
  Vec4 x_star_vec{};
  Vec4 y_star_vec{};
  Vec4 p_star{};
  double u_one_z = 0.0;

  static constexpr Vec4 one_x{1.0, 1.0, -1.0, -1.0};
  static constexpr Vec4 one_y{1.0, -1.0, 1.0, -1.0};
  static constexpr Vec4 one_z{1.0, -1.0, -1.0, 1.0};
};

struct DeviationRates {
  Vec4 ddot{};
  Vec4 edot{};
};

// the isolated order-k expansion term of the reduced flow, k in {1, 2, 3}
DeviationRates ApproxFieldOrder(const DeviationState& d, int k, const ExpansionConstants& c);

// sum of the expansion terms up to order k; throws ConfigError when the
// deviations leave (0,1) around the equilibrium (out-of-simplex deviation)
DeviationRates ApproxField(const DeviationState& d, int k, const ExpansionConstants& c);

// (1/4) sum_i sqrt(|delta_i - delta'_i|^2 + |epsilon_i - epsilon'_i|^2)
double ApproxError(const DeviationState& a, const DeviationState& b);

// defect_{i,j} = d ddot_i^{(k)} / d delta_j + d edot_j^{(k)} / d epsilon_i
// by central finite differences on the isolated order-k term. For a flow of
// the form ddot = +dH/deps, edot = -dH/ddelta this is the difference of the
// mixed partials of H, so a Hamiltonian structure makes every entry vanish
// (it does at k = 1, not at k = 2).
std::array<Vec4, 4> HamiltonianDefect(const DeviationState& d, const ExpansionConstants& c,
                                      int order = 2, double fd_step = 1e-6);

}  // namespace mmg

#endif
