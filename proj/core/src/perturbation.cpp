#include "mmgames/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmgames/errors.hpp"

namespace mmg {

namespace {

double Dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

Vec4 Had(const Vec4& a, const Vec4& b) {
  return {a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]};
}

Vec4 Scaled(const Vec4& a, double c) { return {c * a[0], c * a[1], c * a[2], c * a[3]}; }

// the ten contractions every expansion term is built from
struct Scalars {
  double A, B, C, D, E, F, G, H, P, Q;
};

Scalars ComputeScalars(const Vec4& d, const Vec4& e, const ExpansionConstants& c) {
  Scalars s{};
  s.A = Dot(d, c.p_star);
  s.B = Dot(e, c.p_star);
  s.C = Dot(Had(d, c.y_star_vec), c.one_x);
  s.D = Dot(Had(e, c.y_star_vec), c.one_x);
  s.E = Dot(Had(d, c.x_star_vec), c.one_y);
  s.F = Dot(Had(e, c.x_star_vec), c.one_y);
  s.G = Dot(Had(d, e), c.p_star);
  s.H = Dot(Had(d, e), c.one_z);
  s.P = Dot(Had(Had(d, e), c.y_star_vec), c.one_x);
  s.Q = Dot(Had(Had(d, e), c.x_star_vec), c.one_y);
  return s;
}

// d u^st,(k) / d delta for k in {1..4}; the order-1 payoff term vanishes
Vec4 GradDelta(const Vec4& d, const Vec4& e, const ExpansionConstants& c, int k) {
  if (k <= 1) return Vec4{};
  const Scalars s = ComputeScalars(d, e, c);
  const double uz = c.u_one_z;
  const Vec4 eyx = Had(Had(e, c.y_star_vec), c.one_x);
  const Vec4 exy = Had(Had(e, c.x_star_vec), c.one_y);
  if (k == 2) return Scaled(Had(e, c.p_star), uz);
  if (k == 3) {
    Vec4 g{};
    for (int i = 0; i < 4; ++i)
      g[i] = uz * (s.A * eyx[i] + s.B * exy[i] + s.P * c.p_star[i]);
    return g;
  }
  if (k == 4) {
    const Vec4 yx = Had(c.y_star_vec, c.one_x);
    const Vec4 xy = Had(c.x_star_vec, c.one_y);
    const Vec4 ez = Had(e, c.one_z);
    const Vec4 ep = Had(e, c.p_star);
    Vec4 g{};
    for (int i = 0; i < 4; ++i)
      g[i] = uz * (s.G * ez[i] + s.H * ep[i]
                   + (s.A * s.C + s.B * s.E) * eyx[i]
                   + (s.A * s.D + s.B * s.F) * exy[i]
                   + s.P * (s.A * yx[i] + s.B * xy[i] + s.C * c.p_star[i])
                   + s.Q * s.D * c.p_star[i]);
    return g;
  }
  throw ConfigError("expansion gradients are implemented up to order 4");
}

// d u^st,(k) / d epsilon, the mirror contraction of GradDelta
Vec4 GradEpsilon(const Vec4& d, const Vec4& e, const ExpansionConstants& c, int k) {
  if (k <= 1) return Vec4{};
  const Scalars s = ComputeScalars(d, e, c);
  const double uz = c.u_one_z;
  const Vec4 dyx = Had(Had(d, c.y_star_vec), c.one_x);
  const Vec4 dxy = Had(Had(d, c.x_star_vec), c.one_y);
  if (k == 2) return Scaled(Had(d, c.p_star), uz);
  if (k == 3) {
    Vec4 g{};
    for (int i = 0; i < 4; ++i)
      g[i] = uz * (s.A * dyx[i] + s.B * dxy[i] + s.Q * c.p_star[i]);
    return g;
  }
  if (k == 4) {
    const Vec4 yx = Had(c.y_star_vec, c.one_x);
    const Vec4 xy = Had(c.x_star_vec, c.one_y);
    const Vec4 dz = Had(d, c.one_z);
    const Vec4 dp = Had(d, c.p_star);
    Vec4 g{};
    for (int i = 0; i < 4; ++i)
      g[i] = uz * (s.G * dz[i] + s.H * dp[i]
                   + s.E * s.P * c.p_star[i]
                   + (s.A * s.C + s.B * s.E) * dyx[i]
                   + (s.A * yx[i] + s.F * c.p_star[i] + s.B * xy[i]) * s.Q
                   + (s.A * s.D + s.B * s.F) * dxy[i]);
    return g;
  }
  throw ConfigError("expansion gradients are implemented up to order 4");
}

void CheckInterior(const DeviationState& d, const NashPoint2x1& nash) {
  for (int i = 0; i < 4; ++i) {
    const double x = nash.x_star + d.delta[i];
    const double y = nash.y_star + d.epsilon[i];
    if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
      std::ostringstream msg;
      msg << "out-of-simplex deviation at state " << i + 1 << ": x=" << x << ", y=" << y;
      throw ConfigError(msg.str());
    }
  }
}

}  // namespace

bool Assumption1Check(const Vec4& u) {
  const double lo14 = std::min(u[0], u[3]);
  const double hi14 = std::max(u[0], u[3]);
  const double lo23 = std::min(u[1], u[2]);
  const double hi23 = std::max(u[1], u[2]);
  return lo14 > hi23 || hi14 < lo23;
}

StrategyProfile NashPoint2x1::XProfile() const {
  StrategyProfile p(4, 2, 1.0 - x_star);
  for (std::size_t s = 0; s < 4; ++s) p.At(s, 0) = x_star;
  return p;
}

StrategyProfile NashPoint2x1::YProfile() const {
  StrategyProfile p(4, 2, 1.0 - y_star);
  for (std::size_t s = 0; s < 4; ++s) p.At(s, 0) = y_star;
  return p;
}

NashPoint2x1 Nash2x1(const Vec4& u) {
  if (!Assumption1Check(u)) {
    throw ConfigError(
        "game violates the payoff-ordering assumption (u1, u4 must both exceed or both fall "
        "below u2, u3); the interior mixed equilibrium does not exist");
  }
  const double uz = u[0] - u[1] - u[2] + u[3];
  NashPoint2x1 nash;
  nash.x_star = (-u[2] + u[3]) / uz;
  nash.y_star = (-u[1] + u[3]) / uz;
  nash.u_star = (u[0] * u[3] - u[1] * u[2]) / uz;
  return nash;
}

DeviationState DeviationCoords(const Vec4& x, const Vec4& y, const NashPoint2x1& nash) {
  DeviationState d;
  for (int i = 0; i < 4; ++i) {
    d.delta[i] = x[i] - nash.x_star;
    d.epsilon[i] = y[i] - nash.y_star;
  }
  return d;
}

std::pair<Vec4, Vec4> StrategiesAt(const DeviationState& d, const NashPoint2x1& nash) {
  Vec4 x{}, y{};
  for (int i = 0; i < 4; ++i) {
    x[i] = nash.x_star + d.delta[i];
    y[i] = nash.y_star + d.epsilon[i];
  }
  return {x, y};
}

ExpansionConstants::ExpansionConstants(const Vec4& u_) : u(u_), nash(Nash2x1(u_)) {
  const double xs = nash.x_star, xt = 1.0 - nash.x_star;
  const double ys = nash.y_star, yt = 1.0 - nash.y_star;
  x_star_vec = {xs, xs, xt, xt};
  y_star_vec = {ys, yt, ys, yt};
  p_star = Had(x_star_vec, y_star_vec);
  u_one_z = Dot(u, one_z);
}

DeviationRates ApproxFieldOrder(const DeviationState& d, int k, const ExpansionConstants& c) {
  if (k < 1 || k > 3) throw ConfigError("approximate field orders run from 1 to 3");
  CheckInterior(d, c.nash);

  const double cx = c.nash.x_star * (1.0 - c.nash.x_star);
  const double cy = c.nash.y_star * (1.0 - c.nash.y_star);
  const double ax = c.nash.x_star - (1.0 - c.nash.x_star);  // x* - xt*
  const double ay = c.nash.y_star - (1.0 - c.nash.y_star);

  // The order-k flow collects three gradient orders through the prefactor
  // (x* 1 + delta) o (xt* 1 - delta):
  //   ddot^(k) =  cx gd^(k+1) - ax delta o gd^(k) - delta o delta o gd^(k-1)
  //   edot^(k) = -cy ge^(k+1) + ay epsilon o ge^(k) + epsilon o epsilon o ge^(k-1)
  const Vec4 gd_next = GradDelta(d.delta, d.epsilon, c, k + 1);
  const Vec4 gd_cur = GradDelta(d.delta, d.epsilon, c, k);
  const Vec4 gd_prev = (k >= 2) ? GradDelta(d.delta, d.epsilon, c, k - 1) : Vec4{};
  const Vec4 ge_next = GradEpsilon(d.delta, d.epsilon, c, k + 1);
  const Vec4 ge_cur = GradEpsilon(d.delta, d.epsilon, c, k);
  const Vec4 ge_prev = (k >= 2) ? GradEpsilon(d.delta, d.epsilon, c, k - 1) : Vec4{};

  DeviationRates r;
  for (int i = 0; i < 4; ++i) {
    const double di = d.delta[i], ei = d.epsilon[i];
    r.ddot[i] = cx * gd_next[i] - ax * di * gd_cur[i] - di * di * gd_prev[i];
    r.edot[i] = -cy * ge_next[i] + ay * ei * ge_cur[i] + ei * ei * ge_prev[i];
  }
  return r;
}

DeviationRates ApproxField(const DeviationState& d, int k, const ExpansionConstants& c) {
  if (k < 1 || k > 3) throw ConfigError("approximate field orders run from 1 to 3");
  DeviationRates sum;
  for (int j = 1; j <= k; ++j) {
    const DeviationRates term = ApproxFieldOrder(d, j, c);
    for (int i = 0; i < 4; ++i) {
      sum.ddot[i] += term.ddot[i];
      sum.edot[i] += term.edot[i];
    }
  }
  return sum;
}

double ApproxError(const DeviationState& a, const DeviationState& b) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double dd = a.delta[i] - b.delta[i];
    const double de = a.epsilon[i] - b.epsilon[i];
    acc += std::sqrt(dd * dd + de * de);
  }
  return acc / 4.0;
}

std::array<Vec4, 4> HamiltonianDefect(const DeviationState& d, const ExpansionConstants& c,
                                      int order, double fd_step) {
  if (fd_step <= 0.0) throw ConfigError("finite-difference step must be positive");
  std::array<Vec4, 4> defect{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      // ddot = +dH/deps, edot = -dH/ddelta would force the mixed partials
      // d ddot_i / d delta_j and -d edot_j / d epsilon_i to coincide
      DeviationState dp = d, dm = d;
      dp.delta[j] += fd_step;
      dm.delta[j] -= fd_step;
      const double dd_dd =
          (ApproxFieldOrder(dp, order, c).ddot[i] - ApproxFieldOrder(dm, order, c).ddot[i]) /
          (2.0 * fd_step);

      DeviationState ep = d, em = d;
      ep.epsilon[i] += fd_step;
      em.epsilon[i] -= fd_step;
      const double de_de =
          (ApproxFieldOrder(ep, order, c).edot[j] - ApproxFieldOrder(em, order, c).edot[j]) /
          (2.0 * fd_step);

      defect[i][j] = dd_dd + de_de;
    }
  }
  return defect;
}

}  // namespace mmg
