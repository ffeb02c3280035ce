#include "mmgames/markov.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "mmgames/errors.hpp"

namespace mmg {

namespace {

void CheckProfilePair(const StrategyProfile& x, const StrategyProfile& y, const GameSpec& spec) {
  if (x.num_states != spec.N() || y.num_states != spec.N() || x.m != spec.m || y.m != spec.m) {
    std::ostringstream msg;
    msg << "strategy profile shape (" << x.num_states << "x" << x.m << ", " << y.num_states << "x"
        << y.m << ") does not match game with " << spec.N() << " states and " << spec.m
        << " actions";
    throw ConfigError(msg.str());
  }
}

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double L1Norm(const std::vector<double>& a) {
  double acc = 0.0;
  for (double e : a) acc += std::fabs(e);
  return acc;
}

}  // namespace

TransitionMatrix::TransitionMatrix(const StrategyProfile& x, const StrategyProfile& y,
                                   const GameSpec& spec) {
  CheckProfilePair(x, y, spec);
  N = spec.N();
  m = spec.m;
  mm = static_cast<std::size_t>(m) * m;
  succ_base = N / mm;
  prob.resize(N * mm);
  for (std::size_t i = 0; i < N; ++i) {
    const double* xr = x.Row(i);
    const double* yr = y.Row(i);
    double* col = prob.data() + i * mm;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) col[a * m + b] = xr[a] * yr[b];
  }
}

void TransitionMatrix::Apply(const double* in, double* out) const {
  for (std::size_t i = 0; i < N; ++i) out[i] = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double w = in[i];
    if (w == 0.0) continue;
    const double* col = prob.data() + i * mm;
    const std::size_t tail = i / mm;
    for (std::size_t ab = 0; ab < mm; ++ab) out[ab * succ_base + tail] += col[ab] * w;
  }
}

std::vector<double> TransitionMatrix::Apply(const std::vector<double>& in) const {
  std::vector<double> out(N);
  Apply(in.data(), out.data());
  return out;
}

double TransitionMatrix::ColumnSum(std::size_t i) const {
  const double* col = prob.data() + i * mm;
  double acc = 0.0;
  for (std::size_t ab = 0; ab < mm; ++ab) acc += col[ab];
  return acc;
}

void TransitionMatrix::SetColumn(std::size_t i, const double* x_row, const double* y_row) {
  double* col = prob.data() + i * mm;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) col[a * m + b] = x_row[a] * y_row[b];
}

StationaryDistribution StationaryPower(const TransitionMatrix& M, double tol,
                                       std::size_t max_iter) {
  StationaryDistribution out;
  std::vector<double> p(M.N, 1.0 / static_cast<double>(M.N));
  std::vector<double> q(M.N);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    M.Apply(p.data(), q.data());
    double sum = 0.0;
    for (double e : q) sum += e;
    for (double& e : q) e /= sum;
    double diff = 0.0;
    for (std::size_t i = 0; i < M.N; ++i) diff += std::fabs(q[i] - p[i]);
    p.swap(q);
    if (diff <= tol) {
      M.Apply(p.data(), q.data());
      double res = 0.0;
      for (std::size_t i = 0; i < M.N; ++i) res += std::fabs(p[i] - q[i]);
      out.p = std::move(p);
      out.residual = res;
      out.iterations = it;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "power iteration did not reach tol=" << tol << " within " << max_iter << " iterations";
  throw NumericalError(msg.str());
}

StationaryDistribution StationaryClosedForm2x1(const std::array<double, 4>& x,
                                               const std::array<double, 4>& y) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  const double y1 = y[0], y2 = y[1], y3 = y[2], y4 = y[3];

  // unnormalized cofactor expressions of the rank-deficient balance system;
  // each p_i is a polynomial in the first-action probabilities only
  const double p1 = (x4 + (x3 - x4) * y3) * (y4 + (y2 - y4) * x2) -
                    x3 * y2 * (x2 - x4) * (y3 - y4);
  const double p2 = (x4 + (x3 - x4) * y4) * ((1.0 - y3) - (y1 - y3) * x1) -
                    x4 * (1.0 - y1) * (x1 - x3) * (y3 - y4);
  const double p3 = ((1.0 - x2) - (x1 - x2) * y1) * (y4 + (y2 - y4) * x4) -
                    (1.0 - x1) * y4 * (x2 - x4) * (y1 - y2);
  const double p4 = ((1.0 - x2) - (x1 - x2) * y2) * ((1.0 - y3) - (y1 - y3) * x3) -
                    (1.0 - x2) * (1.0 - y3) * (x1 - x3) * (y1 - y2);

  const double sum = p1 + p2 + p3 + p4;
  if (!std::isfinite(sum) || std::fabs(sum) < 1e-300)
    throw NumericalError("closed-form stationary state is degenerate (normalizer vanished)");

  StationaryDistribution out;
  out.p = {p1 / sum, p2 / sum, p3 / sum, p4 / sum};

  // exact residual against the 4x4 chain for reporting
  std::array<double, 4> mp{};
  for (int i = 0; i < 4; ++i) {
    const double xs = (i < 2) ? ((i == 0) ? x1 : x2) : ((i == 2) ? x3 : x4);
    const double ys = (i == 0) ? y1 : (i == 1) ? y2 : (i == 2) ? y3 : y4;
    const double col[4] = {xs * ys, xs * (1.0 - ys), (1.0 - xs) * ys, (1.0 - xs) * (1.0 - ys)};
    for (int r = 0; r < 4; ++r) mp[r] += col[r] * out.p[i];
  }
  double res = 0.0;
  for (int r = 0; r < 4; ++r) res += std::fabs(out.p[r] - mp[r]);
  out.residual = res;
  out.iterations = 0;
  return out;
}

StationaryDistribution StationaryClosedForm2x1(const StrategyProfile& x,
                                               const StrategyProfile& y) {
  if (x.num_states != 4 || x.m != 2 || y.num_states != 4 || y.m != 2)
    throw ConfigError("closed-form stationary state requires m=2, n=1 profiles");
  std::array<double, 4> xa{}, ya{};
  for (std::size_t s = 0; s < 4; ++s) {
    xa[s] = x.At(s, 0);
    ya[s] = y.At(s, 0);
  }
  return StationaryClosedForm2x1(xa, ya);
}

StationaryDistribution StationaryDirect(const TransitionMatrix& M) {
  const std::size_t N = M.N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t tail = i / (static_cast<std::size_t>(M.m) * M.m);
    for (int a = 0; a < M.m; ++a)
      for (int b = 0; b < M.m; ++b) {
        const std::size_t r = (static_cast<std::size_t>(a) * M.m + b) * (N / (M.m * M.m)) + tail;
        A(r, i) -= M.prob[i * M.m * M.m + a * M.m + b];
      }
  }
  // replace the redundant last balance row with the normalization sum p = 1
  for (std::size_t i = 0; i < N; ++i) A(N - 1, i) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  rhs(N - 1) = 1.0;
  Eigen::VectorXd p = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(rhs);
  if (!p.allFinite()) throw NumericalError("direct stationary solve returned non-finite values");

  StationaryDistribution out;
  out.p.assign(p.data(), p.data() + N);
  std::vector<double> mp(N);
  M.Apply(out.p.data(), mp.data());
  double res = 0.0;
  for (std::size_t i = 0; i < N; ++i) res += std::fabs(out.p[i] - mp[i]);
  out.residual = res;
  out.iterations = 0;
  return out;
}

namespace {

constexpr std::size_t kDirectSolveLimit = 2048;

StationaryDistribution StationaryDispatch(const TransitionMatrix& M, const StrategyProfile& x,
                                          const StrategyProfile& y) {
  if (M.N == 4 && M.m == 2) return StationaryClosedForm2x1(x, y);
  if (M.N <= kDirectSolveLimit) return StationaryDirect(M);
  return StationaryPower(M);
}

}  // namespace

StationaryDistribution Stationary(const StrategyProfile& x, const StrategyProfile& y,
                                  const GameSpec& spec) {
  if (spec.m == 2 && spec.n == 1) return StationaryClosedForm2x1(x, y);
  TransitionMatrix M(x, y, spec);
  return StationaryDispatch(M, x, y);
}

double StationaryPayoff(const StationaryDistribution& p, const std::vector<double>& u) {
  return Dot(p.p, u);
}

std::vector<double> ActionConditionedDistribution(int a, std::size_t s, const StrategyProfile& y,
                                                  const GameSpec& spec) {
  std::vector<double> p(spec.N(), 0.0);
  for (int b = 0; b < spec.m; ++b) p[spec.Successor(s, a, b)] += y.At(s, b);
  return p;
}

std::vector<double> ActionConditionedDistributionY(int b, std::size_t s, const StrategyProfile& x,
                                                   const GameSpec& spec) {
  std::vector<double> p(spec.N(), 0.0);
  for (int a = 0; a < spec.m; ++a) p[spec.Successor(s, a, b)] += x.At(s, a);
  return p;
}

MarkovSystem::MarkovSystem(const StrategyProfile& x, const StrategyProfile& y,
                           const GameSpec& spec)
    : M(x, y, spec),
      pst(StationaryDispatch(M, x, y)),
      u(spec.PayoffVector(Player::X)),
      v(spec.PayoffVector(Player::Y)) {}

double MarkovSystem::Ust() const { return Dot(pst.p, u); }
double MarkovSystem::Vst() const { return Dot(pst.p, v); }

double MarkovSystem::Pi(const std::vector<double>& p0, Player player,
                        const PiOptions& opt) const {
  const std::vector<double>& w = (player == Player::X) ? u : v;
  std::vector<double> dev(M.N);
  for (std::size_t i = 0; i < M.N; ++i) dev[i] = p0[i] - pst.p[i];
  std::vector<double> next(M.N);
  double acc = 0.0;
  for (std::size_t t = 0; t < opt.max_terms; ++t) {
    if (L1Norm(dev) <= opt.tol) return acc;
    acc += Dot(dev, w);
    M.Apply(dev.data(), next.data());
    dev.swap(next);
  }
  std::ostringstream msg;
  msg << "future payoff series did not contract below tol=" << opt.tol << " within "
      << opt.max_terms << " terms (last deviation mass " << L1Norm(dev) << ")";
  throw NumericalError(msg.str());
}

double ExpectedFuturePayoff(const std::vector<double>& p0, const StrategyProfile& x,
                            const StrategyProfile& y, const GameSpec& spec, Player player,
                            const PiOptions& opt) {
  if (p0.size() != spec.N()) throw ConfigError("initial distribution size does not match game");
  MarkovSystem sys(x, y, spec);
  return sys.Pi(p0, player, opt);
}

GradientField PayoffGradientExact(const StrategyProfile& x, const StrategyProfile& y,
                                  const GameSpec& spec, Player player, const PiOptions& opt) {
  CheckProfilePair(x, y, spec);
  MarkovSystem sys(x, y, spec);
  const StrategyProfile& own = (player == Player::X) ? x : y;

  GradientField field;
  field.num_states = spec.N();
  field.m = spec.m;
  field.g.assign(field.num_states * spec.m, 0.0);

  std::vector<double> pi_a(spec.m);
  for (std::size_t s = 0; s < spec.N(); ++s) {
    for (int a = 0; a < spec.m; ++a) {
      std::vector<double> p0 = (player == Player::X)
                                   ? ActionConditionedDistribution(a, s, y, spec)
                                   : ActionConditionedDistributionY(a, s, x, spec);
      pi_a[a] = sys.Pi(p0, player, opt);
    }
    double mean = 0.0;
    for (int a = 0; a < spec.m; ++a) mean += own.At(s, a) * pi_a[a];
    for (int a = 0; a < spec.m; ++a)
      field.At(s, a) = sys.pst.p[s] * (pi_a[a] - mean);
  }
  return field;
}

namespace {

// stationary payoff of a two-action one-memory pair given first-action
// probabilities; used by the fast finite-difference path
double Ust2x1(const std::array<double, 4>& x, const std::array<double, 4>& y,
              const std::vector<double>& u) {
  StationaryDistribution p = StationaryClosedForm2x1(x, y);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += p.p[i] * u[i];
  return acc;
}

GradientField FdGradient2x1(const StrategyProfile& x, const StrategyProfile& y,
                            const GameSpec& spec, double gamma, Player player) {
  std::array<double, 4> xa{}, ya{};
  for (std::size_t s = 0; s < 4; ++s) {
    xa[s] = x.At(s, 0);
    ya[s] = y.At(s, 0);
  }
  const std::vector<double> w = spec.PayoffVector(player);
  const double base = Ust2x1(xa, ya, w);

  GradientField field;
  field.num_states = 4;
  field.m = 2;
  field.g.assign(8, 0.0);
  for (std::size_t s = 0; s < 4; ++s) {
    for (int a = 0; a < 2; ++a) {
      // Norm(x + gamma e^{a|s}) rescales row s by 1/(1+gamma)
      std::array<double, 4> xp = xa, yp = ya;
      std::array<double, 4>& own = (player == Player::X) ? xp : yp;
      const double p0 = own[s];
      own[s] = (a == 0) ? (p0 + gamma) / (1.0 + gamma) : p0 / (1.0 + gamma);
      field.At(s, a) = (Ust2x1(xp, yp, w) - base) / gamma;
    }
  }
  return field;
}

// rank-1 update path: perturbing one strategy row changes exactly one column
// of M, so each perturbed stationary state is a Sherman-Morrison correction
// of the factored base solve
GradientField FdGradientRankOne(const StrategyProfile& x, const StrategyProfile& y,
                                const GameSpec& spec, double gamma, Player player) {
  const std::size_t N = spec.N();
  const int m = spec.m;
  TransitionMatrix M(x, y, spec);

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) A(M.Successor(i, a, b), i) -= M.prob[i * m * m + a * m + b];
  for (std::size_t i = 0; i < N; ++i) A(N - 1, i) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  rhs(N - 1) = 1.0;
  const Eigen::VectorXd p = lu.solve(rhs);
  if (!p.allFinite()) throw NumericalError("finite-difference base solve returned non-finite values");

  const std::vector<double> w = spec.PayoffVector(player);
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), N);
  const double base = p.dot(wv);

  GradientField field;
  field.num_states = N;
  field.m = m;
  field.g.assign(N * m, 0.0);

  const StrategyProfile& own = (player == Player::X) ? x : y;
  const StrategyProfile& other = (player == Player::X) ? y : x;

  Eigen::VectorXd d(N);
  std::vector<double> own_row(m), pert_row(m);
  for (std::size_t s = 0; s < N; ++s) {
    for (int a = 0; a < m; ++a) own_row[a] = own.At(s, a);
    for (int a = 0; a < m; ++a) {
      for (int j = 0; j < m; ++j)
        pert_row[j] = (own_row[j] + ((j == a) ? gamma : 0.0)) / (1.0 + gamma);

      // d = -(column s of M' - column s of M), with the normalization row
      // pinned (its entries stay 1 in both systems)
      d.setZero();
      for (int ao = 0; ao < m; ++ao)
        for (int b = 0; b < m; ++b) {
          const double x_a = (player == Player::X) ? pert_row[ao] : other.At(s, ao);
          const double y_b = (player == Player::X) ? other.At(s, b) : pert_row[b];
          // reuse stored base probabilities for the subtracted term
          const double delta = x_a * y_b - M.prob[s * m * m + ao * m + b];
          const std::size_t r = M.Successor(s, ao, b);
          if (r != N - 1) d(r) -= delta;
        }

      const Eigen::VectorXd ws = lu.solve(d);
      const double denom = 1.0 + ws(s);
      double ust_p;
      if (std::fabs(denom) < 1e-12) {
        // fall back to a fresh factorization when the update is singular
        Eigen::MatrixXd Ap = A;
        Ap.col(s) += d;
        const Eigen::VectorXd pp = Eigen::PartialPivLU<Eigen::MatrixXd>(Ap).solve(rhs);
        ust_p = pp.dot(wv);
      } else {
        const Eigen::VectorXd pp = p - ws * (p(s) / denom);
        ust_p = pp.dot(wv);
      }
      field.At(s, a) = (ust_p - base) / gamma;
    }
  }
  return field;
}

}  // namespace

GradientField PayoffGradientFd(const StrategyProfile& x, const StrategyProfile& y,
                               const GameSpec& spec, double gamma, Player player) {
  CheckProfilePair(x, y, spec);
  if (gamma <= 0.0) throw ConfigError("finite-difference step gamma must be positive");
  if (spec.m == 2 && spec.n == 1) return FdGradient2x1(x, y, spec, gamma, player);
  if (spec.N() <= kDirectSolveLimit) return FdGradientRankOne(x, y, spec, gamma, player);

  // large state spaces: fresh power-iteration solves per perturbation
  const std::vector<double> w = spec.PayoffVector(player);
  const double base = StationaryPayoff(Stationary(x, y, spec), w);
  GradientField field;
  field.num_states = spec.N();
  field.m = spec.m;
  field.g.assign(field.num_states * spec.m, 0.0);
  for (std::size_t s = 0; s < spec.N(); ++s)
    for (int a = 0; a < spec.m; ++a) {
      StrategyProfile xp = x, yp = y;
      StrategyProfile& own = (player == Player::X) ? xp : yp;
      own.At(s, a) += gamma;
      own.NormalizeRow(s);
      field.At(s, a) = (StationaryPayoff(Stationary(xp, yp, spec), w) - base) / gamma;
    }
  return field;
}

GradientField PayoffGradientCentralFd(const StrategyProfile& x, const StrategyProfile& y,
                                      const GameSpec& spec, double gamma, Player player) {
  CheckProfilePair(x, y, spec);
  if (gamma <= 0.0) throw ConfigError("finite-difference step gamma must be positive");
  const std::vector<double> w = spec.PayoffVector(player);
  GradientField field;
  field.num_states = spec.N();
  field.m = spec.m;
  field.g.assign(field.num_states * spec.m, 0.0);
  for (std::size_t s = 0; s < spec.N(); ++s)
    for (int a = 0; a < spec.m; ++a) {
      StrategyProfile xp = x, yp = y;
      StrategyProfile& up = (player == Player::X) ? xp : yp;
      up.At(s, a) += gamma;
      up.NormalizeRow(s);
      const double plus = StationaryPayoff(Stationary(xp, yp, spec), w);

      StrategyProfile xm = x, ym = y;
      StrategyProfile& um = (player == Player::X) ? xm : ym;
      um.At(s, a) -= gamma;
      um.NormalizeRow(s);
      const double minus = StationaryPayoff(Stationary(xm, ym, spec), w);

      field.At(s, a) = (plus - minus) / (2.0 * gamma);
    }
  return field;
}

}  // namespace mmg
