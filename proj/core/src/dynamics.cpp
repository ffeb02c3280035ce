#include "mmgames/dynamics.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

#include "mmgames/errors.hpp"

namespace mmg {

namespace {

// raise negative entries of one row to eps ahead of normalization
int ClampRowNonnegative(StrategyProfile& p, std::size_t s, double eps) {
  int clamped = 0;
  for (int a = 0; a < p.m; ++a) {
    if (p.At(s, a) < 0.0) {
      p.At(s, a) = eps;
      ++clamped;
    }
  }
  return clamped;
}

double Ust2x1FirstAction(const std::array<double, 4>& x, const std::array<double, 4>& y,
                         const std::vector<double>& w) {
  StationaryDistribution p = StationaryClosedForm2x1(x, y);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += p.p[i] * w[i];
  return acc;
}

}  // namespace

MmrdStepInfo MmrdStep(JointState& js, const GameSpec& spec, double eta, Rng& rng,
                      const PiOptions& opt) {
  MmrdStepInfo info;
  info.clamps += js.x.ClampInterior(kInteriorEps);
  info.clamps += js.y.ClampInterior(kInteriorEps);

  MarkovSystem sys(js.x, js.y, spec);
  const std::size_t s = js.current_state;
  info.a = rng.Choice(js.x.Row(s), spec.m);
  info.b = rng.Choice(js.y.Row(s), spec.m);
  info.next_state = spec.Successor(s, info.a, info.b);

  std::vector<double> e(spec.N(), 0.0);
  e[info.next_state] = 1.0;
  const double pi_x = sys.Pi(e, Player::X, opt);
  const double pi_y = sys.Pi(e, Player::Y, opt);

  js.x.At(s, info.a) += eta * pi_x;
  js.y.At(s, info.b) += eta * pi_y;
  info.clamps += ClampRowNonnegative(js.x, s, kInteriorEps);
  info.clamps += ClampRowNonnegative(js.y, s, kInteriorEps);
  js.x.NormalizeRow(s);
  js.y.NormalizeRow(s);

  js.current_state = info.next_state;
  return info;
}

int MmgaStep(StrategyProfile& x, StrategyProfile& y, const GameSpec& spec, double eta,
             double gamma) {
  int clamps = x.ClampInterior(kInteriorEps) + y.ClampInterior(kInteriorEps);

  // both players measure against the pre-update opponent
  const GradientField gx = PayoffGradientFd(x, y, spec, gamma, Player::X);
  const GradientField gy = PayoffGradientFd(x, y, spec, gamma, Player::Y);

  for (std::size_t s = 0; s < spec.N(); ++s) {
    for (int a = 0; a < spec.m; ++a) {
      const double mx = 1.0 + eta * gx.At(s, a);
      const double my = 1.0 + eta * gy.At(s, a);
      if (mx <= 0.0 || my <= 0.0) {
        std::ostringstream msg;
        msg << "gradient step multiplier went nonpositive at state " << s << ", action " << a
            << " (eta=" << eta << "); reduce the step size";
        throw NumericalError(msg.str());
      }
      x.At(s, a) *= mx;
      y.At(s, a) *= my;
    }
    x.NormalizeRow(s);
    y.NormalizeRow(s);
  }
  return clamps;
}

int MmgaTwoActionStep(std::array<double, 4>& x, std::array<double, 4>& y, const GameSpec& spec,
                      double eta, double gamma, double eps) {
  if (spec.m != 2 || spec.n != 1)
    throw ConfigError("two-action gradient step requires m=2, n=1");
  const std::vector<double> u = spec.PayoffVector(Player::X);
  const std::vector<double> v = spec.PayoffVector(Player::Y);
  const double base_u = Ust2x1FirstAction(x, y, u);
  const double base_v = Ust2x1FirstAction(x, y, v);

  std::array<double, 4> dx{}, dy{};
  for (int i = 0; i < 4; ++i) {
    std::array<double, 4> xp = x;
    xp[i] += gamma;  // bare coordinate shift, no renormalization
    dx[i] = (1.0 - x[i]) * (Ust2x1FirstAction(xp, y, u) - base_u) / gamma;

    std::array<double, 4> yp = y;
    yp[i] += gamma;
    dy[i] = (1.0 - y[i]) * (Ust2x1FirstAction(x, yp, v) - base_v) / gamma;
  }

  int clamps = 0;
  for (int i = 0; i < 4; ++i) {
    x[i] *= 1.0 + eta * dx[i];
    y[i] *= 1.0 + eta * dy[i];
    for (double* c : {&x[i], &y[i]}) {
      if (*c < eps) {
        *c = eps;
        ++clamps;
      } else if (*c > 1.0 - eps) {
        *c = 1.0 - eps;
        ++clamps;
      }
    }
  }
  return clamps;
}

FieldEvaluation MmrdField(const StrategyProfile& x, const StrategyProfile& y,
                          const GameSpec& spec, const PiOptions& opt) {
  MarkovSystem sys(x, y, spec);
  const std::size_t N = spec.N();
  const int m = spec.m;

  FieldEvaluation f;
  f.dx.assign(N * m, 0.0);
  f.dy.assign(N * m, 0.0);

  std::vector<double> pi_a(m);
  for (std::size_t s = 0; s < N; ++s) {
    for (int a = 0; a < m; ++a)
      pi_a[a] = sys.Pi(ActionConditionedDistribution(a, s, y, spec), Player::X, opt);
    double mean = 0.0;
    for (int a = 0; a < m; ++a) mean += x.At(s, a) * pi_a[a];
    for (int a = 0; a < m; ++a) f.dx[s * m + a] = sys.pst.p[s] * x.At(s, a) * (pi_a[a] - mean);

    for (int b = 0; b < m; ++b)
      pi_a[b] = sys.Pi(ActionConditionedDistributionY(b, s, x, spec), Player::Y, opt);
    mean = 0.0;
    for (int b = 0; b < m; ++b) mean += y.At(s, b) * pi_a[b];
    for (int b = 0; b < m; ++b) f.dy[s * m + b] = sys.pst.p[s] * y.At(s, b) * (pi_a[b] - mean);
  }
  return f;
}

FieldEvaluation MmgaField(const StrategyProfile& x, const StrategyProfile& y,
                          const GameSpec& spec, GradientMode mode, double gamma,
                          const PiOptions& opt) {
  const GradientField gx = (mode == GradientMode::Exact)
                               ? PayoffGradientExact(x, y, spec, Player::X, opt)
                               : PayoffGradientFd(x, y, spec, gamma, Player::X);
  const GradientField gy = (mode == GradientMode::Exact)
                               ? PayoffGradientExact(x, y, spec, Player::Y, opt)
                               : PayoffGradientFd(x, y, spec, gamma, Player::Y);

  FieldEvaluation f;
  f.dx.resize(x.probs.size());
  f.dy.resize(y.probs.size());
  for (std::size_t i = 0; i < f.dx.size(); ++i) f.dx[i] = x.probs[i] * gx.g[i];
  for (std::size_t i = 0; i < f.dy.size(); ++i) f.dy[i] = y.probs[i] * gy.g[i];
  return f;
}

IntegrationResult Rk4Integrate(StrategyProfile x, StrategyProfile y, const JointFieldFn& field,
                               const Rk4Options& opt, const TrajectoryObserver& observer,
                               const ClampLogger& clamp_log) {
  if (opt.h <= 0.0) throw ConfigError("integrator step size must be positive");
  if (opt.record_every == 0) throw ConfigError("record_every must be at least 1");
  const auto n_steps = static_cast<std::size_t>(std::llround(opt.t_max / opt.h));

  IntegrationResult res;
  res.x = x;
  res.y = y;

  // stage evaluation keeps the field inputs interior; stage clamps count
  // toward the step's clamp total
  int step_clamps = 0;
  auto eval = [&](StrategyProfile xs, StrategyProfile ys) {
    if (xs.MinEntry() < opt.clamp_eps) step_clamps += xs.ClampInterior(opt.clamp_eps);
    if (ys.MinEntry() < opt.clamp_eps) step_clamps += ys.ClampInterior(opt.clamp_eps);
    return field(xs, ys);
  };
  auto shifted = [](const StrategyProfile& base, const std::vector<double>& d, double c) {
    StrategyProfile out = base;
    for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] += c * d[i];
    return out;
  };

  if (observer) observer(0.0, x, y);

  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * opt.h;
    step_clamps = 0;
    try {
      const FieldEvaluation k1 = eval(x, y);
      const FieldEvaluation k2 = eval(shifted(x, k1.dx, 0.5 * opt.h), shifted(y, k1.dy, 0.5 * opt.h));
      const FieldEvaluation k3 = eval(shifted(x, k2.dx, 0.5 * opt.h), shifted(y, k2.dy, 0.5 * opt.h));
      const FieldEvaluation k4 = eval(shifted(x, k3.dx, opt.h), shifted(y, k3.dy, opt.h));

      const double w = opt.h / 6.0;
      for (std::size_t i = 0; i < x.probs.size(); ++i)
        x.probs[i] += w * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
      for (std::size_t i = 0; i < y.probs.size(); ++i)
        y.probs[i] += w * (k1.dy[i] + 2.0 * k2.dy[i] + 2.0 * k3.dy[i] + k4.dy[i]);

      for (std::size_t s = 0; s < x.num_states; ++s) x.NormalizeRow(s);
      for (std::size_t s = 0; s < y.num_states; ++s) y.NormalizeRow(s);
      if (x.MinEntry() < opt.clamp_eps) step_clamps += x.ClampInterior(opt.clamp_eps);
      if (y.MinEntry() < opt.clamp_eps) step_clamps += y.ClampInterior(opt.clamp_eps);
      for (double p : x.probs)
        if (!std::isfinite(p)) throw NumericalError("integrator produced non-finite coordinates");
      for (double p : y.probs)
        if (!std::isfinite(p)) throw NumericalError("integrator produced non-finite coordinates");
    } catch (const std::runtime_error& err) {
      res.completed = false;
      res.failure = err.what();
      break;
    }

    res.x = x;
    res.y = y;
    res.steps = k;
    res.clamp_events += step_clamps;
    if (step_clamps > 0 && clamp_log) clamp_log(t, step_clamps);
    if (observer && (k % opt.record_every == 0 || k == n_steps)) observer(t, x, y);
  }
  return res;
}

}  // namespace mmg
