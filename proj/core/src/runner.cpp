#include "mmgames/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mmgames/dynamics.hpp"
#include "mmgames/errors.hpp"
#include "mmgames/markov.hpp"
#include "mmgames/perturbation.hpp"

namespace mmg {

namespace {

// 17 significant digits round-trip doubles exactly
std::string G17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// central-difference probe for the metric Jacobian field; small enough that
// the second differencing at the Jacobian step stays quiet
constexpr double kJacGradientStep = 1e-7;

// at most this many per-event clamp lines per trajectory; the totals line
// always carries the full count
constexpr int kClampLogCap = 200;

std::string FormatVec4(const Vec4& v) {
  std::string s = "(";
  for (int i = 0; i < 4; ++i) s += (i ? " " : "") + G17(v[i]);
  return s + ")";
}

StrategyProfile ProfileFromCoords(const std::vector<double>& coords, std::size_t num_states,
                                  int m) {
  StrategyProfile p(num_states, m, 0.0);
  p.probs = coords;
  return p;
}

Vec4 PayoffVec4(const GameSpec& game) {
  return {game.payoff_x[0], game.payoff_x[1], game.payoff_x[2], game.payoff_x[3]};
}

// which metric columns a trajectory carries and how to compute them
struct MetricsPlan {
  bool kl = false;
  StrategyProfile kl_ref;
  bool max_eig = false;
  std::size_t max_eig_every = 1;
  bool modulus = false;
  double jac_step = 1e-6;
  JointFieldFn jac_field;

  MetricsPlan Companion() const {  // reference/comparison runs drop max_eig
    MetricsPlan p = *this;
    p.max_eig = false;
    p.jac_field = nullptr;
    return p;
  }
};

FieldEvaluation CentralGradientField(const StrategyProfile& x, const StrategyProfile& y,
                                     const GameSpec& game) {
  const GradientField gx = PayoffGradientCentralFd(x, y, game, kJacGradientStep, Player::X);
  const GradientField gy = PayoffGradientCentralFd(x, y, game, kJacGradientStep, Player::Y);
  FieldEvaluation f;
  f.dx.resize(x.probs.size());
  f.dy.resize(y.probs.size());
  for (std::size_t i = 0; i < f.dx.size(); ++i) f.dx[i] = x.probs[i] * gx.g[i];
  for (std::size_t i = 0; i < f.dy.size(); ++i) f.dy[i] = y.probs[i] * gy.g[i];
  return f;
}

MetricsPlan BuildMetricsPlan(const ExperimentConfig& cfg, const GameSpec& game) {
  MetricsPlan plan;
  if (cfg.kl_reference == "nash2x1") {
    plan.kl = true;
    plan.kl_ref = Nash2x1(PayoffVec4(game)).XProfile();
  } else if (cfg.kl_reference == "uniform") {
    plan.kl = true;
    plan.kl_ref = StrategyProfile::Uniform(game);
  }
  if (cfg.max_eig_every > 0) {
    plan.max_eig = true;
    plan.max_eig_every = cfg.max_eig_every;
    plan.modulus = cfg.max_eig_mode == "modulus";
    plan.jac_step = cfg.max_eig_fd_step;
    plan.jac_field = [game](const StrategyProfile& xs, const StrategyProfile& ys) {
      return CentralGradientField(xs, ys, game);
    };
  }
  return plan;
}

// records trajectory samples and their metrics, logging metric failures
class Recorder {
 public:
  Recorder(Trajectory& out, const GameSpec& game, const MetricsPlan& plan,
           std::vector<std::string>& log, std::string tag)
      : out_(out), game_(game), plan_(plan), log_(log), tag_(std::move(tag)),
        u_(game.PayoffVector(Player::X)) {}

  void Record(double t, const StrategyProfile& x, const StrategyProfile& y) {
    TrajectoryPoint pt;
    pt.t = t;
    pt.x = x.probs;
    pt.y = y.probs;
    pt.metrics.t = t;
    pt.metrics.min_prob = x.MinEntry();
    try {
      pt.metrics.u_st = StationaryPayoff(Stationary(x, y, game_), u_);
    } catch (const NumericalError& err) {
      log_.push_back(tag_ + "metric u_st failed at t=" + G17(t) + ": " + err.what());
    }
    if (plan_.kl) {
      try {
        pt.metrics.kl = KlFromNash(plan_.kl_ref, x);
      } catch (const NumericalError& err) {
        log_.push_back(tag_ + "metric kl failed at t=" + G17(t) + ": " + err.what());
      }
    }
    if (plan_.max_eig && sample_idx_ % plan_.max_eig_every == 0) {
      try {
        pt.metrics.max_eig =
            MaxJacobianEigenvalue(x, y, plan_.jac_field, plan_.jac_step, plan_.modulus);
      } catch (const std::runtime_error& err) {
        log_.push_back(tag_ + "metric max_eig failed at t=" + G17(t) + ": " + err.what());
      }
    }
    ++sample_idx_;
    out_.points.push_back(std::move(pt));
  }

 private:
  Trajectory& out_;
  const GameSpec& game_;
  const MetricsPlan& plan_;
  std::vector<std::string>& log_;
  std::string tag_;
  std::vector<double> u_;
  std::size_t sample_idx_ = 0;
};

JointFieldFn ExactMmgaFieldFn(const GameSpec& game) {
  return [game](const StrategyProfile& x, const StrategyProfile& y) {
    return MmgaField(x, y, game, GradientMode::Exact);
  };
}

JointFieldFn ApproxFieldFn(const GameSpec& game, int order) {
  const ExpansionConstants consts(PayoffVec4(game));
  return [consts, order](const StrategyProfile& x, const StrategyProfile& y) {
    DeviationState d;
    for (std::size_t i = 0; i < 4; ++i) {
      d.delta[i] = x.At(i, 0) - consts.nash.x_star;
      d.epsilon[i] = y.At(i, 0) - consts.nash.y_star;
    }
    const DeviationRates r = ApproxField(d, order, consts);
    FieldEvaluation f;
    f.dx.assign(8, 0.0);
    f.dy.assign(8, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      f.dx[2 * i] = r.ddot[i];
      f.dx[2 * i + 1] = -r.ddot[i];
      f.dy[2 * i] = r.edot[i];
      f.dy[2 * i + 1] = -r.edot[i];
    }
    return f;
  };
}

Trajectory RunContinuous(const StrategyProfile& x0, const StrategyProfile& y0,
                         const GameSpec& game, const ExperimentConfig& cfg,
                         const JointFieldFn& field, const MetricsPlan& plan,
                         std::vector<std::string>& log, const std::string& tag) {
  Trajectory traj;
  Recorder rec(traj, game, plan, log, tag);
  Rk4Options opt;
  opt.h = cfg.step_size;
  opt.t_max = cfg.t_max;
  opt.record_every = cfg.record_every;

  int clamp_lines = 0;
  IntegrationResult res = Rk4Integrate(
      x0, y0, field, opt,
      [&](double t, const StrategyProfile& x, const StrategyProfile& y) { rec.Record(t, x, y); },
      [&](double t, int count) {
        if (clamp_lines++ < kClampLogCap)
          log.push_back(tag + "clamp: t=" + G17(t) + " entries=" + std::to_string(count));
      });
  if (clamp_lines > kClampLogCap)
    log.push_back(tag + "clamp: " + std::to_string(clamp_lines - kClampLogCap) +
                  " further events suppressed");
  if (res.clamp_events > 0)
    log.push_back(tag + "clamps total: " + std::to_string(res.clamp_events));

  traj.completed = res.completed;
  traj.failure = res.failure;
  if (!res.completed)
    log.push_back(tag + "status: aborted after " + std::to_string(res.steps) + " steps: " +
                  res.failure);
  else
    log.push_back(tag + "status: completed " + std::to_string(res.steps) + " steps");
  return traj;
}

Trajectory RunDiscretized(const StrategyProfile& x0, const StrategyProfile& y0,
                          const GameSpec& game, const ExperimentConfig& cfg,
                          const MetricsPlan& plan, std::vector<std::string>& log,
                          const std::string& tag) {
  Trajectory traj;
  Recorder rec(traj, game, plan, log, tag);
  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_max / cfg.eta));
  const bool sampled = cfg.algorithm == "mmrd";

  StrategyProfile x = x0, y = y0;
  JointState js;
  Rng play_rng(cfg.seed, 1);
  if (sampled) {
    js.x = x0;
    js.y = y0;
    js.current_state = play_rng.UInt(game.N());
    log.push_back(tag + "initial memorized state: " + std::to_string(js.current_state));
  }

  rec.Record(0.0, sampled ? js.x : x, sampled ? js.y : y);
  int clamp_lines = 0;
  long long clamp_total = 0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.eta;
    int clamps = 0;
    try {
      if (sampled)
        clamps = MmrdStep(js, game, cfg.eta, play_rng).clamps;
      else
        clamps = MmgaStep(x, y, game, cfg.eta, cfg.gamma);
    } catch (const NumericalError& err) {
      traj.completed = false;
      traj.failure = err.what();
      log.push_back(tag + "status: aborted at t=" + G17(t) + ": " + err.what());
      return traj;
    }
    if (clamps > 0) {
      clamp_total += clamps;
      if (clamp_lines++ < kClampLogCap)
        log.push_back(tag + "clamp: t=" + G17(t) + " entries=" + std::to_string(clamps));
    }
    if (k % cfg.record_every == 0 || k == steps)
      rec.Record(t, sampled ? js.x : x, sampled ? js.y : y);
  }
  if (clamp_lines > kClampLogCap)
    log.push_back(tag + "clamp: " + std::to_string(clamp_lines - kClampLogCap) +
                  " further events suppressed");
  if (clamp_total > 0) log.push_back(tag + "clamps total: " + std::to_string(clamp_total));
  log.push_back(tag + "status: completed " + std::to_string(steps) + " steps");
  return traj;
}

Trajectory RunOne(const StrategyProfile& x0, const StrategyProfile& y0, const GameSpec& game,
                  const ExperimentConfig& cfg, const MetricsPlan& plan,
                  std::vector<std::string>& log, const std::string& tag) {
  if (cfg.algorithm == "continuous-mmga")
    return RunContinuous(x0, y0, game, cfg, ExactMmgaFieldFn(game), plan, log, tag);
  if (cfg.algorithm.rfind("approx-", 0) == 0) {
    const int order = cfg.algorithm.back() - '0';
    return RunContinuous(x0, y0, game, cfg, ApproxFieldFn(game, order), plan, log, tag);
  }
  return RunDiscretized(x0, y0, game, cfg, plan, log, tag);
}

DeviationState DeviationsOf(const TrajectoryPoint& pt, const NashPoint2x1& nash) {
  DeviationState d;
  for (std::size_t i = 0; i < 4; ++i) {
    d.delta[i] = pt.x[2 * i] - nash.x_star;
    d.epsilon[i] = pt.y[2 * i] - nash.y_star;
  }
  return d;
}

std::string OutStem(const std::string& out) {
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out;
  return out.substr(0, dot);
}

void WriteTrajectoryCsv(const std::string& path, const Trajectory& traj, const GameSpec& game,
                        bool with_kl, bool with_distance, bool with_max_eig,
                        const std::vector<const ComparisonRun*>& errs) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");

  f << "t";
  for (std::size_t s = 0; s < game.N(); ++s)
    for (int a = 0; a < game.m; ++a) f << ",x_s" << s << "_a" << a;
  for (std::size_t s = 0; s < game.N(); ++s)
    for (int b = 0; b < game.m; ++b) f << ",y_s" << s << "_a" << b;
  f << ",u_st,min_prob";
  if (with_kl) f << ",kl";
  if (with_distance) f << ",distance";
  if (with_max_eig) f << ",max_eig";
  for (const ComparisonRun* c : errs) f << ",err" << c->order;
  f << "\n";

  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const TrajectoryPoint& pt = traj.points[i];
    f << G17(pt.t);
    for (double v : pt.x) f << ',' << G17(v);
    for (double v : pt.y) f << ',' << G17(v);
    f << ',' << G17(pt.metrics.u_st) << ',' << G17(pt.metrics.min_prob);
    if (with_kl) f << ',' << G17(pt.metrics.kl);
    if (with_distance) f << ',' << G17(pt.metrics.distance);
    if (with_max_eig) f << ',' << G17(pt.metrics.max_eig);
    for (const ComparisonRun* c : errs)
      f << ',' << G17(i < c->error.size() ? c->error[i]
                                          : std::numeric_limits<double>::quiet_NaN());
    f << "\n";
  }
}

}  // namespace

std::pair<StrategyProfile, StrategyProfile> MakeInitialProfiles(const InitSpec& init,
                                                                const GameSpec& game, Rng& rng) {
  if (init.kind == "constant") {
    return {StrategyProfile::ConstantFirstAction(game, init.x_value),
            StrategyProfile::ConstantFirstAction(game, init.y_value)};
  }
  if (init.kind == "explicit") {
    StrategyProfile x(game.N(), game.m, 0.0), y(game.N(), game.m, 0.0);
    x.probs = init.x_rows;
    y.probs = init.y_rows;
    x.CheckValid(1e-6);
    y.CheckValid(1e-6);
    return {Norm(std::move(x)), Norm(std::move(y))};
  }
  if (init.kind == "nash-plus-delta") {
    const NashPoint2x1 nash = Nash2x1(PayoffVec4(game));
    Vec4 delta{}, epsilon{};
    if (!init.delta.empty()) {
      std::copy(init.delta.begin(), init.delta.end(), delta.begin());
      if (!init.epsilon.empty())
        std::copy(init.epsilon.begin(), init.epsilon.end(), epsilon.begin());
      else
        epsilon = delta;
    } else {
      // default draw: delta_i = epsilon_i uniform in [-scale, scale]
      for (int i = 0; i < 4; ++i) delta[i] = rng.Uniform(-init.delta_scale, init.delta_scale);
      epsilon = delta;
    }
    StrategyProfile x(4, 2, 0.0), y(4, 2, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      const double xi = nash.x_star + delta[i];
      const double yi = nash.y_star + epsilon[i];
      if (!(xi > 0.0 && xi < 1.0 && yi > 0.0 && yi < 1.0))
        throw ConfigError("init.delta: deviation leaves (0,1) around the equilibrium (x*=" +
                          G17(nash.x_star) + ", y*=" + G17(nash.y_star) + ")");
      x.At(i, 0) = xi;
      x.At(i, 1) = 1.0 - xi;
      y.At(i, 0) = yi;
      y.At(i, 1) = 1.0 - yi;
    }
    return {x, y};
  }
  if (init.kind == "random-interior") {
    StrategyProfile x(game.N(), game.m, 0.0), y(game.N(), game.m, 0.0);
    for (std::size_t s = 0; s < game.N(); ++s) {
      const std::vector<double> xr = rng.SimplexInterior(game.m);
      const std::vector<double> yr = rng.SimplexInterior(game.m);
      for (int a = 0; a < game.m; ++a) {
        x.At(s, a) = xr[a];
        y.At(s, a) = yr[a];
      }
    }
    return {x, y};
  }
  throw ConfigError("unknown init kind '" + init.kind + "'");
}

RunResult RunExperiment(const ExperimentConfig& cfg) {
  const GameSpec game = cfg.Game();
  RunResult out;

  {
    std::ostringstream head;
    head << "run: algorithm=" << cfg.algorithm << " m=" << game.m << " n=" << game.n
         << " zero_sum=" << (game.zero_sum ? "true" : "false") << " seed=" << cfg.seed
         << " t_max=" << G17(cfg.t_max);
    out.log_lines.push_back(head.str());
  }

  const MetricsPlan plan = BuildMetricsPlan(cfg, game);
  Rng init_rng(cfg.seed, 0);
  const auto [x0, y0] = MakeInitialProfiles(cfg.init, game, init_rng);
  out.log_lines.push_back("init: kind=" + cfg.init.kind);
  if (cfg.init.kind == "nash-plus-delta") {
    const NashPoint2x1 nash = Nash2x1(PayoffVec4(game));
    const DeviationState d = DeviationCoords(
        {x0.At(0, 0), x0.At(1, 0), x0.At(2, 0), x0.At(3, 0)},
        {y0.At(0, 0), y0.At(1, 0), y0.At(2, 0), y0.At(3, 0)}, nash);
    out.log_lines.push_back("init: delta=" + FormatVec4(d.delta) +
                            " epsilon=" + FormatVec4(d.epsilon));
  }

  out.main = RunOne(x0, y0, game, cfg, plan, out.log_lines, "main: ");

  if (cfg.has_reference) {
    out.has_reference = true;
    Rng ref_rng(cfg.seed, 0);  // common random numbers with the main init
    const auto [rx0, ry0] = MakeInitialProfiles(cfg.reference, game, ref_rng);
    out.log_lines.push_back("reference: kind=" + cfg.reference.kind);
    out.reference =
        RunOne(rx0, ry0, game, cfg, plan.Companion(), out.log_lines, "reference: ");

    const std::size_t shared = std::min(out.main.points.size(), out.reference.points.size());
    for (std::size_t i = 0; i < shared; ++i) {
      const StrategyProfile mx = ProfileFromCoords(out.main.points[i].x, game.N(), game.m);
      const StrategyProfile rx = ProfileFromCoords(out.reference.points[i].x, game.N(), game.m);
      out.main.points[i].metrics.distance = StrategyDistance(mx, rx);
    }
  }

  for (int order : cfg.compare_orders) {
    ComparisonRun cmp;
    cmp.order = order;
    const std::string tag = "approx" + std::to_string(order) + ": ";
    cmp.trajectory = RunContinuous(x0, y0, game, cfg, ApproxFieldFn(game, order),
                                   plan.Companion(), out.log_lines, tag);
    const NashPoint2x1 nash = Nash2x1(PayoffVec4(game));
    const std::size_t shared =
        std::min(out.main.points.size(), cmp.trajectory.points.size());
    cmp.error.reserve(shared);
    for (std::size_t i = 0; i < shared; ++i)
      cmp.error.push_back(ApproxError(DeviationsOf(out.main.points[i], nash),
                                      DeviationsOf(cmp.trajectory.points[i], nash)));
    out.comparisons.push_back(std::move(cmp));
  }

  return out;
}

std::vector<std::string> WriteOutputs(const RunResult& result, const ExperimentConfig& cfg) {
  const GameSpec game = cfg.Game();
  const bool with_kl = cfg.kl_reference != "none";
  const std::string stem = OutStem(cfg.out);
  std::vector<std::string> paths;

  std::vector<const ComparisonRun*> errs;
  errs.reserve(result.comparisons.size());
  for (const ComparisonRun& c : result.comparisons) errs.push_back(&c);

  WriteTrajectoryCsv(cfg.out, result.main, game, with_kl, result.has_reference,
                     cfg.max_eig_every > 0, errs);
  paths.push_back(cfg.out);

  if (result.has_reference) {
    const std::string path = stem + "_reference.csv";
    WriteTrajectoryCsv(path, result.reference, game, with_kl, false, false, {});
    paths.push_back(path);
  }
  for (const ComparisonRun& c : result.comparisons) {
    const std::string path = stem + "_approx" + std::to_string(c.order) + ".csv";
    WriteTrajectoryCsv(path, c.trajectory, game, with_kl, false, false, {});
    paths.push_back(path);
  }

  const std::string log_path = cfg.out + ".log";
  std::ofstream log(log_path);
  if (!log) throw ConfigError("cannot open log file '" + log_path + "'");
  for (const std::string& line : result.log_lines) log << line << "\n";
  paths.push_back(log_path);
  return paths;
}

CsvTable ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file '" + path + "'");
  std::istringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    while (std::getline(cells, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != table.header.size())
      throw ConfigError("CSV row width mismatch in '" + path + "'");
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mmg
