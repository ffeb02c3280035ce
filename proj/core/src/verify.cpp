#include "mmgames/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include "mmgames/dynamics.hpp"
#include "mmgames/errors.hpp"
#include "mmgames/markov.hpp"
#include "mmgames/perturbation.hpp"
#include "mmgames/rng.hpp"

namespace mmg {

namespace {

constexpr double kEquivExactTol = 1e-6;
constexpr double kEquivFdTol = 1e-4;
constexpr double kStationaryTol = 1e-9;
constexpr double kFlatTol = 1e-10;
constexpr double kGridTol = 1e-9;
constexpr double kExploitMin = 1e-6;
constexpr double kGradientRelTol = 1e-6;

std::string Sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct Trial {
  bool ok = true;
  bool gating = true;
  double gap = 0.0;
  std::string line;
};

// deterministic fan-out: trial i depends only on Rng(seed, i), and results
// land in slot i, so the report is identical for any worker count
std::vector<Trial> RunTrials(std::size_t count, const std::function<Trial(std::size_t)>& fn) {
  std::vector<Trial> out(count);
  auto guarded = [&](std::size_t i) {
    try {
      out[i] = fn(i);
    } catch (const std::exception& err) {
      out[i].ok = false;
      out[i].line = "trial " + std::to_string(i) + ": exception: " + err.what();
    }
  };
  const int workers = WorkerCount(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) guarded(i);
    });
  for (std::thread& t : pool) t.join();
  return out;
}

VerifyReport Collect(const std::string& suite, std::vector<Trial> trials) {
  VerifyReport rep;
  rep.suite = suite;
  rep.pass = true;
  std::size_t gating = 0;
  for (Trial& t : trials) {
    if (t.gating) {
      ++gating;
      rep.pass = rep.pass && t.ok;
      rep.worst_gap = std::max(rep.worst_gap, t.gap);
    }
    rep.lines.push_back(std::move(t.line));
  }
  rep.vacuous = gating == 0;
  std::ostringstream s;
  s << suite << ": " << (rep.pass ? "PASS" : "FAIL") << " (" << gating << " gating trials"
    << (rep.vacuous ? ", vacuous" : "") << ", worst gap " << Sci(rep.worst_gap) << ")";
  rep.summary = s.str();
  return rep;
}

StrategyProfile RandomProfile(Rng& rng, const GameSpec& game) {
  StrategyProfile p(game.N(), game.m, 0.0);
  for (std::size_t s = 0; s < game.N(); ++s) {
    const std::vector<double> row = rng.SimplexInterior(game.m);
    for (int a = 0; a < game.m; ++a) p.At(s, a) = row[a];
  }
  return p;
}

double MaxFieldGap(const FieldEvaluation& a, const FieldEvaluation& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.dx.size(); ++i) gap = std::max(gap, std::fabs(a.dx[i] - b.dx[i]));
  for (std::size_t i = 0; i < a.dy.size(); ++i) gap = std::max(gap, std::fabs(a.dy[i] - b.dy[i]));
  return gap;
}

double L2Gap(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

// ---------------------------------------------------------------- nash ----

double FlatPayoff2x1(const Vec4& xfa, const Vec4& yfa, const GameSpec& game) {
  StrategyProfile x(4, 2, 0.0), y(4, 2, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    x.At(i, 0) = xfa[i];
    x.At(i, 1) = 1.0 - xfa[i];
    y.At(i, 0) = yfa[i];
    y.At(i, 1) = 1.0 - yfa[i];
  }
  return StationaryPayoff(StationaryClosedForm2x1(x, y), game.PayoffVector(Player::X));
}

struct NashCheck {
  double flat_gap = 0.0;      // worst |u^st(x* 1, y) - u*| over random y
  double grid_gain = 0.0;     // best unilateral improvement on the grid
  double exploit_floor = 0.0; // weakest exploitability over row perturbations
  bool exploit_ok = true;
};

NashCheck CheckNashGame(const Vec4& u, const GameSpec& game, double grid_step, Rng& rng) {
  const NashPoint2x1 nash = Nash2x1(u);
  const Vec4 xs{nash.x_star, nash.x_star, nash.x_star, nash.x_star};
  const Vec4 ys{nash.y_star, nash.y_star, nash.y_star, nash.y_star};
  NashCheck out;

  for (int k = 0; k < 20; ++k) {
    Vec4 y;
    for (int i = 0; i < 4; ++i) y[i] = rng.SimplexInterior(2)[0];
    out.flat_gap = std::max(out.flat_gap, std::fabs(FlatPayoff2x1(xs, y, game) - nash.u_star));
  }

  // coordinatewise grid: one coordinate deviates, the rest stay put;
  // X profits from u^st above u*, Y from below
  for (int i = 0; i < 4; ++i) {
    for (double g = grid_step; g < 1.0 - grid_step / 2; g += grid_step) {
      Vec4 xd = xs, yd = ys;
      xd[i] = g;
      yd[i] = g;
      out.grid_gain = std::max(out.grid_gain, FlatPayoff2x1(xd, ys, game) - nash.u_star);
      out.grid_gain = std::max(out.grid_gain, nash.u_star - FlatPayoff2x1(xs, yd, game));
    }
  }

  // every single-row perturbation of x* 1 must be exploitable: some y
  // (scanned over near-vertex and equilibrium rows) pushes u^st below u*
  const double lo = 0.01, hi = 0.99;
  out.exploit_floor = 1e300;
  for (int i = 0; i < 4; ++i) {
    for (double sign : {-1.0, 1.0}) {
      Vec4 xd = xs;
      xd[i] = std::clamp(xd[i] + 0.1 * sign, lo, hi);
      if (xd[i] == xs[i]) continue;
      double best = 1e300;
      Vec4 y;
      for (int c = 0; c < 81; ++c) {
        int code = c;
        for (int j = 0; j < 4; ++j) {
          const int digit = code % 3;
          code /= 3;
          y[j] = digit == 0 ? lo : digit == 1 ? nash.y_star : hi;
        }
        best = std::min(best, FlatPayoff2x1(xd, y, game));
      }
      const double exploit = nash.u_star - best;
      out.exploit_floor = std::min(out.exploit_floor, exploit);
      out.exploit_ok = out.exploit_ok && exploit > kExploitMin;
    }
  }
  return out;
}

}  // namespace

int WorkerCount(std::size_t trial_count) {
  int workers = 0;
  if (const char* env = std::getenv("MMG_WORKERS")) workers = std::atoi(env);
  if (workers <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    workers = static_cast<int>(std::min(hc == 0 ? 1u : hc, 16u));
  }
  if (static_cast<std::size_t>(workers) > trial_count)
    workers = static_cast<int>(trial_count == 0 ? 1 : trial_count);
  return std::max(workers, 1);
}

VerifyReport VerifyEquivalence(int trials, int m_max, int n_max, std::uint64_t seed) {
  if (m_max < 2 || m_max > 3 || n_max < 1 || n_max > 2)
    throw ConfigError("verify equivalence: m_max must be 2..3 and n_max 1..2");
  auto trial = [&](std::size_t i) {
    Rng rng(seed, i);
    const int m = 2 + static_cast<int>(rng.UInt(m_max - 1));
    const int n = 1 + static_cast<int>(rng.UInt(n_max));
    std::vector<double> payoff(static_cast<std::size_t>(m) * m);
    for (double& v : payoff) v = rng.Uniform(-2.0, 2.0);
    const GameSpec game(m, n, payoff);  // zero-sum
    const StrategyProfile x = RandomProfile(rng, game);
    const StrategyProfile y = RandomProfile(rng, game);

    const FieldEvaluation rd = MmrdField(x, y, game);
    const FieldEvaluation exact = MmgaField(x, y, game, GradientMode::Exact);
    const FieldEvaluation fd = MmgaField(x, y, game, GradientMode::FiniteDifference, 1e-6);
    const double exact_gap = MaxFieldGap(rd, exact);
    const double fd_gap = MaxFieldGap(rd, fd);

    Trial t;
    t.ok = exact_gap <= kEquivExactTol && fd_gap <= kEquivFdTol;
    t.gap = std::max(exact_gap, fd_gap);
    t.line = "trial " + std::to_string(i) + ": m=" + std::to_string(m) +
             " n=" + std::to_string(n) + " exact_gap=" + Sci(exact_gap) +
             " fd_gap=" + Sci(fd_gap) + (t.ok ? " ok" : " FAIL");
    return t;
  };
  return Collect("equivalence", RunTrials(static_cast<std::size_t>(std::max(trials, 0)), trial));
}

VerifyReport VerifyStationary(int trials, std::uint64_t seed) {
  const std::size_t gating = static_cast<std::size_t>(std::max(trials, 0));
  const std::size_t total = gating == 0 ? 0 : gating + 2;  // two stress rows
  const GameSpec game = GameSpec::MatchingPennies();
  auto trial = [&](std::size_t i) {
    Rng rng(seed, i);
    const bool stress = i >= gating;
    StrategyProfile x(4, 2, 0.0), y(4, 2, 0.0);
    for (std::size_t s = 0; s < 4; ++s) {
      if (stress) {
        // one action per row nearly extinct
        const double xe = 1e-6, ye = 1e-6;
        const int ax = static_cast<int>(rng.UInt(2)), ay = static_cast<int>(rng.UInt(2));
        x.At(s, ax) = xe;
        x.At(s, 1 - ax) = 1.0 - xe;
        y.At(s, ay) = ye;
        y.At(s, 1 - ay) = 1.0 - ye;
      } else {
        const std::vector<double> xr = rng.SimplexInterior(2), yr = rng.SimplexInterior(2);
        x.At(s, 0) = xr[0];
        x.At(s, 1) = xr[1];
        y.At(s, 0) = yr[0];
        y.At(s, 1) = yr[1];
      }
    }

    Trial t;
    t.gating = !stress;
    const StationaryDistribution closed = StationaryClosedForm2x1(x, y);
    const TransitionMatrix M(x, y, game);
    try {
      const StationaryDistribution power = StationaryPower(M);
      const double gap = L2Gap(closed.p, power.p);
      t.gap = stress ? 0.0 : gap;
      t.ok = stress || gap <= kStationaryTol;
      t.line = std::string(stress ? "stress " : "trial ") + std::to_string(i) +
               ": l2_gap=" + Sci(gap) + " iterations=" + std::to_string(power.iterations) +
               (stress && gap > kStationaryTol ? " flagged" : t.ok ? " ok" : " FAIL");
    } catch (const NumericalError& err) {
      // slow mixing near the boundary: report, gate only regular trials
      t.ok = stress;
      t.line = std::string(stress ? "stress " : "trial ") + std::to_string(i) +
               ": power iteration did not converge (" + err.what() + ")" +
               (stress ? " flagged" : " FAIL");
    }
    return t;
  };
  return Collect("stationary", RunTrials(total, trial));
}

VerifyReport VerifyNash(int trials, double grid_step, std::uint64_t seed) {
  if (!(grid_step > 0.0 && grid_step < 0.5))
    throw ConfigError("verify nash: grid_step must lie in (0, 0.5)");
  const std::size_t gating = static_cast<std::size_t>(std::max(trials, 0));
  // two pinned games and one skipped non-assumption game lead the list
  const std::size_t total = gating == 0 ? 0 : gating + 3;
  auto trial = [&](std::size_t i) {
    Rng rng(seed, i);
    Trial t;
    if (i == 2) {  // dominant pure strategy: assumption fails, skip
      const Vec4 u{1.0, 2.0, -1.0, 0.5};
      t.gating = false;
      t.line = "skip " + std::to_string(i) +
               ": no interior equilibrium (a dominant pure strategy exists), skipped";
      if (Assumption1Check(u)) {
        t.gating = true;
        t.ok = false;
        t.line += " FAIL(assumption check)";
      }
      return t;
    }

    Vec4 u;
    std::string label;
    if (i == 0) {
      u = {1.0, -1.0, -1.0, 1.0};
      label = "matching-pennies";
    } else if (i == 1) {
      u = {3.0, -1.0, -1.0, 1.0};
      label = "pinned";
    } else {
      // no dominant pure strategy by construction; random orientation
      const bool flip = rng.UInt(2) == 1;
      const double a = rng.Uniform(0.5, 2.0), d = rng.Uniform(0.5, 2.0);
      const double b = -rng.Uniform(0.5, 2.0), c = -rng.Uniform(0.5, 2.0);
      u = flip ? Vec4{b, a, d, c} : Vec4{a, b, c, d};
      label = "random";
    }
    const GameSpec game(2, 1, {u[0], u[1], u[2], u[3]});
    const NashPoint2x1 nash = Nash2x1(u);

    if (i == 0) {  // the pinned equilibrium values are exact
      if (nash.x_star != 0.5 || nash.y_star != 0.5 || nash.u_star != 0.0) {
        t.ok = false;
        t.line = "trial 0: matching-pennies equilibrium mismatch FAIL";
        return t;
      }
    }

    const NashCheck chk = CheckNashGame(u, game, grid_step, rng);
    t.ok = chk.flat_gap <= kFlatTol && chk.grid_gain <= kGridTol && chk.exploit_ok;
    t.gap = std::max(chk.flat_gap, chk.grid_gain);
    t.line = "trial " + std::to_string(i) + ": " + label + " x*=" + Sci(nash.x_star) +
             " y*=" + Sci(nash.y_star) + " flat_gap=" + Sci(chk.flat_gap) +
             " grid_gain=" + Sci(chk.grid_gain) + " exploit_floor=" + Sci(chk.exploit_floor) +
             (t.ok ? " ok" : " FAIL");
    return t;
  };
  return Collect("nash", RunTrials(total, trial));
}

VerifyReport VerifyGradient(int trials, std::uint64_t seed) {
  auto trial = [&](std::size_t i) {
    Rng rng(seed, i);
    static constexpr int kShapes[][2] = {{2, 1}, {3, 1}, {2, 2}};
    const auto& shape = kShapes[i % 3];
    const int m = shape[0], n = shape[1];
    std::vector<double> payoff(static_cast<std::size_t>(m) * m);
    for (double& v : payoff) v = rng.Uniform(-2.0, 2.0);
    const GameSpec game(m, n, payoff);
    const StrategyProfile x = RandomProfile(rng, game);
    const StrategyProfile y = RandomProfile(rng, game);

    PiOptions opt;
    opt.tol = 1e-13;
    double rel = 0.0;
    for (Player pl : {Player::X, Player::Y}) {
      const GradientField exact = PayoffGradientExact(x, y, game, pl, opt);
      const GradientField fd = PayoffGradientCentralFd(x, y, game, 1e-5, pl);
      double gap = 0.0, norm = 0.0;
      for (std::size_t k = 0; k < exact.g.size(); ++k) {
        gap = std::max(gap, std::fabs(exact.g[k] - fd.g[k]));
        norm = std::max(norm, std::fabs(exact.g[k]));
      }
      rel = std::max(rel, gap / std::max(norm, 1e-12));
    }

    Trial t;
    t.ok = rel <= kGradientRelTol;
    t.gap = rel;
    t.line = "trial " + std::to_string(i) + ": m=" + std::to_string(m) +
             " n=" + std::to_string(n) + " rel_gap=" + Sci(rel) + (t.ok ? " ok" : " FAIL");
    return t;
  };
  return Collect("gradient", RunTrials(static_cast<std::size_t>(std::max(trials, 0)), trial));
}

}  // namespace mmg
