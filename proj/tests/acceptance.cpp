// Acceptance gate: exercises the library end to end and prints one line per
// criterion. Exit status is nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mmgames/config.hpp"
#include "mmgames/dynamics.hpp"
#include "mmgames/game.hpp"
#include "mmgames/markov.hpp"
#include "mmgames/perturbation.hpp"
#include "mmgames/presets.hpp"
#include "mmgames/runner.hpp"
#include "mmgames/verify.hpp"

using namespace mmg;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double Sec() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string Sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string Fix(double v, int digits = 1) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void Report(int idx, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s - %s\n", idx, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void Criterion(int idx, Fn&& fn) {
  try {
    const std::pair<bool, std::string> r = fn();
    Report(idx, r.first, r.second);
  } catch (const std::exception& err) {
    Report(idx, false, std::string("exception: ") + err.what());
  }
}

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double LeastSquaresSlope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double mx = Mean(xs), my = Mean(ys);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

StrategyProfile TwoActionProfile(const Vec4& first) {
  StrategyProfile p(4, 2, 0.0);
  for (std::size_t s = 0; s < 4; ++s) {
    p.At(s, 0) = first[s];
    p.At(s, 1) = 1.0 - first[s];
  }
  return p;
}

// the reduced flow of the full gradient-ascent dynamics: first-action rates
DeviationRates ReducedExactField(const DeviationState& d, const Vec4& u) {
  const NashPoint2x1 nash = Nash2x1(u);
  const auto [x, y] = StrategiesAt(d, nash);
  const GameSpec spec(2, 1, std::vector<double>(u.begin(), u.end()));
  PiOptions opt;
  opt.tol = 1e-15;
  const FieldEvaluation f =
      MmgaField(TwoActionProfile(x), TwoActionProfile(y), spec, GradientMode::Exact, 1e-6, opt);
  DeviationRates r;
  for (int i = 0; i < 4; ++i) {
    r.ddot[i] = f.dx[static_cast<std::size_t>(i) * 2];
    r.edot[i] = f.dy[static_cast<std::size_t>(i) * 2];
  }
  return r;
}

double MaxGap(const DeviationRates& a, const DeviationRates& b) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    worst = std::max(worst, std::fabs(a.ddot[i] - b.ddot[i]));
    worst = std::max(worst, std::fabs(a.edot[i] - b.edot[i]));
  }
  return worst;
}

const Vec4 kMpPayoff{1.0, -1.0, -1.0, 1.0};

}  // namespace

int main() {
  // criterion 7 shares its full sensitivity run with criterion 10
  ExperimentConfig fig3_cfg;
  RunResult fig3_res;

  Criterion(1, [] {
    Timer t;
    const VerifyReport r = VerifyEquivalence(50, 3, 2, 1);
    const double sec = t.Sec();
    const bool ok = r.pass && !r.vacuous && sec < 60.0;
    return std::make_pair(ok, "replicator vs gradient-ascent field on 50 random games: worst gap " +
                                  Sci(r.worst_gap) + " (exact tol 1e-6, fd tol 1e-4), " +
                                  Fix(sec) + " s");
  });

  Criterion(2, [] {
    Timer t;
    const VerifyReport r = VerifyGradient(20, 1);
    const double sec = t.Sec();
    const bool ok = r.pass && !r.vacuous && sec < 30.0;
    return std::make_pair(ok,
                          "exact stationary-payoff gradient vs central differences on 20 "
                          "instances: worst relative gap " +
                              Sci(r.worst_gap) + " (tol 1e-6), " + Fix(sec) + " s");
  });

  Criterion(3, [] {
    Timer t;
    const VerifyReport r = VerifyStationary(100, 1);
    const double sec = t.Sec();
    const bool ok = r.pass && !r.vacuous && sec < 10.0;
    return std::make_pair(
        ok, "closed-form stationary state vs power iteration on 100 interior instances: worst "
            "l2 gap " +
                Sci(r.worst_gap) + " (tol 1e-9), " + Fix(sec) + " s");
  });

  Criterion(4, [] {
    Timer t;
    const NashPoint2x1 mp = Nash2x1(kMpPayoff);
    const bool exact = mp.x_star == 0.5 && mp.y_star == 0.5 && mp.u_star == 0.0;
    const VerifyReport r = VerifyNash(20, 0.01, 1);
    const double sec = t.Sec();
    const bool ok = exact && r.pass && !r.vacuous && sec < 120.0;
    return std::make_pair(
        ok, std::string("matching-pennies equilibrium (1/2, 1/2, 0) ") +
                (exact ? "exact" : "WRONG") +
                "; flat payoff and 0.01-grid deviation search on 20 random games: worst gap " +
                Sci(r.worst_gap) + ", " + Fix(sec) + " s");
  });

  Criterion(5, [] {
    Timer t;
    // full flow vs its order-1..3 truncations from a shared deviation with
    // max-norm 0.05, integrated to t = 200
    ExperimentConfig cfg;
    cfg.m = 2;
    cfg.n = 1;
    cfg.payoff_x = {1.0, -1.0, -1.0, 1.0};
    cfg.algorithm = "continuous-mmga";
    cfg.step_size = 1e-2;
    cfg.t_max = 200.0;
    cfg.record_every = 10;
    cfg.seed = 1;
    cfg.init.kind = "nash-plus-delta";
    const double s = 0.05 / 0.7;  // direction (0.3, -0.7, 0.5, -0.2) scaled to max 0.05
    cfg.init.delta = {0.3 * s, -0.7 * s, 0.5 * s, -0.2 * s};
    cfg.compare_orders = {1, 2, 3};

    const RunResult res = RunExperiment(cfg);
    bool ok = res.main.completed && res.comparisons.size() == 3;
    std::array<double, 3> avg{};
    for (std::size_t k = 0; k < 3 && ok; ++k) {
      ok = res.comparisons[k].trajectory.completed && !res.comparisons[k].error.empty();
      if (ok) avg[k] = Mean(res.comparisons[k].error);
    }
    ok = ok && avg[2] <= avg[1] && avg[1] <= avg[0];

    // residual of the order-k truncated field shrinks like scale^{k+1}
    const ExpansionConstants c(kMpPayoff);
    const Vec4 d0{0.3, -0.7, 0.5, -0.2};
    const Vec4 e0{-0.4, 0.6, 0.1, -0.8};
    std::array<double, 3> slope{};
    for (int k = 1; k <= 3; ++k) {
      std::vector<double> log_s, log_r;
      for (double scale : {1e-1, 1e-2, 1e-3}) {
        DeviationState d;
        for (int i = 0; i < 4; ++i) {
          d.delta[i] = scale * d0[i];
          d.epsilon[i] = scale * e0[i];
        }
        log_s.push_back(std::log10(scale));
        log_r.push_back(std::log10(MaxGap(ReducedExactField(d, kMpPayoff), ApproxField(d, k, c))));
      }
      slope[k - 1] = LeastSquaresSlope(log_s, log_r);
      ok = ok && slope[k - 1] >= k + 0.5;
    }
    const double sec = t.Sec();
    ok = ok && sec < 120.0;
    return std::make_pair(
        ok, "time-averaged deviation errors " + Sci(avg[0]) + " >= " + Sci(avg[1]) +
                " >= " + Sci(avg[2]) + "; residual slopes " + Fix(slope[0], 2) + "/" +
                Fix(slope[1], 2) + "/" + Fix(slope[2], 2) + " vs floors 1.5/2.5/3.5, " +
                Fix(sec) + " s");
  });

  Criterion(6, [] {
    Timer t;
    const RunResult res = RunExperiment(PresetConfig("figA1"));
    bool ok = res.main.completed && res.comparisons.size() == 1 &&
              res.comparisons[0].trajectory.completed;

    // the order-1 companion circles: per-state squared radius around the
    // equilibrium stays put for the whole horizon
    double drift = 0.0;
    if (ok) {
      const std::vector<TrajectoryPoint>& pts = res.comparisons[0].trajectory.points;
      Vec4 r0{};
      for (std::size_t i = 0; i < 4; ++i) {
        const double dl = pts.front().x[2 * i] - 0.5, ep = pts.front().y[2 * i] - 0.5;
        r0[i] = dl * dl + ep * ep;
      }
      for (const TrajectoryPoint& pt : pts)
        for (std::size_t i = 0; i < 4; ++i) {
          const double dl = pt.x[2 * i] - 0.5, ep = pt.y[2 * i] - 0.5;
          drift = std::max(drift, std::fabs(dl * dl + ep * ep - r0[i]));
        }
      ok = drift <= 1e-6;
    }

    // ... while the full flow spirals outward
    const double kl0 = res.main.points.front().metrics.kl;
    const double klT = res.main.points.back().metrics.kl;
    ok = ok && std::isfinite(kl0) && std::isfinite(klT) && klT > kl0;
    const double sec = t.Sec();
    ok = ok && sec < 120.0;
    return std::make_pair(ok, "order-1 radius drift " + Sci(drift) +
                                  " (tol 1e-6); divergence KL " + Sci(kl0) + " -> " + Sci(klT) +
                                  " over t = 400, " + Fix(sec) + " s");
  });

  Criterion(7, [&fig3_cfg, &fig3_res] {
    Timer t;
    fig3_cfg = PresetConfig("fig3");
    fig3_res = RunExperiment(fig3_cfg);
    const double sec = t.Sec();
    bool ok = fig3_res.main.completed && fig3_res.has_reference &&
              !fig3_res.main.points.empty();
    double d0 = 0.0, dmax = 0.0;
    if (ok) {
      d0 = fig3_res.main.points.front().metrics.distance;
      for (const TrajectoryPoint& pt : fig3_res.main.points)
        dmax = std::max(dmax, pt.metrics.distance);
      ok = std::fabs(d0 - 1.5654403059940517e-3) <= 1e-12 && dmax >= 10.0 * d0;
    }
    ok = ok && sec < 300.0;
    return std::make_pair(ok, "initial logit distance " + Sci(d0) +
                                  " (expected ~1.57e-3), amplified " + Fix(dmax / d0, 0) +
                                  "x within t <= 420, " + Fix(sec) + " s");
  });

  Criterion(8, [] {
    Timer t;
    const RunResult res = RunExperiment(PresetConfig("fig4"));
    bool ok = res.main.completed && !res.main.points.empty();
    double slope = 0.0, lowest = 1.0;
    if (ok) {
      std::vector<double> ts, kls;
      for (const TrajectoryPoint& pt : res.main.points) {
        ts.push_back(pt.t);
        kls.push_back(pt.metrics.kl);
        lowest = std::min(lowest, pt.metrics.min_prob);
      }
      slope = LeastSquaresSlope(ts, kls);
      ok = slope > 0.0 && lowest < 0.01;
    }
    const double sec = t.Sec();
    ok = ok && sec < 300.0;
    return std::make_pair(ok, "KL trend slope " + Sci(slope) +
                                  " (> 0), lowest strategy probability " + Sci(lowest) +
                                  " (< 0.01), " + Fix(sec) + " s");
  });

  Criterion(9, [] {
    Timer t;
    const ExpansionConstants c(kMpPayoff);
    DeviationState d;
    d.delta = {0.05, -0.05, 0.05, -0.05};
    d.epsilon = d.delta;
    const std::array<Vec4, 4> defect2 = HamiltonianDefect(d, c, 2);
    const std::array<Vec4, 4> defect1 = HamiltonianDefect(d, c, 1);
    double worst2 = 0.0, worst1 = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        worst2 = std::max(worst2, std::fabs(defect2[i][j]));
        worst1 = std::max(worst1, std::fabs(defect1[i][j]));
      }
    const double sec = t.Sec();
    const bool ok = worst2 > 1e-6 && worst1 <= 1e-9 && sec < 10.0;
    return std::make_pair(ok, "order-2 integrability defect " + Sci(worst2) +
                                  " (> 1e-6), order-1 defect " + Sci(worst1) +
                                  " (<= 1e-9), " + Fix(sec) + " s");
  });

  Criterion(10, [&fig3_cfg, &fig3_res] {
    Timer t;
    if (fig3_res.main.points.empty()) {  // criterion 7 failed before the run
      fig3_cfg = PresetConfig("fig3");
      fig3_res = RunExperiment(fig3_cfg);
    }
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "mmg_acceptance_out";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    ExperimentConfig first = fig3_cfg;
    first.out = (dir / "fig3_a.csv").string();
    WriteOutputs(fig3_res, first);

    ExperimentConfig second = fig3_cfg;
    second.out = (dir / "fig3_b.csv").string();
    WriteOutputs(RunExperiment(second), second);

    const std::string a = Slurp(dir / "fig3_a.csv");
    const std::string b = Slurp(dir / "fig3_b.csv");
    const bool main_same = !a.empty() && a == b;
    const bool ref_same = Slurp(dir / "fig3_a_reference.csv") == Slurp(dir / "fig3_b_reference.csv");
    std::filesystem::remove_all(dir);
    const double sec = t.Sec();
    const bool ok = main_same && ref_same;
    return std::make_pair(ok, std::string("re-run with the same seed: main CSV ") +
                                  (main_same ? "byte-identical" : "DIFFERS") + " (" +
                                  std::to_string(a.size()) + " bytes), reference CSV " +
                                  (ref_same ? "byte-identical" : "DIFFERS") + ", " + Fix(sec) +
                                  " s");
  });

  if (g_failures > 0) std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
