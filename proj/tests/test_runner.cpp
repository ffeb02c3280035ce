#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mmgames/config.hpp"
#include "mmgames/errors.hpp"
#include "mmgames/perturbation.hpp"
#include "mmgames/presets.hpp"
#include "mmgames/rng.hpp"
#include "mmgames/runner.hpp"
#include "mmgames/verify.hpp"

using namespace mmg;

namespace {

const char* kMpGame =
    "game.m = 2\n"
    "game.n = 1\n"
    "game.payoff_x = 1 -1 -1 1\n";

const char* kRpsGame =
    "game.m = 3\n"
    "game.n = 1\n"
    "game.payoff_x = 0 -1 1  1 0 -1  -1 1 0\n";

bool Contains(const std::string& s, const std::string& needle) {
  return s.find(needle) != std::string::npos;
}

// the ConfigError text for a config, or "" when it validates
std::string ParseErrorOf(const std::string& text) {
  try {
    ParseConfig(text, "t.cfg");
  } catch (const ConfigError& err) {
    return err.what();
  }
  return "";
}

void CheckRejected(const std::string& text, const std::string& needle) {
  const std::string what = ParseErrorOf(text);
  CHECK_MESSAGE(Contains(what, needle),
                "wanted '" << needle << "' in error '" << what << "'");
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool AnyLineContains(const std::vector<std::string>& lines, const std::string& needle) {
  return std::any_of(lines.begin(), lines.end(),
                     [&](const std::string& l) { return Contains(l, needle); });
}

void CheckRowsOnSimplex(const std::vector<double>& coords, int m, double tol) {
  REQUIRE(coords.size() % m == 0);
  for (std::size_t s = 0; s < coords.size() / m; ++s) {
    double sum = 0.0;
    for (int a = 0; a < m; ++a) {
      const double v = coords[s * m + a];
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::fabs(sum - 1.0) <= tol);
  }
}

// Spearman rank correlation with average ranks on ties
std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size(), 0.0);
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  return rank;
}

double SpearmanCorrelation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::vector<double> ra = Ranks(a), rb = Ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(va * vb);
}

std::filesystem::path FreshOutputDir(const std::string& leaf) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config: full text parses into every field") {
  const std::string text =
      "# leading comment and blank line\n"
      "\n"
      "game.m = 2\n"
      "  game.n =\t1\n"
      "game.payoff_x = 1 -1 -1 1   # inline comment\n"
      "game.payoff_y = -1 1 1 -1\n"
      "game.zero_sum = true\n"
      "run.algorithm = continuous-mmga\n"
      "run.eta = 0.25\n"
      "run.gamma = 1e-5\n"
      "run.step_size = 0.005\n"
      "run.t_max = 12.5\n"
      "run.record_every = 7\n"
      "run.seed = 42\n"
      "run.out = out/traj.csv\n"
      "init.kind = nash-plus-delta\n"
      "init.delta = 0.01 -0.02 0.03 -0.04\n"
      "init.epsilon = 0.02 0.01 -0.01 -0.02\n"
      "init.delta_scale = 0.07\n"
      "reference.kind = constant\n"
      "reference.x = 0.6\n"
      "reference.y = 0.4\n"
      "compare.approx_orders = 1 3\n"
      "metrics.kl_reference = nash2x1\n"
      "metrics.max_eig_every = 5\n"
      "metrics.max_eig_mode = modulus\n"
      "metrics.max_eig_fd_step = 1e-7\n";
  const ExperimentConfig cfg = ParseConfig(text, "full.cfg");

  CHECK(cfg.m == 2);
  CHECK(cfg.n == 1);
  CHECK(cfg.payoff_x == std::vector<double>{1.0, -1.0, -1.0, 1.0});
  CHECK(cfg.payoff_y == std::vector<double>{-1.0, 1.0, 1.0, -1.0});
  CHECK(cfg.zero_sum_declared);
  CHECK(cfg.zero_sum_value);
  CHECK(cfg.Game().zero_sum);
  CHECK(cfg.algorithm == "continuous-mmga");
  CHECK(cfg.eta == 0.25);
  CHECK(cfg.gamma == 1e-5);
  CHECK(cfg.step_size == 0.005);
  CHECK(cfg.t_max == 12.5);
  CHECK(cfg.record_every == 7);
  CHECK(cfg.seed == 42);
  CHECK(cfg.out == "out/traj.csv");
  CHECK(cfg.init.kind == "nash-plus-delta");
  CHECK(cfg.init.delta == std::vector<double>{0.01, -0.02, 0.03, -0.04});
  CHECK(cfg.init.epsilon == std::vector<double>{0.02, 0.01, -0.01, -0.02});
  CHECK(cfg.init.delta_scale == 0.07);
  CHECK(cfg.has_reference);
  CHECK(cfg.reference.kind == "constant");
  CHECK(cfg.reference.x_value == 0.6);
  CHECK(cfg.reference.y_value == 0.4);
  CHECK(cfg.compare_orders == std::vector<int>{1, 3});
  CHECK(cfg.kl_reference == "nash2x1");
  CHECK(cfg.max_eig_every == 5);
  CHECK(cfg.max_eig_mode == "modulus");
  CHECK(cfg.max_eig_fd_step == 1e-7);

  // stream overload sees the same text
  std::istringstream iss(text);
  const ExperimentConfig via_stream = ParseConfig(iss, "full.cfg");
  CHECK(via_stream.seed == cfg.seed);
  CHECK(via_stream.compare_orders == cfg.compare_orders);

  // defaults on a minimal config
  const ExperimentConfig min =
      ParseConfig(std::string(kMpGame) + "run.algorithm = mmrd\n", "min.cfg");
  CHECK(min.eta == 1e-3);
  CHECK(min.gamma == 0.0);
  CHECK(min.step_size == 1e-2);
  CHECK(min.t_max == 100.0);
  CHECK(min.record_every == 1);
  CHECK(min.seed == 1);
  CHECK(min.out == "trajectory.csv");
  CHECK(min.init.kind == "constant");
  CHECK(min.init.x_value == 0.5);
  CHECK(!min.has_reference);
  CHECK(min.compare_orders.empty());
  CHECK(min.kl_reference == "none");
  CHECK(min.max_eig_every == 0);
  CHECK(min.max_eig_mode == "real");
  CHECK(min.max_eig_fd_step == 1e-6);
  CHECK(min.payoff_y.empty());
  CHECK(min.Game().zero_sum);
}

TEST_CASE("config: every rejection names its source and key") {
  const std::string mp(kMpGame);
  const std::string rps(kRpsGame);
  const std::string cont = "run.algorithm = continuous-mmga\n";
  const std::string mmga = "run.algorithm = mmga\nrun.gamma = 1e-6\n";

  // line shape
  CheckRejected("game.m 2\n", "t.cfg: line 1: expected key = value");
  CheckRejected("game.m =\n", "line 1: expected key = value");
  CheckRejected(" = 2\n", "line 1: expected key = value");

  // scalar parsing
  CheckRejected("game.m = x\n", "t.cfg: game.m: expected an integer, got 'x'");
  CheckRejected(mp + cont + "run.eta = fast\n", "t.cfg: run.eta: expected a real number, got 'fast'");
  CheckRejected(mp + cont + "game.zero_sum = yes\n", "t.cfg: game.zero_sum: expected true/false, got 'yes'");
  CheckRejected("game.payoff_x = 1 two 3 4\n", "game.payoff_x: expected a real number, got 'two'");
  CheckRejected(mp + cont + "bogus = 1\n", "t.cfg: bogus: unknown key");
  CheckRejected(mp + cont + "init.bogus = 1\n", "t.cfg: init.bogus: unknown init key");
  CheckRejected(mp + cont + "reference.bogus = 1\n", "t.cfg: reference.bogus: unknown reference key");

  // game section
  CheckRejected("game.n = 1\ngame.payoff_x = 1 -1 -1 1\nrun.algorithm = mmrd\n", "game.m: required");
  CheckRejected("game.m = 2\ngame.payoff_x = 1 -1 -1 1\nrun.algorithm = mmrd\n", "game.n: required");
  CheckRejected("game.m = 2\ngame.n = 1\nrun.algorithm = mmrd\n", "game.payoff_x: required");
  CheckRejected("game.m = 2\ngame.n = 1\ngame.payoff_x = 1 -1 -1\nrun.algorithm = mmrd\n",
                "game.payoff_x: expected 4 entries (row-major m x m), got 3");
  CheckRejected(mp + "game.payoff_y = 1 2 3\nrun.algorithm = mmrd\n",
                "game.payoff_y: expected 4 entries");
  CheckRejected(mp + "game.zero_sum = false\nrun.algorithm = mmrd\n",
                "game.zero_sum: declared false but payoff_y = -payoff_x");
  CheckRejected(mp + "game.payoff_y = 1 -1 -1 1\ngame.zero_sum = true\nrun.algorithm = mmrd\n",
                "game.zero_sum: declared true but payoff_y != -payoff_x");

  // run section
  CheckRejected(mp, "run.algorithm: required");
  CheckRejected(mp + "run.algorithm = foo\n", "run.algorithm: unknown algorithm 'foo'");
  CheckRejected(mp + "run.algorithm = mmrd\nrun.eta = -0.1\n", "run.eta: must be positive");
  CheckRejected(mp + "run.algorithm = mmga\n", "run.gamma: required (positive) for algorithm mmga");
  CheckRejected(mp + cont + "run.step_size = 0\n", "run.step_size: must be positive");
  CheckRejected(mp + cont + "run.t_max = -1\n", "run.t_max: must be nonnegative");
  CheckRejected(mp + cont + "run.record_every = 0\n", "run.record_every: must be at least 1");
  CheckRejected(mp + cont + "run.record_every = -3\n", "run.record_every: must be nonnegative");
  CheckRejected(mp + cont + "run.seed = -1\n", "run.seed: must be nonnegative");

  // reduced flows only exist around a two-action one-memory interior equilibrium
  CheckRejected(rps + "run.algorithm = approx-2\n",
                "run.algorithm: approx-2 needs a two-action one-memory zero-sum game");
  CheckRejected(mp + "game.payoff_y = 1 -1 -1 1\nrun.algorithm = approx-1\n",
                "run.algorithm: approx-1 needs");
  CheckRejected("game.m = 2\ngame.n = 2\ngame.payoff_x = 1 -1 -1 1\nrun.algorithm = approx-1\n",
                "run.algorithm: approx-1 needs");

  // comparisons
  CheckRejected(mp + mmga + "compare.approx_orders = 1\n",
                "compare.approx_orders: only meaningful with run.algorithm = continuous-mmga");
  CheckRejected(mp + cont + "compare.approx_orders = 1 4\n",
                "compare.approx_orders: orders run from 1 to 3");
  CheckRejected(mp + cont + "compare.approx_orders = 0\n",
                "compare.approx_orders: orders run from 1 to 3");
  CheckRejected(rps + cont + "compare.approx_orders = 1\n", "compare.approx_orders: needs");

  // metrics
  CheckRejected(mp + cont + "metrics.kl_reference = foo\n",
                "metrics.kl_reference: unknown reference 'foo'");
  CheckRejected(rps + cont + "metrics.kl_reference = nash2x1\n",
                "metrics.kl_reference: nash2x1 needs");
  CheckRejected(mp + cont + "metrics.max_eig_mode = abs\n",
                "metrics.max_eig_mode: expected real or modulus");
  CheckRejected(mp + cont + "metrics.max_eig_fd_step = 0\n",
                "metrics.max_eig_fd_step: must be positive");

  // init section (and the reference twin with its own prefix)
  CheckRejected(mp + cont + "init.kind = foo\n", "init.kind: unknown kind 'foo'");
  CheckRejected(mp + cont + "init.x = 1\n", "init.x");
  CheckRejected(mp + cont + "init.kind = explicit\ninit.x_rows = 0.5 0.5\niniy = 1\n",
                "t.cfg: iniy: unknown key");
  CheckRejected(mp + cont +
                    "init.kind = explicit\n"
                    "init.x_rows = 0.5 0.5\n"
                    "init.y_rows = 0.5 0.5 0.5 0.5 0.5 0.5 0.5 0.5\n",
                "init.x_rows");
  CheckRejected(rps + cont + "init.kind = nash-plus-delta\n", "init.kind: nash-plus-delta needs");
  CheckRejected(mp + cont + "init.kind = nash-plus-delta\ninit.delta = 0.1 0.1\n",
                "init.delta: expected 4 entries");
  CheckRejected(mp + cont + "init.kind = nash-plus-delta\ninit.epsilon = 0.1 0.1 0.1 0.1\n",
                "init.epsilon: requires init.delta");
  CheckRejected(mp + cont + "init.kind = nash-plus-delta\ninit.delta_scale = 0.6\n",
                "init.delta_scale: must lie in (0, 0.5)");
  CheckRejected(mp + cont + "reference.kind = foo\n", "reference.kind: unknown kind 'foo'");
  CheckRejected(mp + cont + "reference.x = -0.2\n", "reference.x");

  CHECK_THROWS_WITH_AS(LoadConfigFile("/nonexistent/path.cfg"),
                       doctest::Contains("cannot open config file"), ConfigError);
}

TEST_CASE("presets: embedded texts match the shipped files and parse") {
  const std::vector<std::string> names = PresetNames();
  REQUIRE(names == std::vector<std::string>{"fig2", "fig3", "fig4", "figA1"});

  const char* dir = std::getenv("MMG_CONFIG_DIR");
  REQUIRE_MESSAGE(dir != nullptr, "MMG_CONFIG_DIR must point at the shipped configs/");
  for (const std::string& name : names) {
    const std::string shipped = Slurp(std::filesystem::path(dir) / (name + ".cfg"));
    CHECK_MESSAGE(PresetText(name) == shipped, "embedded text for " << name
                                                                    << " drifted from configs/");
    CHECK_NOTHROW(PresetConfig(name));
  }
  CHECK_THROWS_AS(PresetText("bogus"), ConfigError);
  CHECK_THROWS_AS(PresetConfig("bogus"), ConfigError);

  const ExperimentConfig fig2 = PresetConfig("fig2");
  CHECK(fig2.m == 2);
  CHECK(fig2.algorithm == "continuous-mmga");
  CHECK(fig2.compare_orders == std::vector<int>{1, 2, 3});
  CHECK(fig2.init.kind == "nash-plus-delta");

  const ExperimentConfig fig3 = PresetConfig("fig3");
  CHECK(fig3.algorithm == "mmga");
  CHECK(fig3.has_reference);
  CHECK(fig3.max_eig_every == 1);
  CHECK(fig3.max_eig_mode == "real");

  const ExperimentConfig fig4 = PresetConfig("fig4");
  CHECK(fig4.m == 3);
  CHECK(fig4.kl_reference == "uniform");
  CHECK(fig4.init.kind == "random-interior");

  const ExperimentConfig figA1 = PresetConfig("figA1");
  CHECK(figA1.compare_orders == std::vector<int>{1});
  CHECK(figA1.kl_reference == "nash2x1");

  // extra heteroclinic panels ship as plain files only
  const std::tuple<const char*, int, int> panels[] = {
      {"fig4_m2n1.cfg", 2, 1}, {"fig4_m2n2.cfg", 2, 2}, {"fig4_m4n1.cfg", 4, 1}};
  for (const auto& [file, m, n] : panels) {
    const ExperimentConfig cfg = LoadConfigFile((std::filesystem::path(dir) / file).string());
    CHECK(cfg.m == m);
    CHECK(cfg.n == n);
    CHECK(cfg.Game().zero_sum);
  }
}

TEST_CASE("initial profiles: all four kinds") {
  const GameSpec mp = GameSpec::MatchingPennies();
  Rng rng(9, 0);

  SUBCASE("constant fills every state") {
    InitSpec init;
    init.kind = "constant";
    init.x_value = 0.3;
    init.y_value = 0.7;
    const auto [x, y] = MakeInitialProfiles(init, mp, rng);
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(x.At(s, 0) == 0.3);
      CHECK(x.At(s, 1) == 0.7);
      CHECK(y.At(s, 0) == 0.7);
      CHECK(y.At(s, 1) == doctest::Approx(0.3).epsilon(1e-15));
    }
  }

  SUBCASE("explicit rows pass through after normalization") {
    InitSpec init;
    init.kind = "explicit";
    init.x_rows = {0.1, 0.9, 0.2, 0.8, 0.3, 0.7, 0.4, 0.6};
    init.y_rows = {0.9, 0.1, 0.8, 0.2, 0.7, 0.3, 0.6, 0.4};
    // a wobble inside the 1e-6 acceptance window gets normalized away
    init.x_rows[0] = 0.1 + 4e-7;
    const auto [x, y] = MakeInitialProfiles(init, mp, rng);
    x.CheckValid(1e-12);
    y.CheckValid(1e-12);
    CHECK(x.At(0, 0) == doctest::Approx((0.1 + 4e-7) / (1.0 + 4e-7)).epsilon(1e-12));
    CHECK(x.At(2, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(y.At(3, 1) == doctest::Approx(0.4).epsilon(1e-15));

    init.x_rows[0] = 0.2;  // row 0 now sums to 1.1: outside the window
    CHECK_THROWS_AS(MakeInitialProfiles(init, mp, rng), ConfigError);
  }

  SUBCASE("nash-plus-delta centers on the closed-form equilibrium") {
    const GameSpec skew(2, 1, {3.0, -1.0, -1.0, 1.0});  // x* = y* = 1/3
    const NashPoint2x1 nash = Nash2x1({3.0, -1.0, -1.0, 1.0});
    InitSpec init;
    init.kind = "nash-plus-delta";
    init.delta = {0.01, -0.02, 0.03, -0.04};
    const auto [x, y] = MakeInitialProfiles(init, skew, rng);
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(x.At(s, 0) == doctest::Approx(nash.x_star + init.delta[s]).epsilon(1e-15));
      // epsilon defaults to delta when omitted
      CHECK(y.At(s, 0) == doctest::Approx(nash.y_star + init.delta[s]).epsilon(1e-15));
      CHECK(x.At(s, 0) + x.At(s, 1) == doctest::Approx(1.0).epsilon(1e-15));
    }

    init.epsilon = {-0.01, 0.02, -0.03, 0.04};
    const auto [x2, y2] = MakeInitialProfiles(init, skew, rng);
    for (std::size_t s = 0; s < 4; ++s)
      CHECK(y2.At(s, 0) == doctest::Approx(nash.y_star + init.epsilon[s]).epsilon(1e-15));

    init.epsilon.clear();
    init.delta = {0.9, 0.0, 0.0, 0.0};  // 1/3 + 0.9 leaves (0,1)
    CHECK_THROWS_WITH_AS(MakeInitialProfiles(init, skew, rng),
                         doctest::Contains("leaves (0,1)"), ConfigError);
  }

  SUBCASE("nash-plus-delta draws are shared between the players") {
    InitSpec init;
    init.kind = "nash-plus-delta";
    init.delta_scale = 0.05;
    Rng a(17, 0), b(17, 0);
    const auto [xa, ya] = MakeInitialProfiles(init, mp, a);
    const auto [xb, yb] = MakeInitialProfiles(init, mp, b);
    CHECK(xa.probs == xb.probs);  // same seed, same draw
    CHECK(ya.probs == yb.probs);
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(std::fabs(xa.At(s, 0) - 0.5) <= 0.05);
      CHECK(xa.At(s, 0) != 0.5);           // the draw moved off center
      CHECK(ya.At(s, 0) == xa.At(s, 0));   // epsilon_i = delta_i by construction
    }
  }

  SUBCASE("random-interior rows stay away from the boundary") {
    const GameSpec rps = GameSpec::RockPaperScissors();
    Rng a(21, 0), b(21, 0);
    const auto [x, y] = MakeInitialProfiles(InitSpec{"random-interior"}, rps, a);
    CheckRowsOnSimplex(x.probs, 3, 1e-12);
    CheckRowsOnSimplex(y.probs, 3, 1e-12);
    CHECK(x.MinEntry() >= 0.1 / 3 - 1e-12);  // floor mass of the interior draw
    CHECK(y.MinEntry() >= 0.1 / 3 - 1e-12);
    CHECK(x.probs != y.probs);
    const auto [x2, y2] = MakeInitialProfiles(InitSpec{"random-interior"}, rps, b);
    CHECK(x.probs == x2.probs);
    CHECK(y.probs == y2.probs);
  }

  SUBCASE("unknown kind is rejected") {
    InitSpec init;
    init.kind = "weird";
    CHECK_THROWS_AS(MakeInitialProfiles(init, mp, rng), ConfigError);
  }
}

TEST_CASE("runner: near-equilibrium preset with reduced-flow companions") {
  ExperimentConfig cfg = PresetConfig("fig2");
  cfg.t_max = 5.0;  // 500 integrator steps, recorded every 10
  const RunResult res = RunExperiment(cfg);

  CHECK(res.main.completed);
  REQUIRE(res.main.points.size() == 51);
  CHECK(!res.has_reference);
  REQUIRE(res.comparisons.size() == 3);

  for (std::size_t i = 0; i < 3; ++i) {
    const ComparisonRun& cmp = res.comparisons[i];
    CHECK(cmp.order == static_cast<int>(i) + 1);
    CHECK(cmp.trajectory.completed);
    REQUIRE(cmp.trajectory.points.size() == 51);
    REQUIRE(cmp.error.size() == 51);
    CHECK(cmp.error[0] == 0.0);  // shared start
    CHECK(cmp.error.back() > 0.0);
    for (double e : cmp.error) CHECK(std::isfinite(e));
  }

  for (const TrajectoryPoint& pt : res.main.points) {
    REQUIRE(pt.x.size() == 8);
    REQUIRE(pt.y.size() == 8);
    CheckRowsOnSimplex(pt.x, 2, 1e-9);
    CheckRowsOnSimplex(pt.y, 2, 1e-9);
    CHECK(std::isfinite(pt.metrics.u_st));
    CHECK(pt.metrics.min_prob > 0.0);
    CHECK(std::isnan(pt.metrics.kl));        // no kl reference configured
    CHECK(std::isnan(pt.metrics.distance));  // no reference run
    CHECK(std::isnan(pt.metrics.max_eig));   // max_eig disabled
  }
  CHECK(res.main.points.front().t == 0.0);
  CHECK(res.main.points.back().t == doctest::Approx(5.0).epsilon(1e-12));

  REQUIRE(!res.log_lines.empty());
  CHECK(Contains(res.log_lines.front(), "run: algorithm=continuous-mmga"));
  CHECK(AnyLineContains(res.log_lines, "init: delta="));
  CHECK(AnyLineContains(res.log_lines, "main: status: completed 500 steps"));
  CHECK(AnyLineContains(res.log_lines, "approx3: status: completed 500 steps"));
}

TEST_CASE("runner: sensitivity preset fills distance and amplification metrics") {
  ExperimentConfig cfg = PresetConfig("fig3");
  cfg.t_max = 2.0;  // 2000 discretized steps, recorded every 100
  const RunResult res = RunExperiment(cfg);

  CHECK(res.main.completed);
  CHECK(res.reference.completed);
  CHECK(res.has_reference);
  REQUIRE(res.main.points.size() == 21);
  REQUIRE(res.reference.points.size() == 21);
  CHECK(res.comparisons.empty());

  // the shipped pair differs by 0.001 in one first-action coordinate
  CHECK(res.main.points[0].metrics.distance ==
        doctest::Approx(0.0015654403059940517).epsilon(1e-13));
  for (const TrajectoryPoint& pt : res.main.points) {
    CHECK(std::isfinite(pt.metrics.distance));
    CHECK(std::isfinite(pt.metrics.max_eig));  // max_eig_every = 1
    CHECK(std::isfinite(pt.metrics.u_st));
  }
  for (const TrajectoryPoint& pt : res.reference.points) {
    CHECK(std::isnan(pt.metrics.distance));  // companion runs carry no distance
    CHECK(std::isnan(pt.metrics.max_eig));   // ... and drop the eigenvalue probe
    CHECK(std::isfinite(pt.metrics.u_st));
  }
  CHECK(AnyLineContains(res.log_lines, "reference: status: completed 2000 steps"));
}

TEST_CASE("runner: boundary-drift presets expose kl and min_prob") {
  ExperimentConfig fig4 = PresetConfig("fig4");
  fig4.t_max = 5.0;  // 500 mmga steps, recorded every 100
  const RunResult r4 = RunExperiment(fig4);
  CHECK(r4.main.completed);
  REQUIRE(r4.main.points.size() == 6);
  for (const TrajectoryPoint& pt : r4.main.points) {
    REQUIRE(pt.x.size() == 27);  // nine memorized states, three actions
    CheckRowsOnSimplex(pt.x, 3, 1e-9);
    CHECK(pt.metrics.kl >= 0.0);
    CHECK(std::isfinite(pt.metrics.kl));
    CHECK(pt.metrics.min_prob > 0.0);
  }

  ExperimentConfig figA1 = PresetConfig("figA1");
  figA1.t_max = 5.0;
  const RunResult rA = RunExperiment(figA1);
  CHECK(rA.main.completed);
  REQUIRE(rA.main.points.size() == 51);
  REQUIRE(rA.comparisons.size() == 1);
  CHECK(rA.comparisons[0].order == 1);
  REQUIRE(rA.comparisons[0].trajectory.points.size() == 51);
  for (const TrajectoryPoint& pt : rA.main.points) {
    CHECK(pt.metrics.kl >= 0.0);  // divergence from the mixed equilibrium
    CHECK(std::isfinite(pt.metrics.kl));
  }
}

TEST_CASE("runner: replicator runs are reproducible and t_max zero records the start") {
  const std::string text = std::string(kMpGame) +
                           "run.algorithm = mmrd\n"
                           "run.eta = 0.001\n"
                           "run.t_max = 1\n"
                           "run.record_every = 250\n"
                           "run.seed = 11\n"
                           "init.kind = constant\n"
                           "init.x = 0.62\n"
                           "init.y = 0.62\n";
  ExperimentConfig cfg = ParseConfig(text, "mmrd.cfg");
  const RunResult a = RunExperiment(cfg);
  const RunResult b = RunExperiment(cfg);

  CHECK(a.main.completed);
  REQUIRE(a.main.points.size() == 5);  // k = 0, 250, 500, 750, 1000
  CHECK(a.main.points[0].x[0] == 0.62);
  CHECK(a.main.points.back().x != a.main.points.front().x);  // sampling moved the profile
  REQUIRE(b.main.points.size() == a.main.points.size());
  for (std::size_t i = 0; i < a.main.points.size(); ++i) {
    CHECK(a.main.points[i].x == b.main.points[i].x);  // bitwise reproducible
    CHECK(a.main.points[i].y == b.main.points[i].y);
  }
  CHECK(a.log_lines == b.log_lines);
  CHECK(AnyLineContains(a.log_lines, "initial memorized state:"));

  cfg.t_max = 0.0;
  const RunResult zero = RunExperiment(cfg);
  REQUIRE(zero.main.points.size() == 1);
  CHECK(zero.main.points[0].t == 0.0);
  for (std::size_t s = 0; s < 4; ++s) CHECK(zero.main.points[0].x[2 * s] == 0.62);
  CHECK(AnyLineContains(zero.log_lines, "status: completed 0 steps"));

  ExperimentConfig cont = PresetConfig("figA1");
  cont.t_max = 0.0;
  const RunResult zc = RunExperiment(cont);
  REQUIRE(zc.main.points.size() == 1);
  for (std::size_t s = 0; s < 4; ++s) CHECK(zc.main.points[0].x[2 * s] == 0.6);
}

TEST_CASE("outputs: CSV files round-trip bit-exactly and re-runs are identical") {
  const std::filesystem::path dir = FreshOutputDir("mmg_test_runner_out");

  ExperimentConfig cfg = PresetConfig("fig3");
  cfg.t_max = 1.0;
  cfg.out = (dir / "run.csv").string();
  const RunResult res = RunExperiment(cfg);
  const std::vector<std::string> paths = WriteOutputs(res, cfg);

  REQUIRE(paths.size() == 3);
  CHECK(paths[0] == (dir / "run.csv").string());
  CHECK(paths[1] == (dir / "run_reference.csv").string());
  CHECK(paths[2] == (dir / "run.csv.log").string());
  for (const std::string& p : paths) CHECK(std::filesystem::exists(p));

  const CsvTable main = ReadCsv(paths[0]);
  // t, 8 x coords, 8 y coords, u_st, min_prob, distance, max_eig
  REQUIRE(main.header.size() == 21);
  CHECK(main.header[0] == "t");
  CHECK(main.header[1] == "x_s0_a0");
  CHECK(main.header[8] == "x_s3_a1");
  CHECK(main.header[9] == "y_s0_a0");
  CHECK(main.header[17] == "u_st");
  CHECK(main.header[18] == "min_prob");
  CHECK(main.header[19] == "distance");
  CHECK(main.header[20] == "max_eig");
  REQUIRE(main.rows.size() == res.main.points.size());
  for (std::size_t i = 0; i < main.rows.size(); ++i) {
    const TrajectoryPoint& pt = res.main.points[i];
    CHECK(main.rows[i][0] == pt.t);  // 17 significant digits round-trip exactly
    for (std::size_t c = 0; c < 8; ++c) {
      CHECK(main.rows[i][1 + c] == pt.x[c]);
      CHECK(main.rows[i][9 + c] == pt.y[c]);
    }
    CHECK(main.rows[i][17] == pt.metrics.u_st);
    CHECK(main.rows[i][18] == pt.metrics.min_prob);
    CHECK(main.rows[i][19] == pt.metrics.distance);
    CHECK(main.rows[i][20] == pt.metrics.max_eig);
  }

  const CsvTable ref = ReadCsv(paths[1]);
  REQUIRE(ref.header.size() == 19);  // companions carry no distance / max_eig
  CHECK(ref.rows.size() == res.reference.points.size());

  const std::string log_text = Slurp(paths[2]);
  for (const std::string& line : res.log_lines) CHECK(Contains(log_text, line));

  // byte-identical re-run
  ExperimentConfig cfg_b = cfg;
  cfg_b.out = (dir / "rerun.csv").string();
  WriteOutputs(RunExperiment(cfg_b), cfg_b);
  CHECK(Slurp(dir / "run.csv") == Slurp(dir / "rerun.csv"));
  CHECK(Slurp(dir / "run_reference.csv") == Slurp(dir / "rerun_reference.csv"));
  CHECK(Slurp(dir / "run.csv.log") == Slurp(dir / "rerun.csv.log"));

  // comparison companions write one file per order, error columns on the main CSV
  ExperimentConfig fig2 = PresetConfig("fig2");
  fig2.t_max = 1.0;
  fig2.out = (dir / "near.csv").string();
  const RunResult near = RunExperiment(fig2);
  const std::vector<std::string> near_paths = WriteOutputs(near, fig2);
  REQUIRE(near_paths.size() == 5);
  CHECK(near_paths[1] == (dir / "near_approx1.csv").string());
  CHECK(near_paths[3] == (dir / "near_approx3.csv").string());
  const CsvTable near_main = ReadCsv(near_paths[0]);
  REQUIRE(near_main.header.size() == 22);  // 19 base columns + err1..err3
  CHECK(near_main.header[19] == "err1");
  CHECK(near_main.header[21] == "err3");
  for (std::size_t i = 0; i < near_main.rows.size(); ++i)
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(near_main.rows[i][19 + k] == near.comparisons[k].error[i]);
  const CsvTable approx1 = ReadCsv(near_paths[1]);
  REQUIRE(approx1.header.size() == 19);
  REQUIRE(approx1.rows.size() == 11);
  CHECK(approx1.rows[0][1] == near.comparisons[0].trajectory.points[0].x[0]);

  // reader rejections
  CHECK_THROWS_WITH_AS(ReadCsv((dir / "missing.csv").string()),
                       doctest::Contains("cannot open CSV file"), ConfigError);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "a,b\n1,2\n3\n";
  }
  CHECK_THROWS_WITH_AS(ReadCsv((dir / "bad.csv").string()),
                       doctest::Contains("row width mismatch"), ConfigError);
  {
    std::ofstream{dir / "empty.csv"};
  }
  CHECK_THROWS_WITH_AS(ReadCsv((dir / "empty.csv").string()),
                       doctest::Contains("empty CSV file"), ConfigError);

  ExperimentConfig nowhere = cfg;
  nowhere.out = (dir / "no_such_dir" / "x.csv").string();
  CHECK_THROWS_WITH_AS(WriteOutputs(res, nowhere), doctest::Contains("cannot open output file"),
                       ConfigError);

  std::filesystem::remove_all(dir);
}

TEST_CASE("runner: local amplification rises as the sensitivity run nears the boundary") {
  // full sensitivity preset: 420000 discretized steps, 4201 samples
  const ExperimentConfig cfg = PresetConfig("fig3");
  const RunResult res = RunExperiment(cfg);
  REQUIRE(res.main.completed);
  REQUIRE(res.main.points.size() == 4201);

  std::vector<double> max_eig, min_prob;
  max_eig.reserve(res.main.points.size());
  min_prob.reserve(res.main.points.size());
  for (const TrajectoryPoint& pt : res.main.points) {
    REQUIRE(std::isfinite(pt.metrics.max_eig));
    REQUIRE(std::isfinite(pt.metrics.min_prob));
    max_eig.push_back(pt.metrics.max_eig);
    min_prob.push_back(pt.metrics.min_prob);
  }
  // approaching the boundary raises the local amplification rate
  CHECK(SpearmanCorrelation(max_eig, min_prob) < -0.05);

  // the 0.001 initial gap gets amplified by orders of magnitude
  const double d0 = res.main.points[0].metrics.distance;
  double dmax = 0.0;
  for (const TrajectoryPoint& pt : res.main.points) dmax = std::max(dmax, pt.metrics.distance);
  CHECK(d0 == doctest::Approx(0.0015654403059940517).epsilon(1e-13));
  CHECK(dmax >= 100.0 * d0);
}

TEST_CASE("verify: randomized suites pass and fan out deterministically") {
  const VerifyReport st = VerifyStationary(20, 3);
  CHECK(st.suite == "stationary");
  CHECK(st.pass);
  CHECK(!st.vacuous);
  CHECK(st.worst_gap <= 1e-9);
  CHECK(st.lines.size() == 22);  // 20 gating trials + 2 non-gating stress rows
  CHECK(Contains(st.summary, "stationary: PASS"));
  CHECK(Contains(st.lines[20], "stress"));

  const VerifyReport eq = VerifyEquivalence(6, 3, 2, 5);
  CHECK(eq.pass);
  CHECK(eq.worst_gap <= 1e-4);
  CHECK(eq.lines.size() == 6);

  const VerifyReport gr = VerifyGradient(4, 9);
  CHECK(gr.pass);
  CHECK(gr.worst_gap <= 1e-6);

  const VerifyReport na = VerifyNash(3, 0.05, 2);
  CHECK(na.pass);
  CHECK(na.lines.size() == 6);  // 2 pinned + 1 skipped + 3 random games
  CHECK(AnyLineContains(na.lines, "matching-pennies"));
  CHECK(AnyLineContains(na.lines, "skipped"));

  CHECK_THROWS_AS(VerifyEquivalence(5, 4, 2, 1), ConfigError);
  CHECK_THROWS_AS(VerifyEquivalence(5, 3, 0, 1), ConfigError);
  CHECK_THROWS_AS(VerifyNash(5, 0.6, 1), ConfigError);

  // report is identical for any worker count: trial i only sees Rng(seed, i)
  setenv("MMG_WORKERS", "1", 1);
  const VerifyReport serial = VerifyEquivalence(5, 2, 1, 7);
  setenv("MMG_WORKERS", "4", 1);
  const VerifyReport pooled = VerifyEquivalence(5, 2, 1, 7);
  CHECK(serial.lines == pooled.lines);
  CHECK(serial.summary == pooled.summary);
  CHECK(serial.pass == pooled.pass);
  CHECK(serial.worst_gap == pooled.worst_gap);

  // worker-count policy
  setenv("MMG_WORKERS", "5", 1);
  CHECK(WorkerCount(10) == 5);
  CHECK(WorkerCount(3) == 3);  // never more workers than trials
  CHECK(WorkerCount(0) == 1);
  setenv("MMG_WORKERS", "-2", 1);
  CHECK(WorkerCount(100) >= 1);  // falls back to hardware concurrency
  CHECK(WorkerCount(100) <= 16);
  unsetenv("MMG_WORKERS");
  CHECK(WorkerCount(1) == 1);

  // zero trials: vacuously passing and labeled as such
  const VerifyReport empty = VerifyEquivalence(0, 3, 2, 1);
  CHECK(empty.pass);
  CHECK(empty.vacuous);
  CHECK(empty.lines.empty());
  CHECK(Contains(empty.summary, "vacuous"));
}
