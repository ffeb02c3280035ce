#include "mmgames/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mmgames/errors.hpp"
#include "mmgames/perturbation.hpp"

namespace mmg {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void Fail(const std::string& source, const std::string& key,
                       const std::string& what) {
  throw ConfigError(source + ": " + key + ": " + what);
}

double ParseDouble(const std::string& source, const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || Trim(end) != "")
    Fail(source, key, "expected a real number, got '" + v + "'");
  return d;
}

long long ParseInt(const std::string& source, const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || Trim(end) != "")
    Fail(source, key, "expected an integer, got '" + v + "'");
  return i;
}

bool ParseBool(const std::string& source, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  Fail(source, key, "expected true/false, got '" + v + "'");
}

std::vector<double> ParseDoubleList(const std::string& source, const std::string& key,
                                    const std::string& v) {
  std::vector<double> out;
  std::istringstream iss(v);
  std::string tok;
  while (iss >> tok) out.push_back(ParseDouble(source, key, tok));
  if (out.empty()) Fail(source, key, "expected a whitespace-separated list of reals");
  return out;
}

std::vector<int> ParseIntList(const std::string& source, const std::string& key,
                              const std::string& v) {
  std::vector<int> out;
  std::istringstream iss(v);
  std::string tok;
  while (iss >> tok) out.push_back(static_cast<int>(ParseInt(source, key, tok)));
  if (out.empty()) Fail(source, key, "expected a whitespace-separated list of integers");
  return out;
}

// init.* and reference.* share the same keys
bool ApplyInitKey(InitSpec& init, const std::string& source, const std::string& key,
                  const std::string& sub, const std::string& value) {
  if (sub == "kind") {
    init.kind = value;
  } else if (sub == "x") {
    init.x_value = ParseDouble(source, key, value);
  } else if (sub == "y") {
    init.y_value = ParseDouble(source, key, value);
  } else if (sub == "x_rows") {
    init.x_rows = ParseDoubleList(source, key, value);
  } else if (sub == "y_rows") {
    init.y_rows = ParseDoubleList(source, key, value);
  } else if (sub == "delta") {
    init.delta = ParseDoubleList(source, key, value);
  } else if (sub == "epsilon") {
    init.epsilon = ParseDoubleList(source, key, value);
  } else if (sub == "delta_scale") {
    init.delta_scale = ParseDouble(source, key, value);
  } else {
    return false;
  }
  return true;
}

bool IsNashExpandable(const ExperimentConfig& cfg) {
  if (cfg.m != 2 || cfg.n != 1) return false;
  if (!cfg.payoff_y.empty()) {
    for (std::size_t i = 0; i < cfg.payoff_x.size(); ++i)
      if (cfg.payoff_y[i] != -cfg.payoff_x[i]) return false;
  }
  return Assumption1Check(
      {cfg.payoff_x[0], cfg.payoff_x[1], cfg.payoff_x[2], cfg.payoff_x[3]});
}

void ValidateInit(const ExperimentConfig& cfg, const InitSpec& init, const std::string& source,
                  const std::string& section) {
  const std::size_t coords = cfg.Game().N() * static_cast<std::size_t>(cfg.m);
  if (init.kind == "constant") {
    if (init.x_value <= 0.0 || init.x_value >= 1.0 || init.y_value <= 0.0 ||
        init.y_value >= 1.0)
      Fail(source, section + ".x", "constant initial probabilities must lie in (0,1)");
  } else if (init.kind == "explicit") {
    if (init.x_rows.size() != coords)
      Fail(source, section + ".x_rows",
           "expected " + std::to_string(coords) + " entries, got " +
               std::to_string(init.x_rows.size()));
    if (init.y_rows.size() != coords)
      Fail(source, section + ".y_rows",
           "expected " + std::to_string(coords) + " entries, got " +
               std::to_string(init.y_rows.size()));
  } else if (init.kind == "nash-plus-delta") {
    if (!IsNashExpandable(cfg))
      Fail(source, section + ".kind",
           "nash-plus-delta needs a two-action one-memory zero-sum game with an interior "
           "equilibrium");
    if (!init.delta.empty() && init.delta.size() != 4)
      Fail(source, section + ".delta", "expected 4 entries");
    if (!init.epsilon.empty() && init.epsilon.size() != 4)
      Fail(source, section + ".epsilon", "expected 4 entries");
    if (!init.epsilon.empty() && init.delta.empty())
      Fail(source, section + ".epsilon", "requires " + section + ".delta");
    if (init.delta_scale <= 0.0 || init.delta_scale >= 0.5)
      Fail(source, section + ".delta_scale", "must lie in (0, 0.5)");
  } else if (init.kind == "random-interior") {
    // nothing beyond the seed
  } else {
    Fail(source, section + ".kind",
         "unknown kind '" + init.kind +
             "' (constant | explicit | nash-plus-delta | random-interior)");
  }
}

void Validate(ExperimentConfig& cfg, const std::string& source) {
  if (cfg.m == 0) Fail(source, "game.m", "required");
  if (cfg.n == 0) Fail(source, "game.n", "required");
  if (cfg.payoff_x.empty()) Fail(source, "game.payoff_x", "required");
  const std::size_t mm = static_cast<std::size_t>(cfg.m) * cfg.m;
  if (cfg.payoff_x.size() != mm)
    Fail(source, "game.payoff_x",
         "expected " + std::to_string(mm) + " entries (row-major m x m), got " +
             std::to_string(cfg.payoff_x.size()));
  if (!cfg.payoff_y.empty() && cfg.payoff_y.size() != mm)
    Fail(source, "game.payoff_y", "expected " + std::to_string(mm) + " entries");

  GameSpec game = cfg.Game();  // validates m, n and the state-count bound
  if (cfg.zero_sum_declared && cfg.zero_sum_value != game.zero_sum)
    Fail(source, "game.zero_sum",
         game.zero_sum ? "declared false but payoff_y = -payoff_x"
                       : "declared true but payoff_y != -payoff_x");

  static const char* kAlgorithms[] = {"mmrd", "mmga", "continuous-mmga",
                                      "approx-1", "approx-2", "approx-3"};
  if (cfg.algorithm.empty()) Fail(source, "run.algorithm", "required");
  if (std::find_if(std::begin(kAlgorithms), std::end(kAlgorithms), [&](const char* a) {
        return cfg.algorithm == a;
      }) == std::end(kAlgorithms))
    Fail(source, "run.algorithm",
         "unknown algorithm '" + cfg.algorithm +
             "' (mmrd | mmga | continuous-mmga | approx-1 | approx-2 | approx-3)");

  const bool discretized = cfg.algorithm == "mmrd" || cfg.algorithm == "mmga";
  if (discretized && !(cfg.eta > 0.0)) Fail(source, "run.eta", "must be positive");
  if (cfg.algorithm == "mmga" && !(cfg.gamma > 0.0))
    Fail(source, "run.gamma", "required (positive) for algorithm mmga");
  if (!discretized && !(cfg.step_size > 0.0)) Fail(source, "run.step_size", "must be positive");
  if (cfg.t_max < 0.0) Fail(source, "run.t_max", "must be nonnegative");
  if (cfg.record_every == 0) Fail(source, "run.record_every", "must be at least 1");

  if (cfg.algorithm.rfind("approx-", 0) == 0 && !IsNashExpandable(cfg))
    Fail(source, "run.algorithm",
         cfg.algorithm + " needs a two-action one-memory zero-sum game with an interior "
                         "equilibrium");

  ValidateInit(cfg, cfg.init, source, "init");
  if (cfg.has_reference) ValidateInit(cfg, cfg.reference, source, "reference");

  if (!cfg.compare_orders.empty()) {
    if (cfg.algorithm != "continuous-mmga")
      Fail(source, "compare.approx_orders", "only meaningful with run.algorithm = continuous-mmga");
    if (!IsNashExpandable(cfg))
      Fail(source, "compare.approx_orders",
           "needs a two-action one-memory zero-sum game with an interior equilibrium");
    for (int k : cfg.compare_orders)
      if (k < 1 || k > 3) Fail(source, "compare.approx_orders", "orders run from 1 to 3");
  }

  if (cfg.kl_reference != "none" && cfg.kl_reference != "nash2x1" &&
      cfg.kl_reference != "uniform")
    Fail(source, "metrics.kl_reference",
         "unknown reference '" + cfg.kl_reference + "' (none | nash2x1 | uniform)");
  if (cfg.kl_reference == "nash2x1" && !IsNashExpandable(cfg))
    Fail(source, "metrics.kl_reference",
         "nash2x1 needs a two-action one-memory zero-sum game with an interior equilibrium");
  if (cfg.max_eig_mode != "real" && cfg.max_eig_mode != "modulus")
    Fail(source, "metrics.max_eig_mode", "expected real or modulus");
  if (!(cfg.max_eig_fd_step > 0.0)) Fail(source, "metrics.max_eig_fd_step", "must be positive");
}

}  // namespace

GameSpec ExperimentConfig::Game() const {
  if (payoff_y.empty()) return GameSpec(m, n, payoff_x);
  return GameSpec(m, n, payoff_x, payoff_y);
}

ExperimentConfig ParseConfig(std::istream& in, const std::string& source_name) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source_name + ": line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(source_name + ": line " + std::to_string(line_no) +
                        ": expected key = value");

    if (key == "game.m") {
      cfg.m = static_cast<int>(ParseInt(source_name, key, value));
    } else if (key == "game.n") {
      cfg.n = static_cast<int>(ParseInt(source_name, key, value));
    } else if (key == "game.payoff_x") {
      cfg.payoff_x = ParseDoubleList(source_name, key, value);
    } else if (key == "game.payoff_y") {
      cfg.payoff_y = ParseDoubleList(source_name, key, value);
    } else if (key == "game.zero_sum") {
      cfg.zero_sum_declared = true;
      cfg.zero_sum_value = ParseBool(source_name, key, value);
    } else if (key == "run.algorithm") {
      cfg.algorithm = value;
    } else if (key == "run.eta") {
      cfg.eta = ParseDouble(source_name, key, value);
    } else if (key == "run.gamma") {
      cfg.gamma = ParseDouble(source_name, key, value);
    } else if (key == "run.step_size") {
      cfg.step_size = ParseDouble(source_name, key, value);
    } else if (key == "run.t_max") {
      cfg.t_max = ParseDouble(source_name, key, value);
    } else if (key == "run.record_every") {
      const long long v = ParseInt(source_name, key, value);
      if (v < 0) Fail(source_name, key, "must be nonnegative");
      cfg.record_every = static_cast<std::size_t>(v);
    } else if (key == "run.seed") {
      const long long v = ParseInt(source_name, key, value);
      if (v < 0) Fail(source_name, key, "must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (key == "run.out") {
      cfg.out = value;
    } else if (key.rfind("init.", 0) == 0) {
      if (!ApplyInitKey(cfg.init, source_name, key, key.substr(5), value))
        Fail(source_name, key, "unknown init key");
    } else if (key.rfind("reference.", 0) == 0) {
      if (!ApplyInitKey(cfg.reference, source_name, key, key.substr(10), value))
        Fail(source_name, key, "unknown reference key");
      cfg.has_reference = true;
    } else if (key == "compare.approx_orders") {
      cfg.compare_orders = ParseIntList(source_name, key, value);
    } else if (key == "metrics.kl_reference") {
      cfg.kl_reference = value;
    } else if (key == "metrics.max_eig_every") {
      const long long v = ParseInt(source_name, key, value);
      if (v < 0) Fail(source_name, key, "must be nonnegative");
      cfg.max_eig_every = static_cast<std::size_t>(v);
    } else if (key == "metrics.max_eig_mode") {
      cfg.max_eig_mode = value;
    } else if (key == "metrics.max_eig_fd_step") {
      cfg.max_eig_fd_step = ParseDouble(source_name, key, value);
    } else {
      Fail(source_name, key, "unknown key");
    }
  }
  Validate(cfg, source_name);
  return cfg;
}

ExperimentConfig ParseConfig(const std::string& text, const std::string& source_name) {
  std::istringstream iss(text);
  return ParseConfig(iss, source_name);
}

ExperimentConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return ParseConfig(in, path);
}

}  // namespace mmg
