#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mmg {

// Outcome of one verification suite. Every trial contributes one line;
// worst_gap is the largest deviation observed among the gating checks.
struct VerifyReport {
  std::string suite;
  bool pass = false;
  bool vacuous = false;  // no gating trials ran
  double worst_gap = 0.0;
  std::vector<std::string> lines;
  std::string summary;
};

// Replicator flow vs. gradient-ascent flow on random zero-sum games with
// m in {2..m_max}, n in {1..n_max} and random interior profiles. Gating:
// max entrywise gap <= 1e-6 against the exact-gradient flow and <= 1e-4
// against the finite-difference flow (gamma = 1e-6).
VerifyReport VerifyEquivalence(int trials = 50, int m_max = 3, int n_max = 2,
                               std::uint64_t seed = 1);

// Closed-form stationary state vs. power iteration on random interior
// two-action one-memory profiles; gating L2 gap <= 1e-9. Two extra
// near-boundary stress rows (entries 1e-6) are reported but not gating.
VerifyReport VerifyStationary(int trials = 100, std::uint64_t seed = 1);

// Equilibrium checks on random no-dominant-pure-strategy zero-sum games:
// flat payoff |u^st(x* 1, y) - u*| <= 1e-10 for random y, no profitable
// unilateral deviation > 1e-9 on a coordinatewise grid, and positive
// exploitability (> 1e-6) for every single-row perturbation of x* 1.
VerifyReport VerifyNash(int trials = 20, double grid_step = 0.01, std::uint64_t seed = 1);

// Exact stationary-payoff gradient vs. central finite differences
// (gamma = 1e-5) on random instances cycling (m,n) through (2,1), (3,1),
// (2,2); gating relative gap <= 1e-6 for both players.
VerifyReport VerifyGradient(int trials = 20, std::uint64_t seed = 1);

// Worker threads for the verification fan-out: MMG_WORKERS when set, else
// hardware concurrency clamped to [1, 16]; never more than trial_count.
int WorkerCount(std::size_t trial_count);

}  // namespace mmg
