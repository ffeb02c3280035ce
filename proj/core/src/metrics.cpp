#include "mmgames/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>

#include "mmgames/errors.hpp"

namespace mmg {

namespace {

constexpr std::size_t kJacobianDimCap = 512;

void CheckSameShape(const StrategyProfile& a, const StrategyProfile& b) {
  if (a.num_states != b.num_states || a.m != b.m)
    throw ConfigError("profiles have mismatched shapes");
}

// free coordinates of both profiles: actions 0..m-2 per state, X block first
Eigen::VectorXd FreeCoords(const StrategyProfile& x, const StrategyProfile& y) {
  const std::size_t per = x.num_states * (x.m - 1);
  Eigen::VectorXd z(2 * per);
  std::size_t k = 0;
  for (std::size_t s = 0; s < x.num_states; ++s)
    for (int a = 0; a + 1 < x.m; ++a) z(k++) = x.At(s, a);
  for (std::size_t s = 0; s < y.num_states; ++s)
    for (int b = 0; b + 1 < y.m; ++b) z(k++) = y.At(s, b);
  return z;
}

void ProfilesFrom(const Eigen::VectorXd& z, StrategyProfile& x, StrategyProfile& y) {
  std::size_t k = 0;
  for (StrategyProfile* p : {&x, &y}) {
    for (std::size_t s = 0; s < p->num_states; ++s) {
      double sum = 0.0;
      for (int a = 0; a + 1 < p->m; ++a) {
        p->At(s, a) = z(k++);
        sum += p->At(s, a);
      }
      p->At(s, p->m - 1) = 1.0 - sum;
    }
  }
}

Eigen::VectorXd FreeField(const FieldEvaluation& f, std::size_t num_states, int m) {
  const std::size_t per = num_states * (m - 1);
  Eigen::VectorXd out(2 * per);
  std::size_t k = 0;
  for (std::size_t s = 0; s < num_states; ++s)
    for (int a = 0; a + 1 < m; ++a) out(k++) = f.dx[s * m + a];
  for (std::size_t s = 0; s < num_states; ++s)
    for (int b = 0; b + 1 < m; ++b) out(k++) = f.dy[s * m + b];
  return out;
}

}  // namespace

double Logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "logit undefined at p=" << p;
    throw NumericalError(msg.str());
  }
  return std::log(p) - std::log(1.0 - p);
}

double StrategyDistance(const StrategyProfile& a, const StrategyProfile& b) {
  CheckSameShape(a, b);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < a.num_states; ++s)
    for (int act = 0; act + 1 < a.m; ++act) {
      acc += std::fabs(Logit(a.At(s, act)) - Logit(b.At(s, act)));
      ++count;
    }
  return acc / static_cast<double>(count);
}

double KlFromNash(const StrategyProfile& ref, const StrategyProfile& x) {
  CheckSameShape(ref, x);
  double acc = 0.0;
  for (std::size_t s = 0; s < ref.num_states; ++s)
    for (int a = 0; a < ref.m; ++a) {
      const double r = ref.At(s, a);
      if (r <= 0.0) continue;  // 0 log 0 = 0
      const double q = x.At(s, a);
      if (q <= 0.0) throw NumericalError("KL divergence undefined against a zero entry");
      acc += r * std::log(r / q);
    }
  return acc / static_cast<double>(ref.num_states);
}

double MaxJacobianEigenvalue(const StrategyProfile& x, const StrategyProfile& y,
                             const JointFieldFn& field, double fd_step, bool use_modulus) {
  CheckSameShape(x, y);
  if (fd_step <= 0.0) throw ConfigError("finite-difference step must be positive");
  const std::size_t dim = 2 * x.num_states * (x.m - 1);
  if (dim > kJacobianDimCap) {
    std::ostringstream msg;
    msg << "Jacobian dimension " << dim << " exceeds the dense-eigensolver cap "
        << kJacobianDimCap;
    throw ConfigError(msg.str());
  }

  const Eigen::VectorXd z0 = FreeCoords(x, y);
  StrategyProfile xw = x, yw = y;
  Eigen::MatrixXd J(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    Eigen::VectorXd z = z0;
    z(j) += fd_step;
    ProfilesFrom(z, xw, yw);
    const Eigen::VectorXd fp = FreeField(field(xw, yw), x.num_states, x.m);

    z(j) = z0(j) - fd_step;
    ProfilesFrom(z, xw, yw);
    const Eigen::VectorXd fm = FreeField(field(xw, yw), x.num_states, x.m);

    J.col(j) = (fp - fm) / (2.0 * fd_step);
  }

  const Eigen::EigenSolver<Eigen::MatrixXd> solver(J);
  if (solver.info() != Eigen::Success)
    throw NumericalError("dense eigensolver failed on the field Jacobian");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const std::complex<double> ev = solver.eigenvalues()(i);
    best = std::max(best, use_modulus ? std::abs(ev) : ev.real());
  }
  return best;
}

}  // namespace mmg
