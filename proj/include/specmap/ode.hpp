#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "specmap/assoc_matrix.hpp"
#include "specmap/errors.hpp"
#include "specmap/grid.hpp"

namespace specmap {

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  long max_steps = 2'000'000;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

// Adaptive Dormand-Prince 5(4) step from a to b; `stops` are interior points
// the stepper must land on exactly (coefficient breakpoints). Handles either
// integration direction. Error norm is the max component error measured
// against abs_tol + rel_tol * ||y||_inf, which keeps the dominant components
// at full relative accuracy.
template <class Rhs>
void ode_integrate(Rhs&& rhs, double a, double b, VectorXcd& y, const std::vector<double>& stops,
                   const OdeOptions& opt) {
  if (a == b) return;
  const double dir = (b > a) ? 1.0 : -1.0;
  std::vector<double> targets;
  for (double s : stops)
    if ((s - a) * dir > 1e-15 && (b - s) * dir > 1e-15) targets.push_back(s);
  targets.push_back(b);
  std::sort(targets.begin(), targets.end(), [dir](double u, double v) { return u * dir < v * dir; });

  using T = detail::Dopri5;
  const int n = static_cast<int>(y.size());
  VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n), err(n);
  double x = a;
  double h = std::min(opt.h_init, std::abs(b - a)) * dir;
  long steps = 0;
  rhs(x, y, k1);
  for (double target : targets) {
    while ((target - x) * dir > 1e-15 * std::max(1.0, std::abs(target))) {
      if (++steps > opt.max_steps) throw AccuracyError("integrator exceeded max steps", std::abs(h));
      if ((x + h - target) * dir > 0.0) h = target - x;
      yt = y + h * T::a21 * k1;
      rhs(x + T::c2 * h, yt, k2);
      yt = y + h * (T::a31 * k1 + T::a32 * k2);
      rhs(x + T::c3 * h, yt, k3);
      yt = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
      rhs(x + T::c4 * h, yt, k4);
      yt = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
      rhs(x + T::c5 * h, yt, k5);
      yt = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
      rhs(x + h, yt, k6);
      ynew = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
      rhs(x + h, ynew, k7);
      err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
      double scale = opt.abs_tol + opt.rel_tol * std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
      double enorm = err.cwiseAbs().maxCoeff() / scale;
      if (!std::isfinite(enorm)) throw AccuracyError("integrator produced non-finite state", enorm);
      if (enorm <= 1.0) {
        x += h;
        y.swap(ynew);
        k1.swap(k7);  // FSAL
        double fac = (enorm > 0) ? 0.9 * std::pow(enorm, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
      } else {
        h *= std::max(0.2, 0.9 * std::pow(enorm, -0.2));
        if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(x)))
          throw AccuracyError("integrator step size underflow", enorm);
      }
    }
    x = target;
  }
}

// Spectral parameter with a declared nth root. The canonical branch is the
// principal one, arg(rho) = arg(lambda)/n.
struct SpectralPoint {
  cplx lambda;
  cplx rho;
  static SpectralPoint canonical(cplx lambda, int n) {
    double r = std::pow(std::abs(lambda), 1.0 / n);
    double th = std::arg(lambda) / n;
    return SpectralPoint{lambda, cplx(r * std::cos(th), r * std::sin(th))};
  }
};

enum class TrajectoryKind { fundamental_at_0, weyl };

struct MatrixTrajectory {
  TrajectoryKind kind = TrajectoryKind::fundamental_at_0;
  cplx lambda;
  std::vector<double> grid;          // ascending x-nodes
  std::vector<MatrixXcd> values;     // one n x n matrix per node
};

// Generator F(x) + s*Lambda with Lambda having lambda at position (n,1).
// s = +1 for the direct equation, (-1)^n for the dual one.
struct SystemGenerator {
  const AssociatedMatrix* F;
  cplx lambda;
  double lambda_sign = 1.0;
  MatrixXcd at(double x) const {
    MatrixXcd A = F->eval(x);
    A(F->order() - 1, 0) += lambda_sign * lambda;
    return A;
  }
};

inline SystemGenerator direct_generator(const AssociatedMatrix& F, cplx lambda) {
  return SystemGenerator{&F, lambda, 1.0};
}
inline SystemGenerator star_generator(const AssociatedMatrix& Fstar, cplx lambda) {
  return SystemGenerator{&Fstar, lambda, (Fstar.order() % 2 == 0) ? 1.0 : -1.0};
}

// Fundamental matrix C(x,lambda) with C(0,lambda) = I, sampled on the grid.
// Nodes and coefficient breakpoints are forced to be step boundaries.
inline MatrixTrajectory fundamental_matrix(const AssociatedMatrix& F, cplx lambda,
                                           const ChebyshevGrid& grid, const OdeOptions& opt = {},
                                           double lambda_sign = 1.0) {
  const int n = F.order();
  SystemGenerator gen{&F, lambda, lambda_sign};
  auto rhs = [&](double x, const VectorXcd& y, VectorXcd& dy) {
    MatrixXcd A = gen.at(x);
    Eigen::Map<const MatrixXcd> Y(y.data(), n, n);
    Eigen::Map<MatrixXcd> DY(dy.data(), n, n);
    DY = A * Y;
  };
  std::vector<double> stops = F.breakpoints();
  MatrixTrajectory tr;
  tr.kind = TrajectoryKind::fundamental_at_0;
  tr.lambda = lambda;
  tr.grid = grid.nodes();
  tr.values.reserve(grid.size());
  MatrixXcd Y = MatrixXcd::Identity(n, n);
  VectorXcd y = Eigen::Map<const VectorXcd>(Y.data(), n * n);
  tr.values.push_back(Y);
  for (int i = 1; i < grid.size(); ++i) {
    ode_integrate(rhs, grid.node(i - 1), grid.node(i), y, stops, opt);
    tr.values.push_back(Eigen::Map<const MatrixXcd>(y.data(), n, n));
  }
  return tr;
}

// Exact quasi-derivatives of a piecewise polynomial under F:
// y^[k] = (y^[k-1])' - sum_{j<=k} f_{k,j} y^[j-1]. Returns y^[0] .. y^[upto].
inline std::vector<Function1D> quasi_derivatives(const AssociatedMatrix& F, const Function1D& y,
                                                 int upto) {
  if (upto > F.order()) throw DimensionMismatch("quasi derivatives beyond order n");
  std::vector<Function1D> q{y};
  for (int k = 1; k <= upto; ++k) {
    Function1D next = q[k - 1].derivative();
    for (int j = 1; j <= k; ++j) next = next - F.lower(k, j) * q[j - 1];
    q.push_back(std::move(next));
  }
  return q;
}

inline std::vector<Function1D> quasi_derivative_column(const AssociatedMatrix& F, const Function1D& y) {
  return quasi_derivatives(F, y, F.order() - 1);
}

// Lagrange bracket <z,y> = sum_{k=0}^{n-1} (-1)^k z^[k] y^[n-k-1] at one point,
// with z a quasi-derivative vector under F* and y one under F.
inline cplx lagrange_bracket(const VectorXcd& zvec, const VectorXcd& yvec) {
  if (zvec.size() != yvec.size()) throw DimensionMismatch("lagrange bracket: size mismatch");
  const int n = static_cast<int>(zvec.size());
  cplx s = 0.0;
  for (int k = 0; k < n; ++k) s += ((k % 2 == 0) ? 1.0 : -1.0) * zvec(k) * yvec(n - k - 1);
  return s;
}

}  // namespace specmap
