#pragma once

#include <Eigen/Dense>
#include <vector>

#include "specmap/assoc_matrix.hpp"
#include "specmap/errors.hpp"
#include "specmap/grid.hpp"
#include "specmap/ode.hpp"

namespace specmap {

// Weyl solution Phi_k(., lambda): k initial conditions at 0
// (Phi^[j-1](0) = delta_{kj}, j <= k) and n-k vanishing conditions at 1.
// Computed by backward-orthonormalized superposition: the k-dimensional
// boundary basis at x = 1 is marched to 0 with a QR re-factorization at every
// grid node, the x = 0 conditions are solved on the orthonormal basis, and the
// coefficient vector is pushed back through the stored triangular factors.
// Stable uniformly in |rho| (a naive superposition loses e^{|rho|}).
// Returns the n x N trajectory of quasi-derivative vectors on the grid.
inline MatrixXcd weyl_trajectory(const AssociatedMatrix& F, cplx lambda, int k,
                                 const ChebyshevGrid& grid, double lambda_sign = 1.0,
                                 const OdeOptions& opt = {}) {
  const int n = F.order();
  const int N = grid.size();
  if (k < 1 || k > n) throw DimensionMismatch("weyl_trajectory: bad column index");
  SystemGenerator gen{&F, lambda, lambda_sign};
  std::vector<double> stops = F.breakpoints();
  auto rhs = [&](double x, const VectorXcd& y, VectorXcd& dy) {
    MatrixXcd A = gen.at(x);
    Eigen::Map<const MatrixXcd> Y(y.data(), n, y.size() / n);
    Eigen::Map<MatrixXcd> DY(dy.data(), n, y.size() / n);
    DY = A * Y;
  };

  MatrixXcd out(n, N);
  if (k == n) {
    // no conditions at 1; plain forward integration of the last unit vector
    VectorXcd y = VectorXcd::Zero(n);
    y(n - 1) = 1.0;
    out.col(0) = y;
    for (int i = 1; i < N; ++i) {
      ode_integrate(rhs, grid.node(i - 1), grid.node(i), y, stops, opt);
      out.col(i) = y;
    }
    return out;
  }

  const int m = k;  // dimension of the boundary space at x = 1
  std::vector<MatrixXcd> Q(N), R(N - 1);
  MatrixXcd B = MatrixXcd::Zero(n, m);
  for (int i = 0; i < m; ++i) B(n - m + i, i) = 1.0;  // e_{n-k+1} .. e_n
  Q[N - 1] = B;
  for (int i = N - 2; i >= 0; --i) {
    VectorXcd y = Eigen::Map<const VectorXcd>(Q[i + 1].data(), n * m);
    ode_integrate(rhs, grid.node(i + 1), grid.node(i), y, stops, opt);
    MatrixXcd T = Eigen::Map<const MatrixXcd>(y.data(), n, m);
    Eigen::HouseholderQR<MatrixXcd> qr(T);
    Q[i] = qr.householderQ() * MatrixXcd::Identity(n, m);
    R[i] = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  }

  // x = 0 conditions on the orthonormal basis: rows 1..k of Q[0] c = e_k
  MatrixXcd A0 = Q[0].topRows(k);
  Eigen::VectorXcd rhs0 = VectorXcd::Zero(k);
  rhs0(k - 1) = 1.0;
  Eigen::ColPivHouseholderQR<MatrixXcd> solver(A0);
  if (solver.rank() < k)
    throw ConditionedError("weyl_trajectory: boundary system singular (lambda at an eigenvalue?)",
                           1e300);
  VectorXcd c = solver.solve(rhs0);

  out.col(0) = Q[0] * c;
  for (int i = 1; i < N; ++i) {
    c = R[i - 1].triangularView<Eigen::Upper>().solve(c);
    out.col(i) = Q[i] * c;
  }
  return out;
}

// Residuals of the defining boundary conditions; the x=1 block is exact by
// construction, the x=0 block reflects the final solve.
inline double weyl_bc_residual(const MatrixXcd& traj, int k) {
  const int n = static_cast<int>(traj.rows());
  double r = 0.0;
  for (int j = 1; j <= k; ++j)
    r = std::max(r, std::abs(traj(j - 1, 0) - ((j == k) ? cplx(1.0) : cplx(0.0))));
  for (int s = 1; s <= n - k; ++s) r = std::max(r, std::abs(traj(s - 1, traj.cols() - 1)));
  return r;
}

}  // namespace specmap
