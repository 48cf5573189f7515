#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "specmap/errors.hpp"
#include "specmap/grid.hpp"

namespace specmap {

// Closed-form spectral quantities for the zero-coefficient (companion) matrix:
// y^(n) = lambda y has the mode basis e^{rho w_m x} with w_m the n-th roots of
// unity, so every minor of the fundamental matrix is a finite exponential sum
//   sum_S det(V_{J,S}) e^{rho sum_S w} det(V^{-1}_{S,T}),
// with V the Vandermonde matrix of {rho w_m}. Evaluating that sum term by term
// avoids the catastrophic cancellation of forming determinants of integrated
// solutions and is exact up to rounding. Serves as the chi-constant engine and
// as an independent oracle for the compound-integration route.
class CompanionModes {
 public:
  explicit CompanionModes(int n) : n_(n) {
    omega_.resize(n);
    for (int m = 0; m < n; ++m)
      omega_[m] = std::exp(cplx(0.0, 2.0 * M_PI * m / n));
    // Omega_{j,m} = omega_m^j, j = 0..n-1; inverse = conj(Omega)/n.
    Omega_ = MatrixXcd(n, n);
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) Omega_(j, m) = std::pow(omega_[m], j);
    OmegaInv_ = Omega_.conjugate() / double(n);
  }

  int order() const { return n_; }

  // Natural minor over rows {1..q} of the trailing columns {k+1..n} of
  // C(1,lambda), with q = n-k. Vanishes exactly at the eigenvalues of the
  // boundary problem with k conditions at 0.
  cplx natural_minor(int k, cplx lambda) const {
    const int q = n_ - k;
    cplx rho = nth_root(lambda);
    std::vector<int> rows(q), cols(q);
    for (int i = 0; i < q; ++i) rows[i] = i;          // derivative orders 0..q-1
    for (int i = 0; i < q; ++i) cols[i] = k + i;       // columns k+1..n (0-based)
    cplx acc = 0.0;
    std::vector<int> S(q);
    subset_sum(acc, S, 0, 0, q, rows, cols, rho);
    // rho powers: + sum(rows) from V rows, - sum(cols) from V^{-1} columns
    int pow_exp = q * (q - 1) / 2;
    for (int c : cols) pow_exp -= c;
    return acc * std::pow(rho, double(pow_exp));
  }

  // Paper-arranged characteristic determinant (rows listed by descending
  // derivative order): reversal sign times the natural minor.
  cplx char_delta(int k, cplx lambda) const {
    const int q = n_ - k;
    double sgn = ((q * (q - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    return sgn * natural_minor(k, lambda);
  }

  static cplx nth_root_of(cplx lambda, int n) {
    double r = std::pow(std::abs(lambda), 1.0 / n);
    double th = std::arg(lambda) / n;
    return cplx(r * std::cos(th), r * std::sin(th));
  }

 private:
  int n_;
  std::vector<cplx> omega_;
  MatrixXcd Omega_, OmegaInv_;

  cplx nth_root(cplx lambda) const { return nth_root_of(lambda, n_); }

  void subset_sum(cplx& acc, std::vector<int>& S, int pos, int start, int q,
                  const std::vector<int>& rows, const std::vector<int>& cols, cplx rho) const {
    if (pos == q) {
      MatrixXcd A(q, q), B(q, q);
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
          A(i, j) = Omega_(rows[i], S[j]);
          B(i, j) = OmegaInv_(S[i], cols[j]);
        }
      cplx wsum = 0.0;
      for (int j = 0; j < q; ++j) wsum += omega_[S[j]];
      acc += A.determinant() * B.determinant() * std::exp(rho * wsum);
      return;
    }
    for (int m = start; m <= n_ - (q - pos); ++m) {
      S[pos] = m;
      subset_sum(acc, S, pos + 1, m + 1, q, rows, cols, rho);
    }
  }
};

}  // namespace specmap
