#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "specmap/errors.hpp"
#include "specmap/piecewise_poly.hpp"

namespace specmap {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Chebyshev-Lobatto grid on [0,1], ascending: x_i = (1 - cos(pi i / m)) / 2.
// Carries the spectral differentiation matrix, Clenshaw-Curtis weights and the
// cumulative integration matrix (samples -> values of the antiderivative that
// vanishes at x = 0).
class ChebyshevGrid {
 public:
  explicit ChebyshevGrid(int size) {
    if (size < 3 || ((size - 1) & (size - 2)) != 0)
      throw RepresentationError("grid size must be 2^m + 1");
    const int m = size - 1;
    x_.resize(size);
    for (int i = 0; i <= m; ++i) x_[i] = 0.5 * (1.0 - std::cos(M_PI * i / m));
    x_[0] = 0.0;
    x_[m] = 1.0;
    build_diff(m);
    build_cumint(m);
    build_gauss(m);
  }

  int size() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& nodes() const { return x_; }
  double node(int i) const { return x_[i]; }

  const MatrixXd& diff() const { return diff_; }
  const MatrixXd& cumint() const { return cumint_; }

  // Full integral over [0,1].
  cplx integrate(const VectorXcd& samples) const { return weights_.transpose().cast<cplx>() * samples; }

  VectorXcd differentiate(const VectorXcd& samples) const { return diff_ * samples; }

  // F(x_i) = int_0^{x_i} f, spectrally accurate for smooth samples.
  VectorXcd cumulative(const VectorXcd& samples) const { return cumint_ * samples; }

  VectorXcd sample(const Function1D& f) const {
    VectorXcd v(size());
    for (int i = 0; i < size(); ++i) v(i) = f.eval(x_[i]);
    return v;
  }

  // W(x_i) = int_0^{x_i} exp(-a (x_i - t)) g(t) dt for a >= 0: exact
  // exponential propagation between nodes, per-segment Gauss quadrature on
  // the global interpolant of g. Stable for arbitrarily large a where the
  // plain cumulative of e^{a t}-sized integrands loses everything.
  VectorXcd weighted_cumulative(const VectorXcd& g, double a) const {
    const int N = size();
    VectorXcd gv = gauss_interp_ * g;
    VectorXcd W(N);
    W(0) = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
      double h = x_[i + 1] - x_[i];
      cplx seg = 0.0;
      for (int q = 0; q < kGauss; ++q) {
        double t = x_[i] + gauss_xi_[q] * h;
        seg += gauss_w_[q] * std::exp(-a * (x_[i + 1] - t)) * gv(i * kGauss + q);
      }
      W(i + 1) = std::exp(-a * h) * W(i) + h * seg;
    }
    return W;
  }

  // R(x_i) = int_{x_i}^1 exp(-a (t - x_i)) g(t) dt for a >= 0.
  VectorXcd weighted_cumulative_reverse(const VectorXcd& g, double a) const {
    const int N = size();
    VectorXcd gv = gauss_interp_ * g;
    VectorXcd R(N);
    R(N - 1) = 0.0;
    for (int i = N - 2; i >= 0; --i) {
      double h = x_[i + 1] - x_[i];
      cplx seg = 0.0;
      for (int q = 0; q < kGauss; ++q) {
        double t = x_[i] + gauss_xi_[q] * h;
        seg += gauss_w_[q] * std::exp(-a * (t - x_[i])) * gv(i * kGauss + q);
      }
      R(i) = std::exp(-a * h) * R(i + 1) + h * seg;
    }
    return R;
  }

 private:
  static constexpr int kGauss = 6;
  std::vector<double> x_;
  MatrixXd diff_, cumint_, gauss_interp_;
  std::array<double, kGauss> gauss_xi_, gauss_w_;
  VectorXd weights_;

  // Trefethen's matrix on y_j = cos(j pi / m), mapped by x = (1-y)/2.
  void build_diff(int m) {
    const int n = m + 1;
    VectorXd y(n), c(n);
    for (int i = 0; i < n; ++i) {
      y(i) = std::cos(M_PI * i / m);
      c(i) = (i == 0 || i == m) ? 2.0 : 1.0;
    }
    MatrixXd D(n, n);
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        D(i, j) = (c(i) / c(j)) * sgn / (y(i) - y(j));
        sum += D(i, j);
      }
      D(i, i) = -sum;
    }
    diff_ = -2.0 * D;  // d/dx = -2 d/dy
  }

  void build_cumint(int m) {
    const int n = m + 1;
    // A: samples at y_j (descending) -> Chebyshev coefficients a_k (DCT-I).
    MatrixXd A(n, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double w = (j == 0 || j == m) ? 0.5 : 1.0;
        A(k, j) = (2.0 / m) * w * std::cos(M_PI * k * j / m);
      }
    A.row(0) *= 0.5;
    A.row(m) *= 0.5;
    // B: coefficients -> coefficients of the antiderivative in y, with b_0
    // fixed so that the antiderivative vanishes at y = 1 (i.e. x = 0).
    MatrixXd B = MatrixXd::Zero(n + 1, n);
    for (int k = 1; k <= m + 1; ++k) {
      if (k - 1 < n) B(k, k - 1) += 1.0 / (2.0 * k);
      if (k + 1 < n) B(k, k + 1) -= 1.0 / (2.0 * k);
    }
    B(1, 0) += 0.5;  // integral of T_0 is T_1, combined with the k=1 recurrence above
    for (int k = 1; k <= m + 1; ++k) B.row(0) -= B.row(k);
    // E: antiderivative coefficients -> values at y_i.
    MatrixXd E(n, n + 1);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k <= m + 1; ++k) E(i, k) = std::cos(k * M_PI * i / m);
    // int_0^x f dx = -(1/2) * F_y(y(x)).
    cumint_ = -0.5 * (E * (B * A));
    weights_ = cumint_.row(m).transpose();
  }

  // Gauss-Legendre 6 on (0,1) plus the barycentric interpolation matrix from
  // the grid nodes to every per-segment Gauss abscissa.
  void build_gauss(int m) {
    gauss_xi_ = {0.033765242898423986, 0.169395306766867743, 0.380690406958401546,
                 0.619309593041598454, 0.830604693233132257, 0.966234757101576014};
    gauss_w_ = {0.085662246189585173, 0.180380786524069304, 0.233956967286345524,
                0.233956967286345524, 0.180380786524069304, 0.085662246189585173};
    const int n = m + 1;
    std::vector<double> bw(n);  // barycentric weights for Chebyshev-Lobatto
    for (int j = 0; j < n; ++j) {
      bw[j] = (j % 2 == 0) ? 1.0 : -1.0;
      if (j == 0 || j == m) bw[j] *= 0.5;
    }
    gauss_interp_ = MatrixXd::Zero(kGauss * m, n);
    for (int i = 0; i < m; ++i) {
      double h = x_[i + 1] - x_[i];
      for (int q = 0; q < kGauss; ++q) {
        double t = x_[i] + gauss_xi_[q] * h;
        int row = i * kGauss + q;
        double denom = 0.0;
        bool exact = false;
        for (int j = 0; j < n; ++j)
          if (t == x_[j]) {
            gauss_interp_(row, j) = 1.0;
            exact = true;
            break;
          }
        if (exact) continue;
        for (int j = 0; j < n; ++j) denom += bw[j] / (t - x_[j]);
        for (int j = 0; j < n; ++j) gauss_interp_(row, j) = bw[j] / (t - x_[j]) / denom;
      }
    }
  }
};

}  // namespace specmap
