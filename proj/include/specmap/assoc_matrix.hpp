#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "specmap/coefficients.hpp"
#include "specmap/grid.hpp"
#include "specmap/piecewise_poly.hpp"

namespace specmap {

// Matrix function F(x) of the almost-companion class: entries above the
// superdiagonal vanish, the superdiagonal is identically 1, and only the
// lower part (k >= j) is stored. The mask is structural, so downstream code
// cannot corrupt the shape.
class AssociatedMatrix {
 public:
  AssociatedMatrix() = default;
  explicit AssociatedMatrix(int n) : n_(n), low_(n) {
    for (int k = 1; k <= n; ++k) low_[k - 1].assign(k, Function1D());
  }

  int order() const { return n_; }

  const Function1D& lower(int k, int j) const { return low_[k - 1][j - 1]; }  // 1-based, k >= j
  void set_lower(int k, int j, Function1D f) { low_[k - 1][j - 1] = std::move(f); }

  cplx entry(int k, int j, double x) const {
    if (k < j) return (j == k + 1) ? cplx(1.0) : cplx(0.0);
    return low_[k - 1][j - 1].eval(x);
  }

  MatrixXcd eval(double x) const {
    MatrixXcd F = MatrixXcd::Zero(n_, n_);
    for (int k = 1; k <= n_; ++k) {
      if (k < n_) F(k - 1, k) = 1.0;
      for (int j = 1; j <= k; ++j) F(k - 1, j - 1) = low_[k - 1][j - 1].eval(x);
    }
    return F;
  }

  std::vector<double> breakpoints() const {
    std::vector<double> bp{0.0, 1.0};
    for (const auto& row : low_)
      for (const auto& f : row) bp.insert(bp.end(), f.breakpoints().begin(), f.breakpoints().end());
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             bp.end());
    return bp;
  }

 private:
  int n_ = 0;
  std::vector<std::vector<Function1D>> low_;
};

// Regularization matrix built from the sigma set. For n >= 3 the entries come
// from the Q-matrix formulas (p = floor(n/2)):
//   q_{0,1} = s0+s1, q_{1,0} = s0-s1, q_{k,k} = s_{2k} (1<=k<=p-1),
//   q_{k,k+1} = s_{2k+1}, q_{k+1,k} = -s_{2k+1} (1<=k<=n-p-2),
//   f_{k,j} = (-1)^{k+n+1} q_{j-1,n-k},  k = p+1..n, j = 1..n-p.
// For n = 2 the dedicated 2x2 matrix is used with sigma = tau_0^{(-1)}.
inline AssociatedMatrix associated_matrix(const SigmaSet& s) {
  const int n = s.n;
  if (n < 2) throw UnsupportedOrder("order must be >= 2");
  AssociatedMatrix F(n);
  if (n == 2) {
    Function1D sig = -s.sigma[0];  // tau_0^{(-1)}
    F.set_lower(1, 1, -sig);
    F.set_lower(2, 1, cplx(-1.0) * (sig * sig));
    F.set_lower(2, 2, sig);
    return F;
  }
  const int p = n / 2;
  auto q = [&](int r, int c) -> Function1D {
    if (r == 0 && c == 1) return s.sigma[0] + s.sigma[1];
    if (r == 1 && c == 0) return s.sigma[0] - s.sigma[1];
    if (r == c && r >= 1 && r <= p - 1) return s.sigma[2 * r];
    if (c == r + 1 && r >= 1 && r <= n - p - 2) return s.sigma[2 * r + 1];
    if (r == c + 1 && c >= 1 && c <= n - p - 2) return -s.sigma[2 * c + 1];
    return Function1D();
  };
  for (int k = p + 1; k <= n; ++k) {
    double sgn = ((k + n + 1) % 2 == 0) ? 1.0 : -1.0;
    for (int j = 1; j <= std::min(k, n - p); ++j) F.set_lower(k, j, cplx(sgn) * q(j - 1, n - k));
  }
  return F;
}

inline AssociatedMatrix associated_matrix(const CoefficientSet& coeffs) {
  return associated_matrix(make_sigma(coeffs));
}

inline AssociatedMatrix zero_matrix(int n) {
  CoefficientSet c;
  c.n = n;
  c.tau.assign(n - 1, Function1D());
  return associated_matrix(make_sigma(c));
}

// Dual matrix: f*_{k,j} = (-1)^{k+j+1} f_{n-j+1,n-k+1}. An involution that
// preserves the class.
inline AssociatedMatrix star_matrix(const AssociatedMatrix& F) {
  const int n = F.order();
  AssociatedMatrix S(n);
  for (int k = 1; k <= n; ++k)
    for (int j = 1; j <= k; ++j) {
      double sgn = ((k + j + 1) % 2 == 0) ? 1.0 : -1.0;
      S.set_lower(k, j, cplx(sgn) * F.lower(n - j + 1, n - k + 1));
    }
  return S;
}

struct ClassReport {
  bool in_class = true;
  bool selfadjoint = false;
  double max_violation = 0.0;
};

// Samples the self-adjointness relation f_{k,j} = (-1)^{k+j+1} conj(f_{n-j+1,n-k+1})
// on a 64-point grid; relative tolerance 1e-10.
inline ClassReport check_class(const AssociatedMatrix& F, int samples = 64, double rel_tol = 1e-10) {
  const int n = F.order();
  ClassReport rep;
  double scale = 0.0, worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    double x = double(i) / samples;
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= k; ++j) {
        cplx a = F.lower(k, j).eval(x);
        cplx b = F.lower(n - j + 1, n - k + 1).eval(x);
        double sgn = ((k + j + 1) % 2 == 0) ? 1.0 : -1.0;
        worst = std::max(worst, std::abs(a - sgn * std::conj(b)));
        scale = std::max({scale, std::abs(a), 1.0});
      }
  }
  rep.max_violation = worst;
  rep.selfadjoint = worst < rel_tol * scale;
  return rep;
}

// Line-oriented dump "k j c0 c1 ... | c0 c1 ..." per stored entry, for
// inspection and golden-file tests.
inline std::string dump_matrix(const AssociatedMatrix& F) {
  std::string out;
  char buf[64];
  for (int k = 1; k <= F.order(); ++k)
    for (int j = 1; j <= k; ++j) {
      const Function1D& f = F.lower(k, j);
      if (f.is_zero()) continue;
      out += std::to_string(k) + " " + std::to_string(j);
      for (int pc = 0; pc < f.piece_count(); ++pc) {
        out += (pc == 0) ? " " : " | ";
        const auto& c = f.pieces()[pc].c;
        for (size_t i = 0; i < c.size(); ++i) {
          snprintf(buf, sizeof(buf), "%.17g%+.17gi", c[i].real(), c[i].imag());
          out += std::string(i ? " " : "") + buf;
        }
      }
      out += "\n";
    }
  return out;
}

}  // namespace specmap
