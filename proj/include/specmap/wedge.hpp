#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <vector>

#include "specmap/assoc_matrix.hpp"
#include "specmap/errors.hpp"
#include "specmap/ode.hpp"

namespace specmap {

// Exterior power of the first-order system: the q-th compound of
// Y' = A(x) Y propagates wedge coordinates W_J (minors over row sets J of a
// column bundle) by a linear system of dimension C(n,q). Integrating minors
// directly keeps their relative accuracy where forming determinants of
// integrated fundamental solutions would cancel catastrophically at large
// |rho|.
class WedgeTable {
 public:
  WedgeTable(int n, int q) : n_(n), q_(q) {
    // enumerate q-subsets of {0..n-1} lexicographically; {0..q-1} is first
    std::vector<int> cur(q);
    for (int i = 0; i < q; ++i) cur[i] = i;
    while (true) {
      index_[mask(cur)] = static_cast<int>(subsets_.size());
      subsets_.push_back(cur);
      int i = q - 1;
      while (i >= 0 && cur[i] == n - q + i) --i;
      if (i < 0) break;
      ++cur[i];
      for (int j = i + 1; j < q; ++j) cur[j] = cur[j - 1] + 1;
    }
    build_ops();
  }

  int dim() const { return static_cast<int>(subsets_.size()); }
  int subset_index(const std::vector<int>& sorted0based) const {
    auto it = index_.find(mask(sorted0based));
    if (it == index_.end()) throw DimensionMismatch("wedge subset not found");
    return it->second;
  }

  // dW_out = A^{(q)} W_in for each column of W_in.
  void apply(const MatrixXcd& A, const MatrixXcd& Win, MatrixXcd& Wout) const {
    Wout.setZero();
    for (const auto& op : ops_) Wout.row(op.out) += (op.sign * A(op.arow, op.acol)) * Win.row(op.in);
  }

 private:
  struct Op {
    int out, in, arow, acol;
    double sign;
  };
  int n_, q_;
  std::vector<std::vector<int>> subsets_;
  std::map<unsigned, int> index_;
  std::vector<Op> ops_;

  static unsigned mask(const std::vector<int>& s) {
    unsigned m = 0;
    for (int v : s) m |= (1u << v);
    return m;
  }

  void build_ops() {
    for (int jj = 0; jj < dim(); ++jj) {
      const auto& J = subsets_[jj];
      for (int t = 0; t < q_; ++t) {
        int a = J[t];
        for (int r = 0; r < n_; ++r) {
          if (r == a) {
            ops_.push_back({jj, jj, a, a, 1.0});
            continue;
          }
          bool inJ = std::binary_search(J.begin(), J.end(), r);
          if (inJ) continue;
          std::vector<int> T(J);
          T[t] = r;
          // parity of moving r into sorted position: count members of J\{a}
          // strictly between a and r
          int lo = std::min(a, r), hi = std::max(a, r), cnt = 0;
          for (int v : J)
            if (v != a && v > lo && v < hi) ++cnt;
          std::sort(T.begin(), T.end());
          ops_.push_back({jj, subset_index(T), a, r, (cnt % 2 == 0) ? 1.0 : -1.0});
        }
      }
    }
  }
};

// Weyl-Yurko column machinery. For column k (q = n-k) the boundary system at
// x = 1 is solved by Cramer ratios of first-row-block minors:
//   denominator:  wedge of columns {k+1..n},
//   numerators:   wedges of {k} u {k+1..n}\{j},
//   M_{j,k} = (-1)^{j-k} N_j / W.
// All wedges are propagated from their unit initial values at x = 0 in one
// stacked adaptive integration.
class WeylEvaluator {
 public:
  WeylEvaluator(const AssociatedMatrix& F, double lambda_sign, std::vector<int> ks,
                bool with_numerators, OdeOptions opt = {})
      : F_(&F), n_(F.order()), lambda_sign_(lambda_sign), with_num_(with_numerators), opt_(opt) {
    stops_ = F.breakpoints();
    for (int k : ks) {
      Level lv;
      lv.k = k;
      lv.q = n_ - k;
      lv.table = std::make_shared<WedgeTable>(n_, lv.q);
      levels_.push_back(std::move(lv));
    }
  }

  struct ColumnResult {
    int k;
    cplx denom;                 // natural minor over rows {1..q}, true scale
    std::vector<cplx> numer;    // N_j, j = k+1..n, true scale
    double scale;               // max wedge magnitude at x = 1 (scaled state)
    double denom_rel;           // |denom| relative to the scaled state; fair
                                // proximity measure w.r.t. the eigenvalues
  };

  // Evaluate all requested columns at one lambda. Internally the rho-scaled
  // system D A D^{-1}, D = diag(rho^{-j}), is integrated: it equalizes the
  // row grading of the wedge components (which otherwise spread over
  // rho^{q(n-q)} decades and lose relative accuracy) and leaves the unit
  // initial wedges unchanged. True minors differ from scaled ones by exact
  // rho powers that are restored on output.
  std::vector<ColumnResult> eval(cplx lambda) const {
    int total = 0;
    std::vector<int> offs;
    for (const auto& lv : levels_) {
      offs.push_back(total);
      total += lv.table->dim() * (1 + (with_num_ ? lv.q : 0));
    }
    VectorXcd y = VectorXcd::Zero(total);
    for (size_t li = 0; li < levels_.size(); ++li) {
      const auto& lv = levels_[li];
      const int d = lv.table->dim();
      std::vector<int> trailing(lv.q);
      for (int i = 0; i < lv.q; ++i) trailing[i] = lv.k + i;  // 0-based {k..n-1}
      y(offs[li] + lv.table->subset_index(trailing)) = 1.0;
      if (with_num_) {
        for (int jc = 0; jc < lv.q; ++jc) {
          std::vector<int> S{lv.k - 1};  // column k, 0-based
          for (int i = 0; i < lv.q; ++i)
            if (i != jc) S.push_back(lv.k + i);
          y(offs[li] + d * (1 + jc) + lv.table->subset_index(S)) = 1.0;
        }
      }
    }
    const double rho = std::max(1.0, std::pow(std::abs(lambda), 1.0 / n_));
    SystemGenerator gen{F_, lambda, lambda_sign_};
    auto rhs = [&](double x, const VectorXcd& v, VectorXcd& dv) {
      MatrixXcd A = gen.at(x);
      for (int j = 0; j < n_; ++j)
        for (int c = 0; c < n_; ++c) A(j, c) *= std::pow(rho, c - j);
      for (size_t li = 0; li < levels_.size(); ++li) {
        const auto& lv = levels_[li];
        const int d = lv.table->dim();
        const int cols = 1 + (with_num_ ? lv.q : 0);
        Eigen::Map<const MatrixXcd> Win(v.data() + offs[li], d, cols);
        MatrixXcd Wout(d, cols);
        lv.table->apply(A, Win, Wout);
        Eigen::Map<MatrixXcd>(dv.data() + offs[li], d, cols) = Wout;
      }
    };
    VectorXcd yf = y;
    ode_integrate(rhs, 0.0, 1.0, yf, stops_, opt_);

    std::vector<ColumnResult> out;
    for (size_t li = 0; li < levels_.size(); ++li) {
      const auto& lv = levels_[li];
      const int d = lv.table->dim();
      const int q = lv.q;
      ColumnResult r;
      r.k = lv.k;
      std::vector<int> toprows(q);
      for (int i = 0; i < q; ++i) toprows[i] = i;
      int top = lv.table->subset_index(toprows);
      cplx denom_scaled = yf(offs[li] + top);
      r.scale = yf.segment(offs[li], d * (1 + (with_num_ ? q : 0))).cwiseAbs().maxCoeff();
      r.denom_rel = std::abs(denom_scaled) / std::max(r.scale, 1e-300);
      // grade(J) = sum of 0-based rows; true = scaled * rho^{grade(J)-grade(T)}
      int grade_top = q * (q - 1) / 2;
      int grade_tw = 0;
      for (int i = 0; i < q; ++i) grade_tw += lv.k + i;
      r.denom = denom_scaled * std::pow(rho, double(grade_top - grade_tw));
      if (with_num_)
        for (int jc = 0; jc < q; ++jc) {
          int grade_tn = grade_tw - (lv.k + jc) + (lv.k - 1);
          r.numer.push_back(yf(offs[li] + d * (1 + jc) + top) *
                            std::pow(rho, double(grade_top - grade_tn)));
        }
      out.push_back(std::move(r));
    }
    return out;
  }

  int order() const { return n_; }

  // First and second lambda-derivatives of the wedge minors at one point,
  // from a single integration of the derivative-augmented system
  //   W' = A W,  W_l' = A W_l + (dA/dl) W,  W_ll' = A W_ll + 2 (dA/dl) W_l.
  // Gives Laurent data of the Weyl-Yurko matrix at an eigenvalue without
  // evaluating anything near the pole. Derivative blocks carry a kappa =
  // max(1,|lambda|) scaling to keep the stacked state balanced.
  struct DerivResult {
    int k = 0;
    double scale = 0.0, rho = 1.0, kappa = 1.0;
    cplx W, Wl, Wll;          // scaled top-row minors: denominator and kappa^m d^m/dl^m
    std::vector<cplx> N, Nl;  // scaled numerators and their kappa-scaled derivatives
  };

  std::vector<DerivResult> eval_derivatives(cplx lambda) const {
    if (!with_num_) throw DimensionMismatch("derivative evaluation needs numerators");
    int total = 0;
    std::vector<int> offs;
    for (const auto& lv : levels_) {
      offs.push_back(total);
      total += lv.table->dim() * 3 * (1 + lv.q);
    }
    VectorXcd y = VectorXcd::Zero(total);
    for (size_t li = 0; li < levels_.size(); ++li) {
      const auto& lv = levels_[li];
      const int d = lv.table->dim();
      std::vector<int> trailing(lv.q);
      for (int i = 0; i < lv.q; ++i) trailing[i] = lv.k + i;
      y(offs[li] + lv.table->subset_index(trailing)) = 1.0;
      for (int jc = 0; jc < lv.q; ++jc) {
        std::vector<int> S{lv.k - 1};
        for (int i = 0; i < lv.q; ++i)
          if (i != jc) S.push_back(lv.k + i);
        y(offs[li] + d * (1 + jc) + lv.table->subset_index(S)) = 1.0;
      }
    }
    const double rho = std::max(1.0, std::pow(std::abs(lambda), 1.0 / n_));
    const double kappa = std::max(1.0, std::abs(lambda));
    SystemGenerator gen{F_, lambda, lambda_sign_};
    MatrixXcd Src = MatrixXcd::Zero(n_, n_);
    Src(n_ - 1, 0) = lambda_sign_ * kappa * std::pow(rho, 1.0 - n_);
    auto rhs = [&](double x, const VectorXcd& v, VectorXcd& dv) {
      MatrixXcd A = gen.at(x);
      for (int j = 0; j < n_; ++j)
        for (int c = 0; c < n_; ++c) A(j, c) *= std::pow(rho, c - j);
      for (size_t li = 0; li < levels_.size(); ++li) {
        const auto& lv = levels_[li];
        const int d = lv.table->dim();
        const int cols = 1 + lv.q;
        Eigen::Map<const MatrixXcd> Wb(v.data() + offs[li], d, cols);
        Eigen::Map<const MatrixXcd> Wdl(v.data() + offs[li] + d * cols, d, cols);
        Eigen::Map<const MatrixXcd> Wdll(v.data() + offs[li] + 2 * d * cols, d, cols);
        MatrixXcd t0(d, cols), t1(d, cols), t2(d, cols), s(d, cols);
        lv.table->apply(A, Wb, t0);
        lv.table->apply(A, Wdl, t1);
        lv.table->apply(Src, Wb, s);
        t1 += s;
        lv.table->apply(A, Wdll, t2);
        lv.table->apply(Src, Wdl, s);
        t2 += 2.0 * s;
        Eigen::Map<MatrixXcd>(dv.data() + offs[li], d, cols) = t0;
        Eigen::Map<MatrixXcd>(dv.data() + offs[li] + d * cols, d, cols) = t1;
        Eigen::Map<MatrixXcd>(dv.data() + offs[li] + 2 * d * cols, d, cols) = t2;
      }
    };
    VectorXcd yf = y;
    ode_integrate(rhs, 0.0, 1.0, yf, stops_, opt_);

    std::vector<DerivResult> out;
    for (size_t li = 0; li < levels_.size(); ++li) {
      const auto& lv = levels_[li];
      const int d = lv.table->dim();
      const int cols = 1 + lv.q;
      std::vector<int> toprows(lv.q);
      for (int i = 0; i < lv.q; ++i) toprows[i] = i;
      int top = lv.table->subset_index(toprows);
      DerivResult r;
      r.k = lv.k;
      r.rho = rho;
      r.kappa = kappa;
      r.scale = yf.segment(offs[li], 3 * d * cols).cwiseAbs().maxCoeff();
      r.W = yf(offs[li] + top);
      r.Wl = yf(offs[li] + d * cols + top);
      r.Wll = yf(offs[li] + 2 * d * cols + top);
      for (int jc = 0; jc < lv.q; ++jc) {
        r.N.push_back(yf(offs[li] + d * (1 + jc) + top));
        r.Nl.push_back(yf(offs[li] + d * cols + d * (1 + jc) + top));
      }
      out.push_back(std::move(r));
    }
    return out;
  }

 private:
  struct Level {
    int k, q;
    std::shared_ptr<WedgeTable> table;
  };
  const AssociatedMatrix* F_;
  int n_;
  double lambda_sign_;
  bool with_num_;
  OdeOptions opt_;
  std::vector<double> stops_;
  std::vector<Level> levels_;
};

// Paper-arranged characteristic function (rows by descending derivative
// order): reversal sign times the natural minor.
inline cplx char_from_denom(int q, cplx denom) {
  double sgn = ((q * (q - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
  return sgn * denom;
}

// Unit lower-triangular Weyl-Yurko matrix at a regular lambda.
struct WeylMatrixSample {
  cplx lambda;
  MatrixXcd M;
  double condition = 0.0;
};

inline WeylMatrixSample weyl_matrix(const AssociatedMatrix& F, cplx lambda, double lambda_sign = 1.0,
                                    const OdeOptions& opt = {}, double exclusion_rel = 1e-9) {
  const int n = F.order();
  std::vector<int> ks(n - 1);
  for (int k = 1; k <= n - 1; ++k) ks[k - 1] = k;
  WeylEvaluator ev(F, lambda_sign, ks, true, opt);
  auto cols = ev.eval(lambda);
  WeylMatrixSample s;
  s.lambda = lambda;
  s.M = MatrixXcd::Identity(n, n);
  for (const auto& c : cols) {
    if (c.denom_rel < exclusion_rel)
      throw ConditionedError("weyl matrix requested too close to an eigenvalue", 1.0 / c.denom_rel);
    s.condition = std::max(s.condition, 1.0 / c.denom_rel);
    for (int j = c.k + 1; j <= n; ++j) {
      double sgn = ((j - c.k) % 2 == 0) ? 1.0 : -1.0;
      s.M(j - 1, c.k - 1) = sgn * c.numer[j - c.k - 1] / c.denom;
    }
  }
  return s;
}

}  // namespace specmap
