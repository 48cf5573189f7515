#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "specmap/bvp.hpp"
#include "specmap/validation.hpp"

namespace specmap {

// Index (l, k, eps): eps = 0 refers to the target data, eps = 1 to the model.
struct IndexTriple {
  int l = 0, k = 0, eps = 0;
  bool paired = true;  // false when xi_l = 0 and only the eps = 1 row is kept
};

struct MainEquationOptions {
  double xi_zero_tol = 1e-12;
  double pole_guard = 1e-8;
  double alarm_sigma_min = 1e-8;
  OdeOptions ode;
};

namespace detail {

// Node values of the m-th x-derivative matrices of F (exact polynomial
// differentiation), with the Lambda contribution folded into order 0 later.
inline std::vector<std::vector<MatrixXcd>> matrix_derivative_nodes(const AssociatedMatrix& F,
                                                                   const ChebyshevGrid& grid,
                                                                   int upto) {
  const int n = F.order();
  std::vector<std::vector<MatrixXcd>> out(upto + 1);
  std::vector<std::vector<Function1D>> der(n);
  for (int k = 1; k <= n; ++k)
    for (int j = 1; j <= k; ++j) der[k - 1].push_back(F.lower(k, j));
  for (int m = 0; m <= upto; ++m) {
    out[m].reserve(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
      MatrixXcd A = MatrixXcd::Zero(n, n);
      for (int k = 1; k <= n; ++k) {
        if (m == 0 && k < n) A(k - 1, k) = 1.0;
        for (int j = 1; j <= k; ++j) A(k - 1, j - 1) = der[k - 1][j - 1].eval(grid.node(i));
      }
      out[m].push_back(std::move(A));
    }
    if (m < upto)
      for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= k; ++j) der[k - 1][j - 1] = der[k - 1][j - 1].derivative();
  }
  return out;
}

inline double binom_d(int m, int i) {
  double r = 1.0;
  for (int t = 0; t < i; ++t) r = r * (m - t) / (t + 1);
  return r;
}

// Ordinary x-derivatives of the first component of a trajectory, from the
// Leibniz recursion V_m = sum_i C(m-1,i) G^{(i)} V_{m-1-i} with G = F + Lambda.
// Exact in x: no numerical differentiation enters.
inline MatrixXcd first_component_derivatives(const std::vector<std::vector<MatrixXcd>>& Fder,
                                             cplx lambda_signed, const MatrixXcd& traj, int upto) {
  const int n = static_cast<int>(traj.rows());
  const int N = static_cast<int>(traj.cols());
  MatrixXcd out(upto + 1, N);
  for (int i = 0; i < N; ++i) {
    std::vector<VectorXcd> V{traj.col(i)};
    for (int m = 1; m <= upto; ++m) {
      VectorXcd v = VectorXcd::Zero(n);
      for (int t = 0; t < m; ++t) {
        VectorXcd gi = Fder[t][i] * V[m - 1 - t];
        if (t == 0) gi(n - 1) += lambda_signed * V[m - 1](0);
        v += binom_d(m - 1, t) * gi;
      }
      V.push_back(std::move(v));
    }
    for (int m = 0; m <= upto; ++m) out(m, i) = V[m](0);
  }
  return out;
}

}  // namespace detail

// Model problem data shared by assembly, solving and reconstruction: the
// matrices, the index set, the Weyl-solution trajectories at every data and
// model eigenvalue, and their ordinary derivative stacks.
class ModelCache {
 public:
  ModelCache(const CoefficientSet& model_coeffs, const SpectralData& target,
             const SpectralData& model, const ChebyshevGrid& grid,
             const MainEquationOptions& opt = {})
      : grid_(&grid), target_(target), model_(model), opt_(opt) {
    n_ = target.n;
    if (model.n != n_ || model.L != target.L) throw DimensionMismatch("cache: data/model mismatch");
    Fm_ = associated_matrix(make_sigma(model_coeffs));
    Fms_ = star_matrix(Fm_);
    star_sign_ = (n_ % 2 == 0) ? 1.0 : -1.0;
    xi_ = xi_weights(target, model);
    // index set: both eps for xi_l > 0, only eps = 1 otherwise
    for (int l = 1; l <= target.L; ++l) {
      bool paired = xi_[l - 1] > opt.xi_zero_tol;
      for (int k = 1; k <= n_ - 1; ++k) {
        if (paired) V_.push_back({l, k, 0, true});
        V_.push_back({l, k, 1, paired});
      }
    }
    Fder_ = detail::matrix_derivative_nodes(Fm_, grid, n_ - 1);
    Fsder_ = detail::matrix_derivative_nodes(Fms_, grid, n_ - 1);
    const int N = grid.size();
    phi_.resize(V_.size());
    phis_.resize(V_.size());
    phi_der_.resize(V_.size());
    phis_der_.resize(V_.size());
    for (size_t vi = 0; vi < V_.size(); ++vi) {
      const auto& v = V_[vi];
      cplx lam = lambda_of(v);
      phi_[vi] = weyl_trajectory(Fm_, lam, v.k + 1, grid, 1.0, opt.ode);
      phis_[vi] = weyl_trajectory(Fms_, lam, n_ - v.k + 1, grid, star_sign_, opt.ode);
      if (weyl_bc_residual(phi_[vi], v.k + 1) > 1e-7 ||
          weyl_bc_residual(phis_[vi], n_ - v.k + 1) > 1e-7)
        throw AccuracyError("cached trajectory violates its boundary conditions", 1e-7);
      phi_der_[vi] = detail::first_component_derivatives(Fder_, lam, phi_[vi], n_);
      phis_der_[vi] = detail::first_component_derivatives(Fsder_, star_sign_ * lam, phis_[vi], n_);
      (void)N;
    }
    build_d_tables();
  }

  int order() const { return n_; }
  int size() const { return static_cast<int>(V_.size()); }
  const std::vector<IndexTriple>& triples() const { return V_; }
  const std::vector<double>& xi() const { return xi_; }
  const ChebyshevGrid& grid() const { return *grid_; }
  const AssociatedMatrix& model_matrix() const { return Fm_; }
  const AssociatedMatrix& model_matrix_star() const { return Fms_; }
  const SpectralData& target_data() const { return target_; }
  const SpectralData& model_data() const { return model_; }
  double star_sign() const { return star_sign_; }
  const MainEquationOptions& options() const { return opt_; }

  cplx lambda_of(const IndexTriple& v) const {
    return v.eps == 0 ? target_.lambda(v.l, v.k) : model_.lambda(v.l, v.k);
  }
  cplx beta_of(const IndexTriple& v) const {
    return v.eps == 0 ? target_.beta(v.l, v.k) : model_.beta(v.l, v.k);
  }

  // model Weyl values phi~_v(x_i) and their ordinary derivatives
  cplx phi_tilde(int vi, int node) const { return phi_der_[vi](0, node); }
  cplx phi_tilde_der(int vi, int m, int node) const { return phi_der_[vi](m, node); }
  cplx phi_star_der(int vi, int m, int node) const { return phis_der_[vi](m, node); }
  const MatrixXcd& phi_trajectory(int vi) const { return phi_[vi]; }
  const MatrixXcd& phi_star_trajectory(int vi) const { return phis_[vi]; }

  // D~_{n-k_v+1, k0_{v0}+1}(x_i, lambda_v, lambda_{v0})
  cplx d_value(int vi, int v0i, int node) const { return dtab_[vi * V_.size() + v0i](node); }

  // m >= 1 derivatives: (m-1)-th derivative of the product of first components
  cplx d_derivative(int vi, int v0i, int m, int node) const {
    cplx s = 0.0;
    for (int t = 0; t <= m - 1; ++t)
      s += detail::binom_d(m - 1, t) * phis_der_[vi](t, node) * phi_der_[v0i](m - 1 - t, node);
    return s;
  }

  cplx g_value(int vi, int v0i, int node) const {
    const auto& v = V_[vi];
    double sgn = ((n_ - v.k) % 2 == 0) ? 1.0 : -1.0;
    return sgn * beta_of(v) * d_value(vi, v0i, node);
  }
  cplx g_derivative(int vi, int v0i, int m, int node) const {
    const auto& v = V_[vi];
    double sgn = ((n_ - v.k) % 2 == 0) ? 1.0 : -1.0;
    return sgn * beta_of(v) * d_derivative(vi, v0i, m, node);
  }

  // Case-resolved kernel against an external solution at a regular lambda:
  // D~_{n-k_v+1, k0}(x_i, lambda_v, lambda).
  struct ExternalSolution {
    MatrixXcd traj;  // n x N quasi-derivative vectors
    MatrixXcd der;   // (n+1) x N ordinary first-component derivatives
  };

  VectorXcd d_curve_external(int vi, int k0, cplx lambda, const ExternalSolution& ext) const {
    const auto& v = V_[vi];
    const int K = n_ - v.k + 1;
    double a = star_rate(v);  // external side has O(1) envelope rate
    VectorXcd prod = (phis_der_[vi].row(0).array() * ext.der.row(0).array()).matrix().transpose();
    return case_resolved(prod, K, k0, lambda_of(v), lambda, a, &phis_[vi], &ext.traj);
  }

  ExternalSolution external_solution(int k0, cplx lambda) const {
    ExternalSolution ext;
    ext.traj = weyl_trajectory(Fm_, lambda, k0, *grid_, 1.0, opt_.ode);
    ext.der = detail::first_component_derivatives(Fder_, lambda, ext.traj, n_);
    return ext;
  }

 private:
  int n_;
  const ChebyshevGrid* grid_;
  SpectralData target_, model_;
  MainEquationOptions opt_;
  AssociatedMatrix Fm_, Fms_;
  double star_sign_ = 1.0;
  std::vector<double> xi_;
  std::vector<IndexTriple> V_;
  std::vector<std::vector<MatrixXcd>> Fder_, Fsder_;
  std::vector<MatrixXcd> phi_, phis_;          // n x N quasi-derivative trajectories
  std::vector<MatrixXcd> phi_der_, phis_der_;  // (n+1) x N first-component derivatives
  std::vector<VectorXcd> dtab_;

  static constexpr double rate_threshold_ = 12.0;

  // Envelope growth rate of the cached star solution: +pi l cot(k pi / n).
  double star_rate(const IndexTriple& v) const { return M_PI * v.l / std::tan(v.k * M_PI / n_); }
  // Envelope rate of the cached plain solution: -pi l cot(k pi / n).
  double plain_rate(const IndexTriple& v) const { return -M_PI * v.l / std::tan(v.k * M_PI / n_); }

  // Case-resolved kernel with envelope-aware quadrature. The integrand
  // product grows like e^{a t}, a = star rate + plain rate. For |a| within
  // the threshold the plain cumulative is exact enough; for large positive a
  // the integral becomes e^{a x} times an exponentially-weighted cumulative
  // of the normalized product; for large negative a the true kernel decays
  // like e^{a x}, which only the pointwise bracket form (c >= 0; the spectral
  // parameters are then guaranteed separated) or the reverse-weighted
  // cumulative (c < 0) resolves.
  VectorXcd case_resolved(const VectorXcd& prod, int K, int k0, cplx mu, cplx lambda, double a,
                          const MatrixXcd* star_traj, const MatrixXcd* plain_traj) const {
    const int N = grid_->size();
    const int c = K + k0 - (n_ + 1);
    auto pole_checked = [&]() {
      if (std::abs(lambda - mu) < opt_.pole_guard * (1.0 + std::abs(mu)))
        throw PoleProximityError("kernel evaluated at coinciding spectral parameters");
    };
    if (a < -rate_threshold_) {
      if (c < 0) {
        VectorXcd g(N);
        for (int i = 0; i < N; ++i) g(i) = prod(i) * std::exp(-a * grid_->node(i));
        VectorXcd R = grid_->weighted_cumulative_reverse(g, -a);
        VectorXcd out(N);
        for (int i = 0; i < N; ++i) out(i) = -std::exp(a * grid_->node(i)) * R(i);
        return out;
      }
      // bracket form: includes the pole part automatically
      pole_checked();
      VectorXcd out(N);
      for (int i = 0; i < N; ++i)
        out(i) = lagrange_bracket(star_traj->col(i), plain_traj->col(i)) / (lambda - mu);
      return out;
    }
    VectorXcd cum;
    if (a > rate_threshold_) {
      if (c < 0) throw DimensionMismatch("kernel: unexpected growth direction for the tail case");
      VectorXcd g(N);
      for (int i = 0; i < N; ++i) g(i) = prod(i) * std::exp(-a * grid_->node(i));
      VectorXcd E = grid_->weighted_cumulative(g, a);
      cum.resize(N);
      for (int i = 0; i < N; ++i) cum(i) = std::exp(a * grid_->node(i)) * E(i);
    } else {
      cum = grid_->cumulative(prod);
      if (c < 0) return (cum.array() - cum(N - 1)).matrix();
    }
    if (c == 0) {
      pole_checked();
      double sgn = ((K + 1) % 2 == 0) ? 1.0 : -1.0;
      return (cum.array() + sgn / (lambda - mu)).matrix();
    }
    return cum;
  }

  void build_d_tables() {
    const size_t m = V_.size();
    dtab_.resize(m * m);
    for (size_t vi = 0; vi < m; ++vi) {
      const int K = n_ - V_[vi].k + 1;
      for (size_t v0i = 0; v0i < m; ++v0i) {
        double a = star_rate(V_[vi]) + plain_rate(V_[v0i]);
        VectorXcd prod =
            (phis_der_[vi].row(0).array() * phi_der_[v0i].row(0).array()).matrix().transpose();
        dtab_[vi * m + v0i] = case_resolved(prod, K, V_[v0i].k + 1, lambda_of(V_[vi]),
                                            lambda_of(V_[v0i]), a, &phis_[vi], &phi_[v0i]);
      }
    }
  }
};

// Standalone kernel evaluation (the operation-level interface): trajectories
// are computed on demand; the cross-check against the bracket form lives in
// the tests.
inline VectorXcd d_kernel_curve(const AssociatedMatrix& Fm, int k_star, int k0, cplx mu,
                                cplx lambda, const ChebyshevGrid& grid, const OdeOptions& opt = {},
                                double pole_guard = 1e-8) {
  const int n = Fm.order();
  AssociatedMatrix Fms = star_matrix(Fm);
  double ss = (n % 2 == 0) ? 1.0 : -1.0;
  MatrixXcd zs = weyl_trajectory(Fms, mu, k_star, grid, ss, opt);
  MatrixXcd ys = weyl_trajectory(Fm, lambda, k0, grid, 1.0, opt);
  VectorXcd prod(grid.size());
  for (int i = 0; i < grid.size(); ++i) prod(i) = zs(0, i) * ys(0, i);
  VectorXcd cum = grid.cumulative(prod);
  const int c = k_star + k0 - (n + 1);
  if (c > 0) return cum;
  if (c == 0) {
    if (std::abs(lambda - mu) < pole_guard * (1.0 + std::abs(mu)))
      throw PoleProximityError("kernel evaluated at coinciding spectral parameters");
    double sgn = ((k_star + 1) % 2 == 0) ? 1.0 : -1.0;
    return (cum.array() + sgn / (lambda - mu)).matrix();
  }
  return (cum.array() - cum(cum.size() - 1)).matrix();
}

// One truncated main equation (I - R(x)) psi(x) = psi~(x) at a grid node.
struct TruncatedMainEquation {
  double x = 0.0;
  int node = 0;
  MatrixXcd R;
  VectorXcd psi_tilde;
  double sigma_min = 0.0;
};

// The 2x2 block expansion of the operator entries:
//   R_{(l0,k0,0),(l,k,0)} = (w/w0) xi_l/xi_l0 (G00 - G01)
//   R_{(l0,k0,0),(l,k,1)} = (w/w0) 1/xi_l0 (G00 - G01 - G10 + G11)
//   R_{(l0,k0,1),(l,k,0)} = (w/w0) xi_l G01
//   R_{(l0,k0,1),(l,k,1)} = (w/w0) (G01 - G11)
// with G_{eps,eps0} = G~_{(l,k,eps),(l0,k0,eps0)}(x). Unpaired columns vanish
// identically (their eps-partners cancel) and unpaired rows keep only the
// eps = 1 line.
inline TruncatedMainEquation assemble(const ModelCache& cache, int node) {
  const auto& V = cache.triples();
  const auto& xi = cache.xi();
  const int m = cache.size();
  const int n = cache.order();
  const double x = cache.grid().node(node);
  TruncatedMainEquation eq;
  eq.x = x;
  eq.node = node;
  eq.R = MatrixXcd::Zero(m, m);
  eq.psi_tilde = VectorXcd::Zero(m);

  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) w[i] = w_scaling(V[i].l, V[i].k, x, n);

  for (int r = 0; r < m; ++r) {
    const auto& v0 = V[r];
    // right-hand side
    if (v0.eps == 0) {
      int r1 = r + 1;  // eps=1 partner follows immediately
      eq.psi_tilde(r) =
          (cache.phi_tilde(r, node) - cache.phi_tilde(r1, node)) / (xi[v0.l - 1] * w[r]);
    } else {
      eq.psi_tilde(r) = cache.phi_tilde(r, node) / w[r];
    }
    for (int c = 0; c < m; ++c) {
      const auto& v = V[c];
      if (!v.paired) continue;  // unpaired columns cancel exactly
      if (v.eps != 0) continue; // handle the (eps=0, eps=1) pair at once
      int c1 = c + 1;
      cplx G00 = cache.g_value(c, r, node);
      cplx G10 = cache.g_value(c1, r, node);
      double ratio = w[c] / w[r];
      if (v0.eps == 0) {
        int r1 = r + 1;
        cplx G01 = cache.g_value(c, r1, node);
        cplx G11 = cache.g_value(c1, r1, node);
        eq.R(r, c) = ratio * (xi[v.l - 1] / xi[v0.l - 1]) * (G00 - G01);
        eq.R(r, c1) = ratio * (G00 - G01 - G10 + G11) / xi[v0.l - 1];
      } else {
        // here G01/G11 in the block formula are the eps0 = 1 row values
        eq.R(r, c) = ratio * xi[v.l - 1] * G00;
        eq.R(r, c1) = ratio * (G00 - G10);
      }
    }
  }
  return eq;
}

namespace detail {

// smallest singular value of A via inverse iteration on A^H A
inline double sigma_min_estimate(const Eigen::PartialPivLU<MatrixXcd>& lu,
                                 const Eigen::PartialPivLU<MatrixXcd>& luH, int dim,
                                 int iters = 12) {
  VectorXcd v = VectorXcd::Ones(dim);
  v.normalize();
  double s = 1.0;
  for (int i = 0; i < iters; ++i) {
    VectorXcd w = luH.solve(v);
    VectorXcd u = lu.solve(w);
    double nrm = u.norm();
    if (!(nrm > 0) || !std::isfinite(nrm)) return 0.0;
    s = 1.0 / std::sqrt(nrm);
    v = u / nrm;
  }
  return s;
}

}  // namespace detail

// Per-node solution of the truncated main equation together with the
// derivative chains of the phi system: the j-th chain solves the same
// (I - R) with right-hand sides built from exact model derivatives, giving
// d^j/dx^j phi_v without numerical differentiation.
struct MainEquationSolution {
  std::vector<IndexTriple> V;
  MatrixXcd psi;                    // |V| x N
  std::vector<MatrixXcd> phi_der;   // j = 0..n, each |V| x N (phi coordinates)
  VectorXd sigma_min;               // per node
  VectorXd residual;                // per node, ||(I-R)psi - psi~||_inf
};

inline MainEquationSolution solve_main_equation(const ModelCache& cache, int chain_orders = -1) {
  const int m = cache.size();
  const int N = cache.grid().size();
  const int n = cache.order();
  if (chain_orders < 0) chain_orders = n;
  const auto& V = cache.triples();
  const auto& xi = cache.xi();
  MainEquationSolution sol;
  sol.V = V;
  sol.psi.resize(m, N);
  sol.phi_der.assign(chain_orders + 1, MatrixXcd(m, N));
  sol.sigma_min.resize(N);
  sol.residual.resize(N);

  for (int node = 0; node < N; ++node) {
    TruncatedMainEquation eq = assemble(cache, node);
    MatrixXcd A = MatrixXcd::Identity(m, m) - eq.R;
    Eigen::PartialPivLU<MatrixXcd> lu(A);
    Eigen::PartialPivLU<MatrixXcd> luH(A.adjoint().eval());
    double smin = detail::sigma_min_estimate(lu, luH, m);
    sol.sigma_min(node) = smin;
    if (smin < cache.options().alarm_sigma_min)
      throw SolvabilityAlarm("truncated main equation near-singular", smin);
    VectorXcd psi = lu.solve(eq.psi_tilde);
    sol.psi.col(node) = psi;
    sol.residual(node) = (A * psi - eq.psi_tilde).cwiseAbs().maxCoeff();

    const double x = eq.x;
    std::vector<double> w(m);
    for (int i = 0; i < m; ++i) w[i] = w_scaling(V[i].l, V[i].k, x, n);
    // phi^{(0)} from the inverse transform [[xi, 1],[0, 1]] w
    for (int r = 0; r < m; ++r) {
      if (V[r].eps == 0)
        sol.phi_der[0](r, node) = w[r] * (xi[V[r].l - 1] * psi(r) + psi(r + 1));
      else
        sol.phi_der[0](r, node) = w[r] * psi(r);
    }
    // chains: (I - G^)(phi^{(j)}) = phi~^{(j)} + K^{(j)}, solved in psi form
    for (int j = 1; j <= chain_orders; ++j) {
      VectorXcd rhs_phi(m);
      for (int r = 0; r < m; ++r) {
        cplx K = 0.0;
        for (int c = 0; c < m; ++c) {
          const auto& v = V[c];
          if (!v.paired) continue;
          double es = (v.eps == 0) ? 1.0 : -1.0;
          for (int i = 0; i < j; ++i)
            K += es * detail::binom_d(j, i) * sol.phi_der[i](c, node) *
                 cache.g_derivative(c, r, j - i, node);
        }
        rhs_phi(r) = cache.phi_tilde_der(r, j, node) + K;
      }
      // transform to psi coordinates, solve, transform back
      VectorXcd rhs_psi(m);
      for (int r = 0; r < m; ++r) {
        if (V[r].eps == 0)
          rhs_psi(r) = (rhs_phi(r) - rhs_phi(r + 1)) / (xi[V[r].l - 1] * w[r]);
        else
          rhs_psi(r) = rhs_phi(r) / w[r];
      }
      VectorXcd psij = lu.solve(rhs_psi);
      for (int r = 0; r < m; ++r) {
        if (V[r].eps == 0)
          sol.phi_der[j](r, node) = w[r] * (xi[V[r].l - 1] * psij(r) + psij(r + 1));
        else
          sol.phi_der[j](r, node) = w[r] * psij(r);
      }
    }
  }
  return sol;
}

}  // namespace specmap
