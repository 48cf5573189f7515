#include <catch2/catch.hpp>

#include "specmap/inverse.hpp"
#include "specmap/testing.hpp"

using namespace specmap;

namespace {

SpectralData perturb_row1(const SpectralData& model, double lam_factor, double beta_factor) {
  SpectralData d = model;
  d.provenance = "synthetic";
  for (int k = 1; k <= d.n - 1; ++k) {
    d.at(1, k).lambda *= lam_factor;
    d.at(1, k).beta *= beta_factor;
  }
  return d;
}

}  // namespace

TEST_CASE("xi weights reproduce the defining examples") {
  AssociatedMatrix F0 = zero_matrix(2);
  SpectralData model = forward_spectral_data(F0, 3);
  SECTION("identical data") {
    auto xi = xi_weights(model, model);
    for (double v : xi) REQUIRE(v == 0.0);
  }
  SECTION("n=2, lambda_1 shifted by 1") {
    SpectralData d = model;
    d.at(1, 1).lambda += 1.0;
    auto xi = xi_weights(d, model);
    REQUIRE(xi[0] == Approx(1.0));
    REQUIRE(xi[1] == 0.0);
  }
  SECTION("n=4, beta_{2,2} shifted by 16 gives xi_2 = 1") {
    SpectralData m4;
    m4.n = 4;
    m4.L = 2;
    for (int k = 1; k <= 3; ++k)
      for (int l = 1; l <= 2; ++l) m4.entries.push_back({l, k, cplx(100.0 * l * k), cplx(-40.0)});
    SpectralData d4 = m4;
    d4.at(2, 2).beta += 16.0;
    auto xi = xi_weights(d4, m4);
    REQUIRE(xi[1] == Approx(1.0));
  }
  SECTION("mismatched ranges throw") {
    SpectralData other = forward_spectral_data(F0, 2);
    REQUIRE_THROWS_AS(xi_weights(model, other), DimensionMismatch);
  }
}

TEST_CASE("w scaling values") {
  REQUIRE(w_scaling(3, 1, 0.0, 5) == Approx(1.0 / 3.0));
  REQUIRE(w_scaling(3, 3, 0.0, 5) == Approx(1.0 / 27.0));
  for (double x : {0.0, 0.3, 1.0}) REQUIRE(w_scaling(4, 1, x, 2) == Approx(0.25));
  REQUIRE(w_scaling(2, 1, 1.0, 4) == Approx(std::exp(-2.0 * M_PI) / 2.0));
}

TEST_CASE("d kernel: empty-integral cases and bracket cross-check") {
  ChebyshevGrid grid(65);
  CoefficientSet mc = random_selfadjoint_coeffs(4, 901, 0.6);
  AssociatedMatrix Fm = associated_matrix(make_sigma(mc));
  AssociatedMatrix Fms = star_matrix(Fm);
  cplx mu(3.0, 2.0), lam(-4.0, 1.5);
  SECTION("k_star + k0 < n+1 vanishes at x = 1; > n+1 vanishes at x = 0") {
    VectorXcd dlow = d_kernel_curve(Fm, 2, 1, mu, lam, grid);
    REQUIRE(std::abs(dlow(grid.size() - 1)) < 1e-10);
    VectorXcd dhigh = d_kernel_curve(Fm, 4, 3, mu, lam, grid);
    REQUIRE(std::abs(dhigh(0)) < 1e-10);
  }
  SECTION("piecewise form agrees with the bracket form away from poles") {
    for (auto [ks, k0] : {std::pair{4, 3}, {3, 2}, {2, 3}, {4, 1}}) {
      VectorXcd curve = d_kernel_curve(Fm, ks, k0, mu, lam, grid);
      MatrixXcd zs = weyl_trajectory(Fms, mu, ks, grid, 1.0);
      MatrixXcd ys = weyl_trajectory(Fm, lam, k0, grid);
      for (int i = 8; i < grid.size(); i += 16) {
        cplx bracket = lagrange_bracket(zs.col(i), ys.col(i)) / (lam - mu);
        REQUIRE(std::abs(curve(i) - bracket) < 1e-7 * (1.0 + std::abs(bracket)));
      }
    }
  }
  SECTION("pole case matches the bracket form too") {
    VectorXcd curve = d_kernel_curve(Fm, 3, 2, mu, lam, grid);  // 3 + 2 = n + 1
    MatrixXcd zs = weyl_trajectory(Fms, mu, 3, grid, 1.0);
    MatrixXcd ys = weyl_trajectory(Fm, lam, 2, grid);
    for (int i = 8; i < grid.size(); i += 24) {
      cplx bracket = lagrange_bracket(zs.col(i), ys.col(i)) / (lam - mu);
      REQUIRE(std::abs(curve(i) - bracket) < 1e-7 * (1.0 + std::abs(bracket)));
    }
    REQUIRE_THROWS_AS(d_kernel_curve(Fm, 3, 2, mu, mu + cplx(1e-12, 0), grid), PoleProximityError);
  }
}

TEST_CASE("index set cardinality and identity case") {
  ChebyshevGrid grid(33);
  CoefficientSet mc;
  mc.n = 4;
  mc.tau.assign(3, Function1D());
  SpectralData model = forward_spectral_data(mc, 3);
  SECTION("generic data: |V| = 2 L (n-1)") {
    SpectralData data = perturb_row1(model, 1.05, 1.10);
    for (int l = 2; l <= 3; ++l)
      for (int k = 1; k <= 3; ++k) data.at(l, k).lambda *= 1.0 + 0.001 * l * k;
    ModelCache cache(mc, data, model, grid);
    REQUIRE(cache.size() == 2 * 3 * 3);
  }
  SECTION("data = model: R vanishes, psi = psi~, reconstruction telescopes") {
    ModelCache cache(mc, model, model, grid);
    REQUIRE(cache.size() == 3 * 3);  // only eps = 1 rows survive
    TruncatedMainEquation eq = assemble(cache, grid.size() / 2);
    REQUIRE(eq.R.cwiseAbs().maxCoeff() < 1e-12);
    MainEquationSolution sol = solve_main_equation(cache, 1);
    REQUIRE((sol.psi.col(grid.size() / 2) - eq.psi_tilde).cwiseAbs().maxCoeff() < 1e-10);
    ReconstructionResult rec = reconstruct_weyl(cache, sol, cplx(5.0, 7.0));
    ModelCache::ExternalSolution ext = cache.external_solution(2, cplx(5.0, 7.0));
    for (int i = 0; i < grid.size(); i += 8)
      REQUIRE(std::abs(rec.Phi[0](1, i) - ext.der(0, i)) < 1e-10 * (1.0 + std::abs(ext.der(0, i))));
  }
}

// The expansion of the operator blocks is verified against an independent
// solve of the finite phi-form system: with only row l = 1 perturbed, the
// system closes exactly on the l = 1 block.
TEST_CASE("main equation oracle equivalence under a finite perturbation") {
  for (int n : {2, 4}) {
    ChebyshevGrid grid(33);
    CoefficientSet mc;
    mc.n = n;
    mc.tau.assign(n - 1, Function1D());
    const int L = 4;
    SpectralData model = forward_spectral_data(mc, L);
    SpectralData data = perturb_row1(model, 1.05, 1.10);
    ModelCache cache(mc, data, model, grid);
    const auto& V = cache.triples();
    const int m = cache.size();
    const int m1 = 2 * (n - 1);  // paired l = 1 triples lead the ordering

    MainEquationSolution sol = solve_main_equation(cache, 0);
    for (int node = 0; node < grid.size(); node += 8) {
      MatrixXcd A = MatrixXcd::Identity(m1, m1);
      VectorXcd b(m1);
      for (int r = 0; r < m1; ++r) {
        b(r) = cache.phi_tilde(r, node);
        for (int c = 0; c < m1; ++c) {
          double es = (V[c].eps == 0) ? 1.0 : -1.0;
          A(r, c) -= es * cache.g_value(c, r, node);
        }
      }
      VectorXcd phi1 = A.partialPivLu().solve(b);
      VectorXcd phi_full(m);
      for (int r = 0; r < m; ++r) {
        if (r < m1) {
          phi_full(r) = phi1(r);
          continue;
        }
        cplx acc = cache.phi_tilde(r, node);
        for (int c = 0; c < m1; ++c) {
          double es = (V[c].eps == 0) ? 1.0 : -1.0;
          acc += es * phi1(c) * cache.g_value(c, r, node);
        }
        phi_full(r) = acc;
      }
      TruncatedMainEquation eq = assemble(cache, node);
      VectorXcd psi(m);
      const auto& xi = cache.xi();
      for (int r = 0; r < m; ++r) {
        double w = w_scaling(V[r].l, V[r].k, grid.node(node), n);
        if (V[r].eps == 0)
          psi(r) = (phi_full(r) - phi_full(r + 1)) / (xi[V[r].l - 1] * w);
        else
          psi(r) = phi_full(r) / w;
      }
      VectorXcd resid = (MatrixXcd::Identity(m, m) - eq.R) * psi - eq.psi_tilde;
      REQUIRE(resid.cwiseAbs().maxCoeff() < 1e-6);
      REQUIRE((sol.psi.col(node) - psi).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("reconstructed solutions satisfy the boundary conditions") {
  const int n = 2;
  ChebyshevGrid grid(33);
  CoefficientSet mc;
  mc.n = n;
  mc.tau.assign(n - 1, Function1D());
  SpectralData model = forward_spectral_data(mc, 4);
  SpectralData data = perturb_row1(model, 1.05, 1.10);
  ModelCache cache(mc, data, model, grid);
  MainEquationSolution sol = solve_main_equation(cache);
  ReconstructionResult rec = reconstruct_weyl(cache, sol, cplx(9.0, 17.0));
  REQUIRE(std::abs(rec.Phi[0](0, 0) - 1.0) < 1e-6);
  REQUIRE(std::abs(rec.Phi[0](1, 0)) < 1e-6);
  REQUIRE(std::abs(rec.Phi[0](0, grid.size() - 1)) < 1e-6);
}

TEST_CASE("roundtrip: n=2 step potential at small L") {
  Function1D anti({0.0, 0.5, 1.0}, {Poly({0.0, 0.3}), Poly({0.15, -0.3})});
  CoefficientSet target;
  target.n = 2;
  target.tau = {anti};
  SpectralData data = forward_spectral_data(target, 8);
  CoefficientSet model;
  model.n = 2;
  model.tau.assign(1, Function1D());
  ChebyshevGrid grid(65);
  InverseOptions io;
  InverseSolveResult res = inverse_solve(data, model, grid, io);
  REQUIRE_FALSE(res.aborted);
  REQUIRE(res.report.overall_pass);
  REQUIRE(res.min_sigma > 1e-3);
  REQUIRE(res.max_residual < 1e-8);
  REQUIRE(res.lambda_consistency < 1e-3);
  const Function1D& got = res.recovered.tau[0];
  double mean = 0.0;
  int cnt = 0;
  for (double x = 0.05; x <= 0.95; x += 0.01, ++cnt)
    mean += std::real(got.eval(x) - anti.eval(x));
  mean /= cnt;
  double worst = 0.0;
  for (double x = 0.05; x <= 0.95; x += 0.01)
    worst = std::max(worst, std::abs(got.eval(x) - anti.eval(x) - mean));
  REQUIRE(worst < 5e-3);
}
