#include <catch2/catch.hpp>
#include <random>

#include "specmap/ode.hpp"
#include "specmap/testing.hpp"

using namespace specmap;

TEST_CASE("spectral point canonical branch") {
  SpectralPoint sp = SpectralPoint::canonical(cplx(0.0, 16.0), 4);
  REQUIRE(std::abs(std::pow(sp.rho, 4) - sp.lambda) < 1e-12 * std::abs(sp.lambda));
  REQUIRE(sp.rho.real() >= 0.0);
  REQUIRE(std::arg(sp.rho) >= 0.0);
  REQUIRE(std::arg(sp.rho) <= M_PI / 4 + 1e-12);
}

TEST_CASE("fundamental matrix closed forms for n=2") {
  ChebyshevGrid grid(33);
  AssociatedMatrix F0 = zero_matrix(2);
  SECTION("lambda = 0: C = [[1,x],[0,1]]") {
    MatrixTrajectory tr = fundamental_matrix(F0, 0.0, grid);
    for (int i = 0; i < grid.size(); ++i) {
      MatrixXcd expect(2, 2);
      expect << 1.0, grid.node(i), 0.0, 1.0;
      REQUIRE((tr.values[i] - expect).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SECTION("lambda = -pi^2: second column is sin(pi x)/pi and C(0) = I") {
    MatrixTrajectory tr = fundamental_matrix(F0, -M_PI * M_PI, grid);
    REQUIRE((tr.values[0] - MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < grid.size(); ++i) {
      double x = grid.node(i);
      REQUIRE(std::abs(tr.values[i](0, 1) - std::sin(M_PI * x) / M_PI) < 1e-9);
    }
    REQUIRE(std::abs(tr.values[grid.size() - 1](0, 1)) < 1e-9);  // first Dirichlet eigenvalue
  }
}

TEST_CASE("Liouville: det C(x,lambda) = 1 for trace-free generators") {
  ChebyshevGrid grid(33);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int n : {2, 3, 4}) {
    CoefficientSet c = random_selfadjoint_coeffs(n, 110 + n);
    AssociatedMatrix F = associated_matrix(make_sigma(c));
    cplx lambda(u(rng), u(rng));
    MatrixTrajectory tr = fundamental_matrix(F, lambda, grid);
    for (int i = 0; i < grid.size(); i += 4)
      REQUIRE(std::abs(tr.values[i].determinant() - 1.0) < 1e-8);
  }
}

TEST_CASE("integrator handles coefficient kinks without order loss") {
  // step tau_0: antiderivative piecewise linear
  Function1D anti({0.0, 0.5, 1.0}, {Poly({0.0, 1.0}), Poly({0.5, -1.0})});
  CoefficientSet c;
  c.n = 2;
  c.tau = {anti};
  AssociatedMatrix F = associated_matrix(make_sigma(c));
  ChebyshevGrid grid(33);
  MatrixTrajectory tr = fundamental_matrix(F, cplx(2.0, 1.0), grid);
  for (int i = 0; i < grid.size(); i += 8)
    REQUIRE(std::abs(tr.values[i].determinant() - 1.0) < 1e-9);
}

TEST_CASE("lambda-analyticity of fundamental entries") {
  ChebyshevGrid grid(33);
  CoefficientSet c = random_selfadjoint_coeffs(3, 17);
  AssociatedMatrix F = associated_matrix(make_sigma(c));
  // trapezoid contour integral of an entire function over a circle vanishes
  const int m = 16;
  MatrixXcd acc = MatrixXcd::Zero(3, 3);
  for (int j = 0; j < m; ++j) {
    double th = 2.0 * M_PI * j / m;
    cplx lam = cplx(1.5, -0.5) + 2.0 * std::exp(cplx(0.0, th));
    MatrixTrajectory tr = fundamental_matrix(F, lam, grid);
    acc += tr.values[grid.size() / 2] * std::exp(cplx(0.0, th));
  }
  REQUIRE((acc / double(m)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("lagrange bracket basics") {
  SECTION("n=2 companion: z = 1, y = x gives 1") {
    VectorXcd z(2), y(2);
    z << 1.0, 0.0;   // (z, z')
    y << 0.5, 1.0;   // (y, y') at some x where y = x
    REQUIRE(std::abs(lagrange_bracket(z, y) - cplx(1.0)) < 1e-15);
  }
  SECTION("dimension mismatch throws") {
    REQUIRE_THROWS_AS(lagrange_bracket(VectorXcd::Zero(2), VectorXcd::Zero(3)), DimensionMismatch);
  }
}

// d/dx <z,y> = (lambda - mu) z y for y under (F, lambda), z under (F*, mu).
TEST_CASE("lagrange identity against quadrature") {
  ChebyshevGrid grid(65);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int rep = 0; rep < 6; ++rep) {
    int n = 2 + rep % 3;
    CoefficientSet c = random_selfadjoint_coeffs(n, 500 + rep);
    AssociatedMatrix F = associated_matrix(make_sigma(c));
    AssociatedMatrix Fs = star_matrix(F);
    cplx lambda(u(rng), u(rng)), mu(u(rng), u(rng));
    MatrixTrajectory Y = fundamental_matrix(F, lambda, grid);
    MatrixTrajectory Z = fundamental_matrix(Fs, mu, grid, {}, (n % 2 == 0) ? 1.0 : -1.0);
    // pick one column from each side
    VectorXcd prod(grid.size());
    for (int i = 0; i < grid.size(); ++i) prod(i) = Z.values[i](0, n - 1) * Y.values[i](0, 0);
    VectorXcd cum = grid.cumulative(prod);
    for (int i : {grid.size() / 3, grid.size() - 1}) {
      cplx lhs = lagrange_bracket(Z.values[i].col(n - 1), Y.values[i].col(0)) -
                 lagrange_bracket(Z.values[0].col(n - 1), Y.values[0].col(0));
      cplx rhs = (lambda - mu) * cum(i);
      REQUIRE(std::abs(lhs - rhs) < 1e-7);
    }
  }
}

TEST_CASE("integrator reports accuracy failure") {
  OdeOptions opt;
  opt.max_steps = 10;
  AssociatedMatrix F = zero_matrix(2);
  ChebyshevGrid grid(33);
  REQUIRE_THROWS_AS(fundamental_matrix(F, cplx(1e8, 0.0), grid, opt), AccuracyError);
}
