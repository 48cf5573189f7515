#include <catch2/catch.hpp>

#include "specmap/assoc_matrix.hpp"
#include "specmap/ode.hpp"
#include "specmap/testing.hpp"

using namespace specmap;

namespace {
Function1D deriv_n(Function1D f, int k) {
  for (int i = 0; i < k; ++i) f = f.derivative();
  return f;
}
}  // namespace

TEST_CASE("n=4 and n=5 matrices have the documented structure") {
  CoefficientSet c4 = random_selfadjoint_coeffs(4, 21);
  SigmaSet s4 = make_sigma(c4);
  AssociatedMatrix F4 = associated_matrix(s4);
  // rows 3,4: f_31 = s0+s1, f_32 = s2, f_42 = -(s0-s1); everything else zero
  REQUIRE(F4.lower(3, 1).max_abs_diff(s4.sigma[0] + s4.sigma[1]) < 1e-14);
  REQUIRE(F4.lower(3, 2).max_abs_diff(s4.sigma[2]) < 1e-14);
  REQUIRE(F4.lower(4, 2).max_abs_diff(-(s4.sigma[0] - s4.sigma[1])) < 1e-14);
  for (auto [k, j] : {std::pair{1, 1}, {2, 1}, {2, 2}, {3, 3}, {4, 1}, {4, 3}, {4, 4}})
    REQUIRE(F4.lower(k, j).is_zero());

  CoefficientSet c5 = random_selfadjoint_coeffs(5, 22);
  SigmaSet s5 = make_sigma(c5);
  AssociatedMatrix F5 = associated_matrix(s5);
  REQUIRE(F5.lower(3, 2).max_abs_diff(-s5.sigma[3]) < 1e-14);
  REQUIRE(F5.lower(4, 1).max_abs_diff(s5.sigma[0] + s5.sigma[1]) < 1e-14);
  REQUIRE(F5.lower(4, 2).max_abs_diff(s5.sigma[2]) < 1e-14);
  REQUIRE(F5.lower(4, 3).max_abs_diff(-s5.sigma[3]) < 1e-14);
  REQUIRE(F5.lower(5, 2).max_abs_diff(-(s5.sigma[0] - s5.sigma[1])) < 1e-14);
  for (auto [k, j] : {std::pair{3, 1}, {3, 3}, {5, 1}, {5, 3}, {5, 4}, {5, 5}})
    REQUIRE(F5.lower(k, j).is_zero());
}

TEST_CASE("trace is zero and zero coefficients give the companion matrix") {
  for (int n : {2, 3, 4, 5}) {
    AssociatedMatrix F = zero_matrix(n);
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= k; ++j) REQUIRE(F.lower(k, j).is_zero());
    CoefficientSet c = random_selfadjoint_coeffs(n, 30 + n);
    AssociatedMatrix G = associated_matrix(make_sigma(c));
    for (double x : {0.0, 0.33, 1.0}) REQUIRE(std::abs(G.eval(x).trace()) < 1e-13);
  }
}

// The regularization identity y^[n] = l_n(y): the quasi-derivative chain under
// the built matrix must reproduce the differential expression exactly. This
// pins every sign in the construction formulas.
TEST_CASE("quasi-derivative chain reproduces the differential expression") {
  for (int n : {2, 3, 4, 5}) {
    CoefficientSet c = random_selfadjoint_coeffs(n, 50 + n);
    AssociatedMatrix F = associated_matrix(make_sigma(c));
    Function1D y = Function1D::polynomial({0.4, 1.0, -0.6, 0.2, 0.9, -0.3, 0.11, 0.05});
    auto q = quasi_derivatives(F, y, n);
    Function1D lhs = q[n];
    Function1D rhs = apply_expression(c, y);
    REQUIRE(lhs.max_abs_diff(rhs) < 1e-10);
  }
}

TEST_CASE("n=2 matrix and quasi-derivative y^[1] = y' + sigma y") {
  Function1D tau0 = Function1D::polynomial({0.5, -1.0});  // direct tau_0, polynomial
  CoefficientSet c = make_coeffs(2, {tau0});
  Function1D sig = c.tau[0];  // antiderivative = sigma of the 2x2 form
  AssociatedMatrix F = associated_matrix(make_sigma(c));
  REQUIRE(F.lower(1, 1).max_abs_diff(-sig) < 1e-14);
  REQUIRE(F.lower(2, 2).max_abs_diff(sig) < 1e-14);
  REQUIRE(F.lower(2, 1).max_abs_diff(-(sig * sig)) < 1e-14);
  Function1D y = Function1D::polynomial({1.0, 2.0, 3.0});
  auto q = quasi_derivatives(F, y, 2);
  REQUIRE(q[1].max_abs_diff(y.derivative() + sig * y) < 1e-13);
  REQUIRE(q[2].max_abs_diff(y.derivative().derivative() + tau0 * y) < 1e-13);
}

TEST_CASE("n=4 quasi-derivatives match the row structure") {
  CoefficientSet c = random_selfadjoint_coeffs(4, 61);
  SigmaSet s = make_sigma(c);
  AssociatedMatrix F = associated_matrix(s);
  Function1D y = Function1D::polynomial({1.0, -0.2, 0.3, 0.7, 0.4});
  auto q = quasi_derivatives(F, y, 3);
  REQUIRE(q[2].max_abs_diff(deriv_n(y, 2)) < 1e-13);
  Function1D expect3 = deriv_n(y, 3) - (s.sigma[0] + s.sigma[1]) * y - s.sigma[2] * y.derivative();
  REQUIRE(q[3].max_abs_diff(expect3) < 1e-12);
}

TEST_CASE("star matrix is an involution and fixes the companion matrix") {
  for (int n : {2, 3, 4, 5}) {
    CoefficientSet c = random_selfadjoint_coeffs(n, 70 + n);
    AssociatedMatrix F = associated_matrix(make_sigma(c));
    AssociatedMatrix FSS = star_matrix(star_matrix(F));
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= k; ++j) REQUIRE(F.lower(k, j).max_abs_diff(FSS.lower(k, j)) < 1e-14);
    AssociatedMatrix Z = zero_matrix(n), ZS = star_matrix(Z);
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= k; ++j) REQUIRE(ZS.lower(k, j).is_zero());
  }
}

TEST_CASE("n=2 star keeps the diagonal of the dedicated matrix") {
  CoefficientSet c = make_coeffs(2, {Function1D::polynomial({1.0, -2.0})});
  AssociatedMatrix F = associated_matrix(make_sigma(c));
  AssociatedMatrix S = star_matrix(F);
  REQUIRE(S.lower(1, 1).max_abs_diff(F.lower(1, 1)) < 1e-14);
  REQUIRE(S.lower(2, 2).max_abs_diff(F.lower(2, 2)) < 1e-14);
  REQUIRE(S.lower(2, 1).max_abs_diff(F.lower(2, 1)) < 1e-14);
}

TEST_CASE("self-adjointness check") {
  SECTION("self-adjoint builds pass; F* equals the entrywise conjugate") {
    for (int n : {2, 3, 4, 5}) {
      CoefficientSet c = random_selfadjoint_coeffs(n, 90 + n);
      REQUIRE(c.selfadjoint_violation() < 1e-12);
      AssociatedMatrix F = associated_matrix(make_sigma(c));
      ClassReport rep = check_class(F);
      REQUIRE(rep.selfadjoint);
      AssociatedMatrix S = star_matrix(F);
      for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= k; ++j)
          REQUIRE(S.lower(k, j).max_abs_diff(F.lower(k, j).conjugate()) < 1e-13);
    }
  }
  SECTION("companion matrix is self-adjoint") {
    REQUIRE(check_class(zero_matrix(4)).selfadjoint);
  }
  SECTION("imaginary sigma in the n=2 matrix fails") {
    CoefficientSet c;
    c.n = 2;
    c.tau = {Function1D::polynomial({0.0, cplx(0.0, 1.0)})};  // antiderivative ix
    AssociatedMatrix F = associated_matrix(make_sigma(c));
    REQUIRE_FALSE(check_class(F).selfadjoint);
  }
}

TEST_CASE("matrix dump lists the nonzero stored entries") {
  CoefficientSet c = make_coeffs(2, {Function1D::constant(1.0)});
  AssociatedMatrix F = associated_matrix(make_sigma(c));
  std::string d = dump_matrix(F);
  REQUIRE(d.find("1 1 ") != std::string::npos);
  REQUIRE(d.find("2 1 ") != std::string::npos);
  REQUIRE(d.find("2 2 ") != std::string::npos);
}
