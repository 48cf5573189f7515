#include <catch2/catch.hpp>
#include <cmath>

#include "specmap/grid.hpp"

using namespace specmap;

TEST_CASE("grid size must be 2^m + 1") {
  REQUIRE_THROWS_AS(ChebyshevGrid(34), RepresentationError);
  REQUIRE_NOTHROW(ChebyshevGrid(33));
  REQUIRE_NOTHROW(ChebyshevGrid(129));
}

TEST_CASE("differentiation matrix is spectrally accurate") {
  ChebyshevGrid g(65);
  VectorXcd f(g.size()), df_true(g.size());
  for (int i = 0; i < g.size(); ++i) {
    double x = g.node(i);
    f(i) = std::exp(cplx(0.0, 3.0) * x) + x * x;
    df_true(i) = cplx(0.0, 3.0) * std::exp(cplx(0.0, 3.0) * x) + 2.0 * x;
  }
  REQUIRE((g.differentiate(f) - df_true).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("cumulative integration matches closed forms") {
  ChebyshevGrid g(65);
  VectorXcd f(g.size());
  for (int i = 0; i < g.size(); ++i) {
    double x = g.node(i);
    f(i) = std::exp(cplx(-1.0, 5.0) * x);
  }
  VectorXcd F = g.cumulative(f);
  cplx a(-1.0, 5.0);
  for (int i = 0; i < g.size(); ++i) {
    cplx expect = (std::exp(a * g.node(i)) - 1.0) / a;
    REQUIRE(std::abs(F(i) - expect) < 1e-12);
  }
  REQUIRE(std::abs(g.integrate(f) - (std::exp(a) - 1.0) / a) < 1e-12);
}

TEST_CASE("cumulative integration of polynomials is near exact") {
  ChebyshevGrid g(33);
  VectorXcd f(g.size());
  for (int i = 0; i < g.size(); ++i) f(i) = 3.0 * g.node(i) * g.node(i);
  VectorXcd F = g.cumulative(f);
  for (int i = 0; i < g.size(); ++i) REQUIRE(std::abs(F(i) - std::pow(g.node(i), 3)) < 1e-13);
}
