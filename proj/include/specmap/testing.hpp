#pragma once

#include <random>
#include <vector>

#include "specmap/coefficients.hpp"

namespace specmap {

// Coefficient set from plain functions; a directly-given tau_0 is
// antidifferentiated on construction.
inline CoefficientSet make_coeffs(int n, std::vector<Function1D> taus,
                                  bool tau0_given_as_antiderivative = false) {
  CoefficientSet c;
  c.n = n;
  if (static_cast<int>(taus.size()) != n - 1) throw RepresentationError("make_coeffs: need n-1 entries");
  c.tau = std::move(taus);
  if (!tau0_given_as_antiderivative) c.tau[0] = c.tau[0].antiderivative();
  return c;
}

// Random polynomial coefficient set with i^{n+nu} tau_nu real-valued,
// reproducible from the seed. Amplitudes are kept moderate so that low-index
// eigenvalues stay on their asymptotic tracks.
inline CoefficientSet random_selfadjoint_coeffs(int n, unsigned seed, double amplitude = 1.0,
                                                int degree = 3) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  CoefficientSet c;
  c.n = n;
  c.selfadjoint_flag = true;
  for (int nu = 0; nu <= n - 2; ++nu) {
    std::vector<cplx> coeffs(degree + 1);
    cplx phase = std::pow(cplx(0.0, -1.0), double(n + nu));  // i^{-(n+nu)}
    for (auto& v : coeffs) v = phase * u(rng);
    Function1D f = Function1D::polynomial(std::move(coeffs));
    c.tau.push_back(nu == 0 ? f.antiderivative() : f);
  }
  return c;
}

}  // namespace specmap
