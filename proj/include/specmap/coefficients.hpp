#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "specmap/errors.hpp"
#include "specmap/piecewise_poly.hpp"

namespace specmap {

// Coefficient set {tau_nu}, nu = 0..n-2, of the order-n differential
// expression. tau_0 lies in W_2^{-1} and is always carried through its
// antiderivative; tau_nu for nu >= 1 is stored directly.
struct CoefficientSet {
  int n = 2;
  std::vector<Function1D> tau;  // tau[0] = antiderivative of tau_0
  bool selfadjoint_flag = false;

  const Function1D& tau0_antiderivative() const { return tau[0]; }

  void validate() const {
    if (n < 2) throw UnsupportedOrder("order must be >= 2");
    if (static_cast<int>(tau.size()) != n - 1)
      throw RepresentationError("coefficient set needs n-1 entries");
  }

  // i^{n+nu} tau_nu real-valued at every sample point. For nu = 0 the stored
  // antiderivative is checked (the constant of integration is irrelevant once
  // i^n * antiderivative is real up to that constant; we require it exactly).
  double selfadjoint_violation(int samples = 64) const {
    double worst = 0.0;
    for (int nu = 0; nu <= n - 2; ++nu) {
      cplx phase = std::pow(cplx(0.0, 1.0), double(n + nu));
      for (int i = 0; i <= samples; ++i) {
        double x = double(i) / samples;
        worst = std::max(worst, std::abs(std::imag(phase * tau[nu].eval(x))));
      }
    }
    return worst;
  }
};

// The sigma functions of the regularization: sigma_0 = -tau_0^{(-1)},
// sigma_nu = (-1)^{floor(nu/2)+nu} tau_nu for nu >= 1.
struct SigmaSet {
  int n = 2;
  std::vector<Function1D> sigma;
};

inline int sigma_sign(int nu) { return ((nu / 2 + nu) % 2 == 0) ? 1 : -1; }

inline SigmaSet make_sigma(const CoefficientSet& coeffs) {
  coeffs.validate();
  SigmaSet s;
  s.n = coeffs.n;
  s.sigma.reserve(coeffs.n - 1);
  s.sigma.push_back(-coeffs.tau[0]);
  for (int nu = 1; nu <= coeffs.n - 2; ++nu)
    s.sigma.push_back(cplx(double(sigma_sign(nu))) * coeffs.tau[nu]);
  return s;
}

inline CoefficientSet sigma_to_tau(const SigmaSet& s) {
  CoefficientSet c;
  c.n = s.n;
  c.tau.push_back(-s.sigma[0]);
  for (int nu = 1; nu <= s.n - 2; ++nu)
    c.tau.push_back(cplx(double(sigma_sign(nu))) * s.sigma[nu]);
  return c;
}

// Classical form y^(n) + sum p_s y^(s). p_0 carries the distributional part
// and is returned as an antiderivative when requested by its flag.
struct PForm {
  int n = 2;
  std::vector<Function1D> p;  // s = 0..n-2
  bool p0_is_antiderivative = true;
};

namespace detail {
inline double binom(int k, int j) {
  if (j < 0 || j > k) return 0.0;
  double r = 1.0;
  for (int i = 0; i < j; ++i) r = r * (k - i) / (i + 1);
  return r;
}
}  // namespace detail

// Conversion via the binomial-coefficient expansion of the divided form.
// tau_{n-1} is treated as zero.
inline PForm tau_to_p(const CoefficientSet& coeffs) {
  coeffs.validate();
  const int n = coeffs.n;
  auto tau_deriv = [&](int nu, int order) -> Function1D {
    // order >= 0 derivatives of tau_nu; order = -1 is the antiderivative.
    if (nu > n - 2) return Function1D();  // tau_{n-1} == 0
    Function1D f = coeffs.tau[nu];
    int start = (nu == 0) ? -1 : 0;  // stored object for nu=0 is the antiderivative
    for (int o = start; o < order; ++o) f = f.derivative();
    return f;
  };
  PForm out;
  out.n = n;
  out.p.resize(n - 1);
  for (int s = 0; s <= n - 2; ++s) {
    Function1D acc;
    bool antider = false;
    const int k1_lo = (s + 1) / 2, k1_hi = std::min(s, n / 2 - 1);
    for (int k = k1_lo; k <= k1_hi; ++k) {
      if (k == 0 && s == 0) {
        // p_0 picks up tau_0 itself; build at antiderivative level.
        antider = true;
        continue;
      }
      acc = acc + cplx(detail::binom(k, s - k)) * (tau_deriv(2 * k, 2 * k - s) + tau_deriv(2 * k + 1, 2 * k - s + 1));
    }
    const int k2_lo = (s >= 1) ? s / 2 : 0;  // ceil((s-1)/2)
    const int k2_hi = std::min(s, (n - 1) / 2) - 1;
    for (int k = k2_lo; k <= k2_hi; ++k)
      acc = acc + cplx(2.0 * detail::binom(k, s - k - 1)) * tau_deriv(2 * k + 1, 2 * k + 1 - s);
    if (antider) {
      // p_0^{(-1)} = tau_0^{(-1)} + tau_1 + (smooth contributions antidifferentiated)
      Function1D a = coeffs.tau[0] + tau_deriv(1, 0);
      if (!acc.is_zero()) a = a + acc.antiderivative();
      out.p[0] = a;
      out.p0_is_antiderivative = true;
    } else {
      out.p[s] = acc;
    }
  }
  return out;
}

// Direct expansion of the divided differential expression applied to a
// smooth piecewise polynomial y, using exact polynomial calculus. Requires a
// polynomial tau_0 (i.e. a differentiable stored antiderivative) and serves
// as the independent route against tau_to_p and the quasi-derivative chain.
inline Function1D apply_expression(const CoefficientSet& coeffs, const Function1D& y) {
  coeffs.validate();
  const int n = coeffs.n;
  auto deriv = [](Function1D f, int k) {
    for (int i = 0; i < k; ++i) f = f.derivative();
    return f;
  };
  Function1D res = deriv(y, n);
  Function1D tau0 = coeffs.tau[0].derivative();
  for (int k = 0; k <= n / 2 - 1; ++k) {
    const Function1D& t = (k == 0) ? tau0 : coeffs.tau[2 * k];
    res = res + deriv(t * deriv(y, k), k);
  }
  for (int k = 0; k <= (n - 1) / 2 - 1; ++k) {
    const Function1D& t = coeffs.tau[2 * k + 1];
    res = res + deriv(t * deriv(y, k), k + 1) + deriv(t * deriv(y, k + 1), k);
  }
  return res;
}

// Asymptotic constants extracted from (or imposed on) the spectral data.
struct AsymptoticParameters {
  int n = 2;
  std::vector<double> chi;  // chi_k, k = 1..n-1
  double theta = 0.0;       // int tau_2 (n=4) or int tau_1 (n=3)
  double t0 = 0.0, t1 = 0.0;  // tau_2(0), tau_2(1), n = 4 only
  cplx sigma_int = 0.0;       // int tau_1 (n = 4; imaginary for self-adjoint data)
  double fit_residual = 0.0;
};

// Model problem matched to the asymptotic constants. The n=4 quadratic
// satisfies int = theta, value t0 at 0 and t1 at 1 exactly.
inline CoefficientSet build_model_problem(const AsymptoticParameters& params, int n) {
  CoefficientSet c;
  c.n = n;
  c.selfadjoint_flag = true;
  switch (n) {
    case 2:
      c.tau.push_back(Function1D());  // zero antiderivative
      break;
    case 3:
      c.tau.push_back(Function1D());
      c.tau.push_back(Function1D::constant(params.theta));
      break;
    case 4: {
      const double th = params.theta, t0 = params.t0, t1 = params.t1;
      c.tau.push_back(Function1D());
      c.tau.push_back(Function1D::constant(params.sigma_int));
      c.tau.push_back(Function1D::polynomial({t0, -4.0 * t0 - 2.0 * t1 + 6.0 * th, 3.0 * t0 + 3.0 * t1 - 6.0 * th}));
      break;
    }
    default:
      throw UnsupportedOrder("model problems are provided for n = 2, 3, 4");
  }
  return c;
}

// Inverse of tau_to_p for the orders the recovery pipeline supports.
// n=2: tau_0 = p_0; n=3: tau_1 = p_1/2, tau_0 = p_0 - tau_1';
// n=4: tau_2 = p_2, tau_1 = (p_1 - p_2')/2, tau_0 = p_0 - tau_1'.
inline CoefficientSet p_to_tau(const PForm& pf) {
  const int n = pf.n;
  if (n < 2 || n > 4) throw UnsupportedOrder("p -> tau inversion implemented for n <= 4");
  auto p0_antider = [&]() { return pf.p0_is_antiderivative ? pf.p[0] : pf.p[0].antiderivative(); };
  CoefficientSet c;
  c.n = n;
  if (n == 2) {
    c.tau.push_back(p0_antider());
  } else if (n == 3) {
    Function1D tau1 = cplx(0.5) * pf.p[1];
    c.tau.push_back(p0_antider() - tau1);
    c.tau.push_back(tau1);
  } else {
    Function1D tau2 = pf.p[2];
    Function1D tau1 = cplx(0.5) * (pf.p[1] - tau2.derivative());
    c.tau.push_back(p0_antider() - tau1);
    c.tau.push_back(tau1);
    c.tau.push_back(tau2);
  }
  return c;
}

}  // namespace specmap
