#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "specmap/spectral.hpp"

namespace specmap {

// xi_l = sum_k ( l^{-(n-1)} |lambda_{l,k} - ~lambda_{l,k}|
//              + l^{-n}     |beta_{l,k}   - ~beta_{l,k}| ).
inline std::vector<double> xi_weights(const SpectralData& data, const SpectralData& model) {
  if (data.n != model.n || data.L != model.L)
    throw DimensionMismatch("xi weights: index ranges differ");
  std::vector<double> xi(data.L);
  for (int l = 1; l <= data.L; ++l) {
    double s = 0.0;
    for (int k = 1; k <= data.n - 1; ++k) {
      s += std::pow(double(l), -(data.n - 1)) * std::abs(data.lambda(l, k) - model.lambda(l, k));
      s += std::pow(double(l), -data.n) * std::abs(data.beta(l, k) - model.beta(l, k));
    }
    xi[l - 1] = s;
  }
  return xi;
}

// w_{l,k}(x) = l^{-k} exp(-x pi l cot(k pi / n)): the growth envelope of the
// Weyl solutions along the k-th eigenvalue track, Re(rho_{l,k} w_{k+1}) =
// -pi l cot(k pi/n) (1 + o(1)).
inline double w_scaling(int l, int k, double x, int n) {
  return std::pow(double(l), -k) * std::exp(-x * M_PI * l / std::tan(k * M_PI / n));
}

struct CheckResult {
  std::string name;
  bool pass = false;
  double evidence = 0.0;  // margin or worst violation, check-specific
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool overall_pass = false;
  std::vector<double> xi;
  std::vector<double> kappa_abs;  // |kappa_{l,k}| remainder diagnostics, row-major by k

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  std::string failed_names() const {
    std::string s;
    for (const auto& c : checks)
      if (!c.pass) s += (s.empty() ? "" : ", ") + c.name;
    return s;
  }
};

struct ValidationOptions {
  double separation_rel = 1e-9;   // (A-1), (A-2), (33) relative separation
  double symmetry_tol = 1e-7;     // (32)
  double sign_imag_tol = 1e-6;    // imaginary contamination allowed in (45)
  double beta_floor = 1e-10;
  double l2_flatness_threshold = 0.5;  // tail ratio of partial sums
};

// The seven named checks of the data characterization, evaluated on a finite
// index range. Failures are report entries, never exceptions.
inline ValidationReport validate_spectral_data(const SpectralData& data, const SpectralData& model,
                                               const ValidationOptions& vo = {}) {
  const int n = data.n, L = data.L;
  ValidationReport rep;
  auto scale_of = [](cplx a) { return 1.0 + std::abs(a); };

  {  // (A-1): within each k all lambda distinct
    double worst = 1e300;
    for (int k = 1; k <= n - 1; ++k)
      for (int l = 1; l <= L; ++l)
        for (int m = l + 1; m <= L; ++m)
          worst = std::min(worst, std::abs(data.lambda(l, k) - data.lambda(m, k)) /
                                      scale_of(data.lambda(l, k)));
    rep.checks.push_back({"A-1", worst > vo.separation_rel, worst, "min relative separation"});
  }
  {  // (A-2): neighboring spectra disjoint
    double worst = 1e300;
    for (int k = 1; k <= n - 2; ++k)
      for (int l = 1; l <= L; ++l)
        for (int m = 1; m <= L; ++m)
          worst = std::min(worst, std::abs(data.lambda(l, k) - data.lambda(m, k + 1)) /
                                      scale_of(data.lambda(l, k)));
    rep.checks.push_back(
        {"A-2", n == 2 || worst > vo.separation_rel, n == 2 ? 0.0 : worst, "min relative separation"});
  }
  {  // (32): lambda_{l,k} = (-1)^n conj(lambda_{l,n-k}), same for beta
    double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    double worst = 0.0;
    for (int k = 1; k <= n - 1; ++k)
      for (int l = 1; l <= L; ++l) {
        worst = std::max(worst, std::abs(data.lambda(l, k) - sgn * std::conj(data.lambda(l, n - k))) /
                                    scale_of(data.lambda(l, k)));
        worst = std::max(worst, std::abs(data.beta(l, k) - sgn * std::conj(data.beta(l, n - k))) /
                                    scale_of(data.beta(l, k)));
      }
    rep.checks.push_back({"symmetry-(32)", worst < vo.symmetry_tol, worst, "max relative asymmetry"});
  }
  {  // (45): sign conditions for the middle problem
    const int p = n / 2;
    double psgn = (p % 2 == 0) ? -1.0 : 1.0;  // (-1)^{p+1}
    double margin = 1e300;
    bool ok = true;
    for (int l = 1; l <= L; ++l) {
      if (n % 2 == 0) {
        cplx b = data.beta(l, p);
        if (std::abs(b.imag()) > vo.sign_imag_tol * std::abs(b)) ok = false;
        margin = std::min(margin, psgn * b.real() / scale_of(b));
      } else {
        margin = std::min(margin, psgn * data.lambda(l, p).real() / scale_of(data.lambda(l, p)));
      }
    }
    rep.checks.push_back({"sign-condition-(45)", ok && margin > 0.0, margin, "min signed margin"});
  }
  {  // beta != 0
    double worst = 1e300;
    for (const auto& e : data.entries)
      worst = std::min(worst, std::abs(e.beta) / scale_of(e.lambda));
    rep.checks.push_back({"beta-nonzero", worst > vo.beta_floor, worst, "min relative weight"});
  }
  {  // (33): data and model spectra disjoint
    double worst = 1e300;
    for (const auto& e : data.entries)
      for (const auto& m : model.entries)
        worst = std::min(worst, std::abs(e.lambda - m.lambda) / scale_of(e.lambda));
    rep.checks.push_back({"non-overlap-(33)", worst > vo.separation_rel, worst, "min relative separation"});
  }
  rep.xi = xi_weights(data, model);
  {  // l2 tail of { l^{n-2} xi_l }: Cauchy-flatness of partial sums
    std::vector<double> s(L);
    double acc = 0.0;
    for (int l = 1; l <= L; ++l) {
      double t = std::pow(double(l), n - 2) * rep.xi[l - 1];
      acc += t * t;
      s[l - 1] = acc;
    }
    double ratio = 0.0;
    if (acc > 0.0) ratio = (s[L - 1] - s[std::max(0, (2 * L) / 3 - 1)]) / s[L - 1];
    rep.checks.push_back({"l2-tail", ratio <= vo.l2_flatness_threshold, ratio,
                          "tail share of sum (l^{n-2} xi_l)^2"});
  }
  // remainder diagnostics (not a pass/fail check)
  RemainderDiagnostics rd = remainder_diagnostics(data);
  for (const auto& e : rd.entries) rep.kappa_abs.push_back(std::abs(e.lambda));

  rep.overall_pass = true;
  for (const auto& c : rep.checks) rep.overall_pass = rep.overall_pass && c.pass;
  return rep;
}

}  // namespace specmap
