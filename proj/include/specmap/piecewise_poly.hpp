#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <vector>

#include "specmap/errors.hpp"

namespace specmap {

using cplx = std::complex<double>;

// Polynomial with complex coefficients in a local variable t, ascending degree.
struct Poly {
  std::vector<cplx> c;

  Poly() : c{cplx(0.0)} {}
  explicit Poly(std::vector<cplx> coeffs) : c(std::move(coeffs)) {
    if (c.empty()) c.push_back(cplx(0.0));
  }
  Poly(std::initializer_list<cplx> coeffs) : c(coeffs) {
    if (c.empty()) c.push_back(cplx(0.0));
  }

  int degree() const { return static_cast<int>(c.size()) - 1; }

  cplx eval(double t) const {
    cplx v = c.back();
    for (int i = degree() - 1; i >= 0; --i) v = v * t + c[i];
    return v;
  }

  Poly derivative() const {
    if (degree() == 0) return Poly();
    std::vector<cplx> d(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * double(i);
    return Poly(std::move(d));
  }

  // Antiderivative with value `c0` at t = 0.
  Poly antiderivative(cplx c0) const {
    std::vector<cplx> a(c.size() + 1);
    a[0] = c0;
    for (size_t i = 0; i < c.size(); ++i) a[i + 1] = c[i] / double(i + 1);
    return Poly(std::move(a));
  }

  // Rewrite in the variable s where t = s + delta.
  Poly shifted(double delta) const {
    const int d = degree();
    std::vector<cplx> out(d + 1, cplx(0.0));
    // Horner in (s + delta): process coefficients from the top.
    for (int i = d; i >= 0; --i) {
      for (int j = d - i; j >= 1; --j) out[j] = out[j] * delta + out[j - 1];
      out[0] = out[0] * delta + c[i];
    }
    return Poly(std::move(out));
  }

  void trim() {
    while (c.size() > 1 && std::abs(c.back()) == 0.0) c.pop_back();
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<cplx> r(std::max(a.c.size(), b.c.size()), cplx(0.0));
    for (size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a, const Poly& b) {
    std::vector<cplx> r(std::max(a.c.size(), b.c.size()), cplx(0.0));
    for (size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (size_t i = 0; i < b.c.size(); ++i) r[i] -= b.c[i];
    return Poly(std::move(r));
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    std::vector<cplx> r(a.c.size() + b.c.size() - 1, cplx(0.0));
    for (size_t i = 0; i < a.c.size(); ++i)
      for (size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
    return Poly(std::move(r));
  }
  friend Poly operator*(cplx s, const Poly& a) {
    std::vector<cplx> r(a.c);
    for (auto& v : r) v *= s;
    return Poly(std::move(r));
  }
};

// Piecewise polynomial on [0,1]. Pieces live on [bp[i], bp[i+1]] in the local
// variable t = x - bp[i]. Evaluation at a breakpoint uses the right piece; at
// x = 1 the left piece. Differentiation and antidifferentiation are exact.
class Function1D {
 public:
  Function1D() : bp_{0.0, 1.0}, pieces_{Poly()} {}

  Function1D(std::vector<double> breakpoints, std::vector<Poly> pieces)
      : bp_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    validate();
  }

  static Function1D constant(cplx v) { return Function1D({0.0, 1.0}, {Poly({v})}); }

  // Single global polynomial in x (local variable equals x on [0,1]).
  static Function1D polynomial(std::vector<cplx> coeffs) {
    return Function1D({0.0, 1.0}, {Poly(std::move(coeffs))});
  }

  // Piecewise-linear interpolant through (x_i, y_i); x ascending, x.front()=0, x.back()=1.
  static Function1D interpolant(const std::vector<double>& x, const std::vector<cplx>& y) {
    if (x.size() < 2 || x.size() != y.size()) throw RepresentationError("interpolant: bad sample set");
    std::vector<Poly> p;
    p.reserve(x.size() - 1);
    for (size_t i = 0; i + 1 < x.size(); ++i) {
      double h = x[i + 1] - x[i];
      if (h <= 0) throw RepresentationError("interpolant: nodes not increasing");
      p.push_back(Poly({y[i], (y[i + 1] - y[i]) / h}));
    }
    return Function1D(x, std::move(p));
  }

  const std::vector<double>& breakpoints() const { return bp_; }
  const std::vector<Poly>& pieces() const { return pieces_; }
  int piece_count() const { return static_cast<int>(pieces_.size()); }

  cplx eval(double x) const {
    size_t i = locate(x);
    return pieces_[i].eval(x - bp_[i]);
  }
  cplx operator()(double x) const { return eval(x); }

  Function1D derivative() const {
    std::vector<Poly> d;
    d.reserve(pieces_.size());
    for (const auto& p : pieces_) d.push_back(p.derivative());
    return Function1D(bp_, std::move(d));
  }

  // Continuous antiderivative with value 0 at x = 0.
  Function1D antiderivative() const {
    std::vector<Poly> a;
    a.reserve(pieces_.size());
    cplx acc = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
      Poly ai = pieces_[i].antiderivative(acc);
      acc = ai.eval(bp_[i + 1] - bp_[i]);
      a.push_back(std::move(ai));
    }
    return Function1D(bp_, std::move(a));
  }

  Function1D conjugate() const {
    std::vector<Poly> out;
    out.reserve(pieces_.size());
    for (const auto& p : pieces_) {
      std::vector<cplx> c(p.c);
      for (auto& v : c) v = std::conj(v);
      out.push_back(Poly(std::move(c)));
    }
    return Function1D(bp_, std::move(out));
  }

  bool is_zero() const {
    for (const auto& p : pieces_)
      for (const auto& v : p.c)
        if (v != cplx(0.0)) return false;
    return true;
  }

  friend Function1D operator+(const Function1D& f, const Function1D& g) {
    return combine(f, g, [](const Poly& a, const Poly& b) { return a + b; });
  }
  friend Function1D operator-(const Function1D& f, const Function1D& g) {
    return combine(f, g, [](const Poly& a, const Poly& b) { return a - b; });
  }
  friend Function1D operator*(const Function1D& f, const Function1D& g) {
    return combine(f, g, [](const Poly& a, const Poly& b) { return a * b; });
  }
  friend Function1D operator*(cplx s, const Function1D& f) {
    std::vector<Poly> out;
    out.reserve(f.pieces_.size());
    for (const auto& p : f.pieces_) out.push_back(s * p);
    return Function1D(f.bp_, std::move(out));
  }
  friend Function1D operator-(const Function1D& f) { return cplx(-1.0) * f; }

  double max_abs_diff(const Function1D& other, int samples = 257) const {
    double m = 0.0;
    for (int i = 0; i <= samples; ++i) {
      double x = double(i) / samples;
      m = std::max(m, std::abs(eval(x) - other.eval(x)));
    }
    return m;
  }

 private:
  std::vector<double> bp_;
  std::vector<Poly> pieces_;

  void validate() const {
    if (bp_.size() < 2 || pieces_.size() + 1 != bp_.size())
      throw RepresentationError("Function1D: breakpoint/piece count mismatch");
    if (bp_.front() != 0.0 || bp_.back() != 1.0)
      throw RepresentationError("Function1D: breakpoints must span [0,1]");
    for (size_t i = 0; i + 1 < bp_.size(); ++i)
      if (!(bp_[i] < bp_[i + 1])) throw RepresentationError("Function1D: breakpoints not increasing");
  }

  size_t locate(double x) const {
    if (x <= bp_.front()) return 0;
    if (x >= bp_.back()) return pieces_.size() - 1;
    size_t i = std::upper_bound(bp_.begin(), bp_.end(), x) - bp_.begin();
    return i - 1;
  }

  template <class Op>
  static Function1D combine(const Function1D& f, const Function1D& g, Op op) {
    std::vector<double> bp;
    bp.reserve(f.bp_.size() + g.bp_.size());
    std::merge(f.bp_.begin(), f.bp_.end(), g.bp_.begin(), g.bp_.end(), std::back_inserter(bp));
    bp.erase(std::unique(bp.begin(), bp.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             bp.end());
    std::vector<Poly> out;
    out.reserve(bp.size() - 1);
    for (size_t i = 0; i + 1 < bp.size(); ++i) {
      double a = bp[i];
      size_t fi = f.locate(0.5 * (a + bp[i + 1]));
      size_t gi = g.locate(0.5 * (a + bp[i + 1]));
      Poly pf = f.pieces_[fi].shifted(a - f.bp_[fi]);
      Poly pg = g.pieces_[gi].shifted(a - g.bp_[gi]);
      Poly r = op(pf, pg);
      r.trim();
      out.push_back(std::move(r));
    }
    return Function1D(std::move(bp), std::move(out));
  }
};

}  // namespace specmap
