#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace afc::detail {

using cvec = std::vector<std::complex<double>>;

inline double norm2(const cvec& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline std::complex<double> dot(const cvec& a, const cvec& b) {
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

struct GmresResult {
  cvec x;
  int iterations = 0;
  double residual = 0.0;
};

// Restarted GMRES with modified Gram-Schmidt and Givens rotations; x0 = 0.
template <class Op>
GmresResult gmres(Op&& apply, const cvec& b, double rtol = 1e-12, int restart = 80, int max_iter = 4000) {
  using C = std::complex<double>;
  const std::size_t n = b.size();
  GmresResult res{cvec(n, 0.0), 0, 0.0};
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return res;
  while (res.iterations < max_iter) {
    cvec r = apply(res.x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm2(r);
    res.residual = beta / bnorm;
    if (res.residual < rtol) return res;
    std::vector<cvec> v{r};
    for (auto& x : v[0]) x /= beta;
    std::vector<std::vector<C>> h(restart + 1, std::vector<C>(restart, 0.0));
    std::vector<C> cs(restart), sn(restart), g(restart + 1, 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < restart && res.iterations < max_iter; ++k, ++res.iterations) {
      cvec w = apply(v[k]);
      for (int j = 0; j <= k; ++j) {
        h[j][k] = dot(v[j], w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= h[j][k] * v[j][i];
      }
      const double wn = norm2(w);
      h[k + 1][k] = wn;
      for (int j = 0; j < k; ++j) {
        const C t = std::conj(cs[j]) * h[j][k] + std::conj(sn[j]) * h[j + 1][k];
        h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
        h[j][k] = t;
      }
      const double den = std::sqrt(std::norm(h[k][k]) + std::norm(h[k + 1][k]));
      cs[k] = h[k][k] / den;
      sn[k] = h[k + 1][k] / den;
      h[k][k] = den;
      h[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = std::conj(cs[k]) * g[k];
      const double hk1 = std::abs(g[k + 1]);
      if (hk1 / bnorm < rtol || wn == 0.0) {
        ++k;
        ++res.iterations;
        break;
      }
      for (auto& x : w) x /= wn;
      v.emplace_back(std::move(w));
    }
    std::vector<C> y(k);
    for (int i = k - 1; i >= 0; --i) {
      C s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h[i][j] * y[j];
      y[i] = s / h[i][i];
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) res.x[i] += y[j] * v[j][i];
  }
  cvec r = apply(res.x);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  res.residual = norm2(r) / bnorm;
  if (res.residual > 1e3 * rtol) throw std::runtime_error("GMRES did not converge");
  return res;
}

}  // namespace afc::detail
