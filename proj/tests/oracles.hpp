#pragma once

// Independent reference implementations used only by the tests. They follow
// the defining sums literally and share no code with the library beyond the
// plain data types.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;

inline double tap(const std::vector<double>& h, long long i) {
  return (i >= 0 && i < static_cast<long long>(h.size())) ? h[static_cast<std::size_t>(i)] : 0.0;
}

// Stacked [Re; Im] system with 1-based segment index and m_l = l - (L+1)/2.
inline Eigen::MatrixXd psi_breve(int L, const std::vector<int>& c, const std::vector<std::pair<int, int>>& pairs) {
  const int Q = static_cast<int>(pairs.size());
  Eigen::MatrixXd P(2 * Q, L);
  for (int k = 0; k < Q; ++k) {
    const double w = 2.0 * std::numbers::pi * (c[static_cast<std::size_t>(pairs[static_cast<std::size_t>(k)].first)] -
                                               c[static_cast<std::size_t>(pairs[static_cast<std::size_t>(k)].second)]) / L;
    for (int l = 1; l <= L; ++l) {
      const double m = l - (L + 1) / 2.0;
      const Complex e = std::exp(Complex(0.0, -w * m));
      P(k, l - 1) = e.real();
      P(Q + k, l - 1) = e.imag();
    }
  }
  return P;
}

// (P^T P)^{-1} P^T u through the explicit inverse.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& P, const Eigen::VectorXd& u) {
  const Eigen::MatrixXd G = P.transpose() * P;
  return G.inverse() * (P.transpose() * u);
}

// Plain triple-loop product.
inline Eigen::MatrixXd matmul(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(A.rows(), B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < A.cols(); ++k) s += A(i, k) * B(k, j);
      C(i, j) = s;
    }
  return C;
}

// z(n) = sum_{r = n - N_h + 1}^{n} h(n - r) y(r) W(r), W(r) = 1 on [0, N - 1].
inline std::vector<Complex> delayed(const std::vector<Complex>& y, const std::vector<double>& h, long long N) {
  const long long nh = static_cast<long long>(h.size());
  std::vector<Complex> z(static_cast<std::size_t>(N));
  for (long long n = 0; n < N; ++n) {
    Complex s{};
    for (long long r = n - nh + 1; r <= n; ++r) {
      const double w = (r >= 0 && r <= N - 1) ? 1.0 : 0.0;
      if (w == 0.0) continue;
      s += tap(h, n - r) * y[static_cast<std::size_t>(r)] * w;
    }
    z[static_cast<std::size_t>(n)] = s;
  }
  return z;
}

inline Eigen::MatrixXcd correlation_matrix(const std::vector<std::vector<Complex>>& streams,
                                           const std::vector<std::vector<double>>& filters, long long N) {
  const auto q = static_cast<Eigen::Index>(streams.size());
  std::vector<std::vector<Complex>> z;
  for (Eigen::Index a = 0; a < q; ++a)
    z.push_back(delayed(streams[static_cast<std::size_t>(a)], filters[static_cast<std::size_t>(a)], N));
  Eigen::MatrixXcd R(q, q);
  for (Eigen::Index a = 0; a < q; ++a)
    for (Eigen::Index b = 0; b < q; ++b) {
      Complex s{};
      for (long long n = 0; n < N; ++n)
        s += z[static_cast<std::size_t>(a)][static_cast<std::size_t>(n)] *
             std::conj(z[static_cast<std::size_t>(b)][static_cast<std::size_t>(n)]);
      R(a, b) = s / static_cast<double>(N);
    }
  return R;
}

// Fluctuation term S_k(n) of the white-input variance for pair (a, b):
// sum_{u, r, p in [0, N)} h_a(n - r) h_a(u - r) h_b(n - p) h_b(u - p).
inline double S_definition(const std::vector<double>& ha, const std::vector<double>& hb, long long n, long long N) {
  double s = 0.0;
  for (long long u = 0; u < N; ++u)
    for (long long r = 0; r < N; ++r) {
      const double x = tap(ha, n - r) * tap(ha, u - r);
      if (x == 0.0) continue;
      for (long long p = 0; p < N; ++p) s += x * tap(hb, n - p) * tap(hb, u - p);
    }
  return s;
}

// Lagrange coefficients from the Newton-free product form evaluated directly.
inline std::vector<double> lagrange(double d, int nh) {
  std::vector<double> h(static_cast<std::size_t>(nh), 1.0);
  for (int n = 0; n < nh; ++n)
    for (int k = 0; k < nh; ++k)
      if (k != n) h[static_cast<std::size_t>(n)] *= (d - k) / static_cast<double>(n - k);
  return h;
}

// |H(nu)|^2 of real taps at normalized frequency nu (cycles/sample).
inline double power_response(const std::vector<double>& h, double nu) {
  Complex s{};
  for (std::size_t n = 0; n < h.size(); ++n)
    s += h[n] * std::exp(Complex(0.0, -2.0 * std::numbers::pi * nu * static_cast<double>(n)));
  return std::norm(s);
}

// Composite Simpson rule with an even number of intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double step = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * step) * (i % 2 ? 4.0 : 2.0);
  return s * step / 3.0;
}

}  // namespace oracle
