#include "mcpsd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcpsd/error.hpp"

namespace mcpsd {

namespace {

// (x * h_rev)(g) for g in [0, 2 N_h - 2], where x is h with taps beyond
// `last` zeroed and h_rev(i) = h(N_h - 1 - i).
std::vector<double> reversed_self_convolution(std::span<const double> h, std::size_t last) {
  const std::size_t nh = h.size();
  std::vector<double> out(2 * nh - 1, 0.0);
  const std::size_t top = std::min(last, nh - 1);
  for (std::size_t i = 0; i <= top; ++i)
    for (std::size_t j = 0; j < nh; ++j) out[i + j] += h[i] * h[nh - 1 - j];
  return out;
}

double partial_dot(const std::vector<double>& x, const std::vector<double>& y, std::size_t last) {
  double s = 0.0;
  const std::size_t top = std::min(last, x.size() - 1);
  for (std::size_t g = 0; g <= top; ++g) s += x[g] * y[g];
  return s;
}

}  // namespace

Eigen::MatrixXcd expected_Rz(const FilterBank& bank, const ChannelCorrelation& ry, long long N) {
  if (N <= bank.length) fail(ErrorCode::InvalidLength, "N must exceed the filter length");
  const auto q = static_cast<Eigen::Index>(bank.size());
  const int nh = bank.length;
  Eigen::MatrixXcd out(q, q);
  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index b = 0; b < q; ++b) {
      const auto& ha = bank[static_cast<std::size_t>(a)].coeffs;
      const auto& hb = bank[static_cast<std::size_t>(b)].coeffs;
      Complex s{};
      for (int r = 0; r < nh; ++r)
        for (int p = 0; p < nh; ++p) {
          const double w = 1.0 - static_cast<double>(std::max(r, p)) / static_cast<double>(N);
          s += ha[static_cast<std::size_t>(r)] * hb[static_cast<std::size_t>(p)] *
               ry(static_cast<int>(a), static_cast<int>(b), p - r) * w;
        }
      out(a, b) = s;
    }
  }
  return out;
}

Eigen::VectorXd expected_powers(const PsiSystem& system, const PairIndexMap& map,
                                const Eigen::MatrixXcd& expected_rz, double W) {
  CorrelationMatrixEstimate est;
  est.rz = expected_rz;
  return solve_ls(system, form_u_breve(est, map)) * (static_cast<double>(system.L()) / W);
}

std::vector<double> bias_white(int L, double W, double sigma2, double H1) {
  if (!(H1 > 0.0 && H1 <= 1.0)) fail(ErrorCode::InvalidArgument, "H1 must lie in (0, 1]");
  return std::vector<double>(static_cast<std::size_t>(L), (1.0 - H1) * sigma2 / W);
}

double moment_term(std::span<const double> ha, std::span<const double> hb, long long n, long long N) {
  const auto nh = static_cast<long long>(ha.size());
  if (hb.size() != ha.size()) fail(ErrorCode::InvalidArgument, "filters must share a length");
  if (n < 0 || n >= N) fail(ErrorCode::InvalidArgument, "n outside [0, N)");
  if (N <= 2 * nh) fail(ErrorCode::InvalidLength, "N must exceed 2 N_h");
  if (n < nh - 1) {
    const auto cut = static_cast<std::size_t>(n);
    return partial_dot(reversed_self_convolution(ha, cut), reversed_self_convolution(hb, cut),
                       static_cast<std::size_t>(n + nh - 1));
  }
  const auto full_a = reversed_self_convolution(ha, ha.size());
  const auto full_b = reversed_self_convolution(hb, hb.size());
  if (n <= N - nh) return partial_dot(full_a, full_b, full_a.size() - 1);
  return partial_dot(full_a, full_b, static_cast<std::size_t>(N - n + nh - 2));
}

FilterMomentSet compute_filter_moments(const FilterBank& bank, const PairIndexMap& map, long long N) {
  const int nh = bank.length;
  if (N <= 2LL * nh)
    fail(ErrorCode::InvalidLength, "moment formulas need N > 2 N_h (N=" + std::to_string(N) +
                                       ", N_h=" + std::to_string(nh) + ")");
  FilterMomentSet m;
  m.N = N;
  m.Nh = nh;
  const std::size_t q = bank.size();
  std::vector<std::vector<double>> full(q);
  std::vector<std::vector<std::vector<double>>> left(q);
  for (std::size_t a = 0; a < q; ++a) {
    const auto& h = bank[a].coeffs;
    m.H.push_back(compute_H(bank[a], N));
    full[a] = reversed_self_convolution(h, h.size());
    for (int n = 0; n < nh - 1; ++n) left[a].push_back(reversed_self_convolution(h, static_cast<std::size_t>(n)));
  }
  for (const auto& [a, b] : map.entries) {
    const auto& fa = full[static_cast<std::size_t>(a)];
    const auto& fb = full[static_cast<std::size_t>(b)];
    m.G.push_back(partial_dot(fa, fb, fa.size() - 1));

    double edge = 0.0;
    for (int n = 0; n < nh - 1; ++n)
      edge += partial_dot(left[static_cast<std::size_t>(a)][static_cast<std::size_t>(n)],
                          left[static_cast<std::size_t>(b)][static_cast<std::size_t>(n)],
                          static_cast<std::size_t>(n + nh - 1));
    // Right edge n = N - N_h + 1 .. N - 1 truncates at g = N - n + N_h - 2,
    // i.e. g_max runs over 2 N_h - 3 down to N_h - 1.
    for (int gmax = nh - 1; gmax <= 2 * nh - 3; ++gmax)
      edge += partial_dot(fa, fb, static_cast<std::size_t>(gmax));
    m.Sigma.push_back(edge);
  }
  return m;
}

UMatrix build_U_white(const FilterMomentSet& moments, double sigma2, SampleKind kind) {
  const int Q = static_cast<int>(moments.G.size());
  const double n = static_cast<double>(moments.N);
  const double s4 = sigma2 * sigma2;
  const double interior = moments.interior_count();
  const double pairings = kind == SampleKind::Real ? 2.0 : 1.0;
  UMatrix U;
  U.diag = Eigen::VectorXd::Zero(2 * Q);
  const double H1 = moments.H.at(0);
  U.diag(0) = s4 / (n * n) *
              (n * n * H1 * H1 + pairings * (interior * moments.G[0] + moments.Sigma[0]));
  for (int k = 1; k < Q; ++k) {
    const double fluct = interior * moments.G[static_cast<std::size_t>(k)] +
                         moments.Sigma[static_cast<std::size_t>(k)];
    if (kind == SampleKind::Real) {
      U.diag(k) = s4 / (n * n) * fluct;
    } else {
      U.diag(k) = s4 / (2.0 * n * n) * fluct;
      U.diag(Q + k) = U.diag(k);
    }
  }
  return U;
}

Eigen::MatrixXd covariance_exact(const PsiSystem& system, const UMatrix& U, int L, double W,
                                 double H1, double sigma2) {
  if (!system.rank_ok) fail(ErrorCode::RankDeficient, "covariance requires a full-rank system");
  if (U.diag.size() != system.recovery.cols())
    fail(ErrorCode::InvalidDimensions, "U does not match the system size");
  const double scale = static_cast<double>(L) / W;
  const Eigen::MatrixXd weighted = system.recovery * U.diag.asDiagonal();
  Eigen::MatrixXd C = scale * scale * (weighted * system.recovery.transpose());
  const double mean = H1 * sigma2 / W;
  C.array() -= mean * mean;
  // Symmetrize away rounding in the product.
  return 0.5 * (C + C.transpose());
}

double variance_approx(int L, int Q, long long Nx, int Nh, double G1, double Sigma1, double sigma2,
                       double W) {
  const double l = L;
  const double nx = static_cast<double>(Nx);
  const double s4 = sigma2 * sigma2;
  return s4 / (2.0 * W * W * nx * nx) * (l * l * l / Q + l) *
         ((nx - 2.0 * Nh * l + 2.0 * l) * G1 + l * Sigma1);
}

Eigen::MatrixXd fourth_moment_oracle(const FilterBank& bank, const PairIndexMap& map,
                                     const ChannelCorrelation& ry, long long N, SampleKind kind) {
  const int nh = bank.length;
  const int q = static_cast<int>(bank.size());
  if (N > kOracleMaxN || nh > kOracleMaxFilterLength || q > kOracleMaxChannels)
    fail(ErrorCode::InstanceTooLarge, "oracle bounded to N <= 128, N_h <= 9, q <= 3");
  if (N <= nh) fail(ErrorCode::InvalidLength, "N must exceed the filter length");

  // corr[a][b][lag + N - 1] = r_{y_a y_b}(lag). For real samples the
  // unconjugated moment E{y_a(n+k) y_b(n)} equals the same table.
  const long long span = 2 * N - 1;
  std::vector<Complex> corr(static_cast<std::size_t>(q * q * span));
  auto at = [&](int a, int b, long long lag) -> const Complex& {
    return corr[static_cast<std::size_t>((a * q + b) * span + lag + N - 1)];
  };
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (long long lag = -(N - 1); lag <= N - 1; ++lag)
        corr[static_cast<std::size_t>((a * q + b) * span + lag + N - 1)] = ry(a, b, lag);
  const bool real = kind == SampleKind::Real;

  const int Q = map.Q();
  Eigen::MatrixXcd m1(Q, Q), m2(Q, Q);
  const double inv_n2 = 1.0 / (static_cast<double>(N) * static_cast<double>(N));
  for (int k = 0; k < Q; ++k) {
    const auto [a, b] = map.entries[static_cast<std::size_t>(k)];
    const auto& ha = bank[static_cast<std::size_t>(a)].coeffs;
    const auto& hb = bank[static_cast<std::size_t>(b)].coeffs;
    for (int kk = 0; kk < Q; ++kk) {
      const auto [c, d] = map.entries[static_cast<std::size_t>(kk)];
      const auto& hc = bank[static_cast<std::size_t>(c)].coeffs;
      const auto& hd = bank[static_cast<std::size_t>(d)].coeffs;
      Complex e_rr{}, e_rc{};  // E{R_ab R_cd}, E{R_ab R_cd^*}
      for (long long n = 0; n < N; ++n) {
        const long long lo_n = std::max(0LL, n - nh + 1);
        for (long long r = lo_n; r <= n; ++r) {
          for (long long p = lo_n; p <= n; ++p) {
            const double alpha = ha[static_cast<std::size_t>(n - r)] * hb[static_cast<std::size_t>(n - p)];
            if (alpha == 0.0) continue;
            for (long long u = 0; u < N; ++u) {
              const long long lo_u = std::max(0LL, u - nh + 1);
              for (long long s = lo_u; s <= u; ++s) {
                for (long long m = lo_u; m <= u; ++m) {
                  const double w = alpha * hc[static_cast<std::size_t>(u - s)] * hd[static_cast<std::size_t>(u - m)];
                  Complex f1 = at(a, b, r - p) * at(c, d, s - m) + at(a, d, r - m) * at(c, b, s - p);
                  Complex f2 = at(a, b, r - p) * at(d, c, m - s) + at(a, c, r - s) * at(d, b, m - p);
                  if (real) {
                    f1 += at(a, c, r - s) * at(b, d, p - m);
                    f2 += at(a, d, r - m) * at(b, c, p - s);
                  }
                  e_rr += w * f1;
                  e_rc += w * f2;
                }
              }
            }
          }
        }
      }
      m1(k, kk) = e_rr * inv_n2;
      m2(k, kk) = e_rc * inv_n2;
    }
  }

  Eigen::MatrixXd U(2 * Q, 2 * Q);
  for (int k = 0; k < Q; ++k) {
    for (int kk = 0; kk < Q; ++kk) {
      const Complex xy = m1(k, kk);
      const Complex xyc = m2(k, kk);
      U(k, kk) = 0.5 * (xy.real() + xyc.real());
      U(Q + k, Q + kk) = -0.5 * (xy.real() - xyc.real());
      U(k, Q + kk) = 0.5 * (xy.imag() - xyc.imag());
      U(Q + k, kk) = 0.5 * (xy.imag() + xyc.imag());
    }
  }
  return U;
}

Eigen::MatrixXd fourth_moment_oracle(const FilterBank& bank, const PairIndexMap& map, double sigma2,
                                     long long N, SampleKind kind) {
  return fourth_moment_oracle(bank, map, white_channel_correlation(sigma2), N, kind);
}

PhiDiagnostics phi_diagnostics(const PsiSystem& system) {
  if (!system.rank_ok) fail(ErrorCode::RankDeficient, "phi requires a full-rank system");
  const Eigen::MatrixXd gram = system.psi_breve.transpose() * system.psi_breve;
  const Eigen::MatrixXd inv = gram.llt().solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
  PhiDiagnostics d;
  d.phi = inv.diagonal();
  d.approx_error = (d.phi.array() * system.Q() - 1.0).abs();
  std::vector<double> errs(d.approx_error.data(), d.approx_error.data() + d.approx_error.size());
  std::sort(errs.begin(), errs.end());
  const std::size_t n = errs.size();
  d.median_error = n % 2 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
  return d;
}

CovarianceReport analyze_white(const Estimator& estimator, long long Nx, double sigma2, SampleKind kind) {
  const SamplingPattern& pat = estimator.pattern();
  CovarianceReport rep;
  rep.L = pat.L;
  rep.q = pat.q;
  rep.Q = pat.Q();
  rep.N = Nx / pat.L;
  rep.Nx = rep.N * pat.L;
  rep.Nh = estimator.bank().length;
  rep.D = estimator.bank().integer_delay;
  rep.sigma2 = sigma2;
  rep.W = pat.W;
  rep.kind = kind;
  rep.moments = compute_filter_moments(estimator.bank(), estimator.pair_map(), rep.N);
  rep.H1 = rep.moments.H[0];
  rep.U = build_U_white(rep.moments, sigma2, kind);
  rep.cov_exact = covariance_exact(estimator.system(), rep.U, rep.L, rep.W, rep.H1, sigma2);
  const std::vector<double> b = bias_white(rep.L, rep.W, sigma2, rep.H1);
  rep.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  const double approx = variance_approx(rep.L, rep.Q, rep.Nx, rep.Nh, rep.moments.G[0],
                                        rep.moments.Sigma[0], sigma2, rep.W);
  rep.var_approx = Eigen::VectorXd::Constant(rep.L, approx);
  return rep;
}

}  // namespace mcpsd
