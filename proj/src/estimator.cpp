#include "mcpsd/estimator.hpp"

#include <string>

#include "mcpsd/error.hpp"

namespace mcpsd {

std::vector<Complex> delayed_channel(std::span<const Complex> y, const FdFilter& filter, long long N) {
  const int nh = filter.length();
  if (N <= nh)
    fail(ErrorCode::InvalidLength, "N=" + std::to_string(N) + " must exceed N_h=" + std::to_string(nh));
  if (static_cast<long long>(y.size()) < N)
    fail(ErrorCode::InvalidLength, "channel stream shorter than N");
  const auto n_out = static_cast<std::size_t>(N);
  std::vector<Complex> out(n_out);
  const double* h = filter.coeffs.data();
  for (std::size_t n = 0; n < n_out; ++n) {
    Complex acc{};
    const std::size_t kmax = std::min<std::size_t>(static_cast<std::size_t>(nh - 1), n);
    for (std::size_t k = 0; k <= kmax; ++k) acc += h[k] * y[n - k];
    out[n] = acc;
  }
  return out;
}

CorrelationMatrixEstimate estimate_Rz(const ChannelData& channels, const FilterBank& bank, long long N) {
  const std::size_t q = channels.streams.size();
  if (bank.size() != q) fail(ErrorCode::InvalidDimensions, "filter bank and channel count differ");
  std::vector<std::vector<Complex>> d;
  d.reserve(q);
  for (std::size_t a = 0; a < q; ++a) d.push_back(delayed_channel(channels.streams[a], bank[a], N));

  CorrelationMatrixEstimate est;
  est.N = N;
  est.rz.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
  const double inv_n = 1.0 / static_cast<double>(N);
  const auto n = static_cast<std::size_t>(N);
  for (std::size_t a = 0; a < q; ++a) {
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag += std::norm(d[a][i]);
    est.rz(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = Complex(diag * inv_n, 0.0);
    for (std::size_t b = a + 1; b < q; ++b) {
      Complex acc{};
      for (std::size_t i = 0; i < n; ++i) acc += d[a][i] * std::conj(d[b][i]);
      acc *= inv_n;
      est.rz(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
      est.rz(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = std::conj(acc);
    }
  }
  return est;
}

Eigen::VectorXd form_u_breve(const CorrelationMatrixEstimate& rz, const PairIndexMap& map) {
  const int Q = map.Q();
  Eigen::VectorXd u(2 * Q);
  for (int k = 0; k < Q; ++k) {
    const auto [a, b] = map.entries[static_cast<std::size_t>(k)];
    if (a >= rz.rz.rows() || b >= rz.rz.cols())
      fail(ErrorCode::InvalidDimensions, "pair map does not match R_z dimension");
    const Complex r = rz.rz(a, b);
    u(k) = r.real();
    u(Q + k) = a == b ? 0.0 : r.imag();
  }
  return u;
}

SegmentPowerEstimate estimate_powers(const ChannelData& channels, const FilterBank& bank,
                                     const PsiSystem& system, const PairIndexMap& map,
                                     long long N, double W) {
  SegmentPowerEstimate out;
  out.u_breve = form_u_breve(estimate_Rz(channels, bank, N), map);
  out.v = solve_ls(system, out.u_breve);
  out.p = out.v * (static_cast<double>(system.L()) / W);
  return out;
}

Estimator::Estimator(SamplingPattern pattern, int filter_length, int integer_delay)
    : pattern_(std::move(pattern)),
      map_(build_pair_map(pattern_.q)),
      system_(build_psi(pattern_, map_)),
      bank_(build_bank(pattern_, filter_length, integer_delay)) {
  if (!system_.rank_ok)
    fail(ErrorCode::RankDeficient, "sampling pattern yields a rank-deficient system");
}

SegmentPowerEstimate Estimator::estimate(const NyquistRecord& record) const {
  const ChannelData ch = multicoset_sample(record, pattern_);
  return estimate_powers(ch, bank_, system_, map_, ch.N, pattern_.W);
}

}  // namespace mcpsd
