#pragma once

// Finite-length bias and covariance of the multi-coset correlogram.
//
// Closed forms assume white Gaussian input. For circular complex samples the
// fourth moments reduce to two pairings; real samples add a third pairing,
// which doubles the fluctuation part of U(1,1) and of every real-part row and
// zeroes the imaginary-part rows.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mcpsd/estimator.hpp"
#include "mcpsd/fd_filter.hpp"
#include "mcpsd/sampling_design.hpp"
#include "mcpsd/signal_gen.hpp"

namespace mcpsd {

/// E{R_z} with the finite-window correction:
/// sum_{r,p} h_a(r) h_b(p) r_{y_a y_b}(p - r) (1 - max(r, p) / N).
Eigen::MatrixXcd expected_Rz(const FilterBank& bank, const ChannelCorrelation& ry, long long N);

/// E{p_hat} = (L/W) A E{u_breve} for a given expected correlation matrix.
Eigen::VectorXd expected_powers(const PsiSystem& system, const PairIndexMap& map,
                                const Eigen::MatrixXcd& expected_rz, double W);

/// Expected shortfall p - E{p_hat} = (1 - H_1) sigma^2 / W in every segment.
std::vector<double> bias_white(int L, double W, double sigma2, double H1);

struct FilterMomentSet {
  std::vector<double> H;      // per channel
  std::vector<double> G;      // per pair k in [0, Q)
  std::vector<double> Sigma;  // per pair k in [0, Q)
  long long N = 0;
  int Nh = 0;

  /// Interior regime count N - 2 N_h + 2.
  double interior_count() const noexcept { return static_cast<double>(N - 2LL * Nh + 2); }
};

/// S_k(n) for the channel pair (a, b) from the convolution closed forms:
/// left edge n < N_h - 1 uses the truncated filter h W_n, the interior uses
/// the full self-convolution, the right edge n > N - N_h truncates the sum
/// at g = N - n + N_h - 2.
double moment_term(std::span<const double> ha, std::span<const double> hb, long long n, long long N);

/// Throws InvalidLength unless N > 2 N_h.
FilterMomentSet compute_filter_moments(const FilterBank& bank, const PairIndexMap& map, long long N);

struct UMatrix {
  Eigen::VectorXd diag;  // 2Q; off-diagonal entries are zero for white input
};

UMatrix build_U_white(const FilterMomentSet& moments, double sigma2,
                      SampleKind kind = SampleKind::CircularComplex);

/// C = (L/W)^2 A diag(U) A^T - E{p} E{p}^T with E{p} = H_1 sigma^2 / W.
/// Throws RankDeficient if the system is not full rank.
Eigen::MatrixXd covariance_exact(const PsiSystem& system, const UMatrix& U, int L, double W,
                                 double H1, double sigma2);

/// Diagonal approximation with phi_l ~ 1/Q and G_k, Sigma_k ~ G_1, Sigma_1
/// (circular case):
/// sigma^4 / (2 W^2 N_x^2) (L^3/Q + L) ((N_x - 2 N_h L + 2L) G_1 + L Sigma_1).
double variance_approx(int L, int Q, long long Nx, int Nh, double G1, double Sigma1,
                       double sigma2, double W);

inline constexpr long long kOracleMaxN = 128;
inline constexpr int kOracleMaxFilterLength = 9;
inline constexpr int kOracleMaxChannels = 3;

/// Full 2Q x 2Q U = E{u_breve u_breve^T} from the literal sextuple sums of
/// the Gaussian fourth moments, assembled through the Re/Im product identities.
/// Throws InstanceTooLarge beyond N = 128, N_h = 9, q = 3.
Eigen::MatrixXd fourth_moment_oracle(const FilterBank& bank, const PairIndexMap& map,
                                     const ChannelCorrelation& ry, long long N,
                                     SampleKind kind = SampleKind::CircularComplex);
Eigen::MatrixXd fourth_moment_oracle(const FilterBank& bank, const PairIndexMap& map, double sigma2,
                                     long long N, SampleKind kind = SampleKind::CircularComplex);

struct PhiDiagnostics {
  Eigen::VectorXd phi;           // [(psi_breve^T psi_breve)^{-1}]_{l,l}
  Eigen::VectorXd approx_error;  // |phi_l Q - 1|
  double median_error = 0.0;
};

PhiDiagnostics phi_diagnostics(const PsiSystem& system);

struct CovarianceReport {
  Eigen::VectorXd bias;       // L
  Eigen::MatrixXd cov_exact;  // L x L
  Eigen::VectorXd var_approx; // L, identical entries
  UMatrix U;
  FilterMomentSet moments;
  double H1 = 0.0;
  int L = 0;
  int q = 0;
  int Q = 0;
  long long N = 0;
  long long Nx = 0;
  int Nh = 0;
  int D = 0;
  double sigma2 = 0.0;
  double W = 0.0;
  SampleKind kind = SampleKind::CircularComplex;
};

/// Closed-form report for white input of power sigma2 and N_x Nyquist samples.
CovarianceReport analyze_white(const Estimator& estimator, long long Nx, double sigma2,
                               SampleKind kind = SampleKind::CircularComplex);

}  // namespace mcpsd
