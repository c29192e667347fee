#pragma once

// Multi-coset sampling patterns and the linear system linking per-segment
// powers to zero-lag correlations of the delay-aligned channels.

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mcpsd {

using Complex = std::complex<double>;

inline constexpr int kDefaultMaxTries = 100;
inline constexpr double kDefaultNyquistRate = 1000.0;

/// Number of equations Q = q(q-1)/2 + 1 for q channels.
constexpr int equation_count(int q) noexcept { return q * (q - 1) / 2 + 1; }

/// q channel offsets {c_i} over an L-segment partition of the Nyquist band.
/// Construct through make_pattern or generate_pattern; both validate.
struct SamplingPattern {
  int L = 0;
  int q = 0;
  std::vector<int> offsets;
  double W = kDefaultNyquistRate;
  std::uint64_t seed = 0;  // 0 when offsets were given explicitly

  int Q() const noexcept { return equation_count(q); }
  double average_rate() const noexcept { return static_cast<double>(q) / L * W; }
};

/// Validates and wraps explicit offsets. Throws InvalidDimensions when L is
/// even, q is outside [1, L), 2Q < L, or offsets repeat / fall outside [0, L-1].
SamplingPattern make_pattern(int L, std::vector<int> offsets,
                             double W = kDefaultNyquistRate);

/// Checks the structural preconditions for (L, q) without drawing offsets.
bool dimensions_feasible(int L, int q) noexcept;

/// k <-> (a, b) correspondence, 0-based channel indices. Entry 0 is (0, 0);
/// the rest walk the strict upper triangle row by row.
struct PairIndexMap {
  std::vector<std::pair<int, int>> entries;

  int Q() const noexcept { return static_cast<int>(entries.size()); }
};

PairIndexMap build_pair_map(int q);

struct PsiSystem {
  Eigen::MatrixXcd psi;        // Q x L
  Eigen::MatrixXd psi_breve;   // 2Q x L, real part stacked over imaginary part
  Eigen::MatrixXd recovery;    // L x 2Q, A = (psi_breve^T psi_breve)^{-1} psi_breve^T
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  Eigen::VectorXd singular_values;
  int rank = 0;
  bool rank_ok = false;
  double condition_number = 0.0;

  int L() const noexcept { return static_cast<int>(psi.cols()); }
  int Q() const noexcept { return static_cast<int>(psi.rows()); }
};

/// m_l for the 0-based segment index l: m = l + 1 - (L + 1) / 2.
constexpr double segment_shift(int l, int L) noexcept {
  return static_cast<double>(l + 1) - 0.5 * (L + 1);
}

PsiSystem build_psi(const SamplingPattern& pattern, const PairIndexMap& map);

/// Least-squares recovery v = A u_breve via column-pivoted QR.
/// Throws RankDeficient when the system is not full column rank and
/// InvalidDimensions when u_breve does not have 2Q entries.
Eigen::VectorXd solve_ls(const PsiSystem& system, const Eigen::VectorXd& u_breve);

/// Draws patterns until psi_breve has rank L. Channel 1 sits at offset 0, the
/// other q-1 offsets are distinct draws from [1, L-1], sorted ascending.
/// Throws InvalidDimensions on bad (L, q) and FeasibilityExhausted after
/// max_tries rank-deficient draws.
SamplingPattern generate_pattern(int L, int q, std::uint64_t seed,
                                 int max_tries = kDefaultMaxTries,
                                 double W = kDefaultNyquistRate);

/// generate_pattern plus the number of draws it took.
struct PatternDraw {
  SamplingPattern pattern;
  int attempts = 0;
};
PatternDraw generate_pattern_counted(int L, int q, std::uint64_t seed,
                                     int max_tries = kDefaultMaxTries,
                                     double W = kDefaultNyquistRate);

}  // namespace mcpsd
