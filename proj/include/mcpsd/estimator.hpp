#pragma once

// Correlogram for multi-coset data: fractional-delay alignment, zero-lag
// correlation matrix, measurement vector, least-squares segment powers.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mcpsd/fd_filter.hpp"
#include "mcpsd/sampling_design.hpp"
#include "mcpsd/signal_gen.hpp"

namespace mcpsd {

struct CorrelationMatrixEstimate {
  Eigen::MatrixXcd rz;  // q x q, Hermitian
  long long N = 0;
};

struct SegmentPowerEstimate {
  Eigen::VectorXd p;        // L, average power per segment
  Eigen::VectorXd v;        // L
  Eigen::VectorXd u_breve;  // 2Q
};

/// out[n] = sum_{r = n - N_h + 1}^{n} h(n - r) y(r) W_D(r), n in [0, N).
/// The window zeroes samples before the record, so the first N_h - 1 outputs
/// are partial sums. Throws InvalidLength unless N > N_h and y has N samples.
std::vector<Complex> delayed_channel(std::span<const Complex> y, const FdFilter& filter, long long N);

CorrelationMatrixEstimate estimate_Rz(const ChannelData& channels, const FilterBank& bank, long long N);

/// Real parts of the mapped R_z entries followed by their imaginary parts.
Eigen::VectorXd form_u_breve(const CorrelationMatrixEstimate& rz, const PairIndexMap& map);

SegmentPowerEstimate estimate_powers(const ChannelData& channels, const FilterBank& bank,
                                     const PsiSystem& system, const PairIndexMap& map,
                                     long long N, double W);

/// Everything the pipeline needs for a fixed pattern, built once and reused
/// across records.
class Estimator {
 public:
  Estimator(SamplingPattern pattern, int filter_length = kDefaultFilterLength,
            int integer_delay = kDefaultIntegerDelay);

  /// N = floor(N_x / L); leftover Nyquist samples are ignored.
  SegmentPowerEstimate estimate(const NyquistRecord& record) const;

  const SamplingPattern& pattern() const noexcept { return pattern_; }
  const PairIndexMap& pair_map() const noexcept { return map_; }
  const PsiSystem& system() const noexcept { return system_; }
  const FilterBank& bank() const noexcept { return bank_; }

 private:
  SamplingPattern pattern_;
  PairIndexMap map_;
  PsiSystem system_;
  FilterBank bank_;
};

}  // namespace mcpsd
