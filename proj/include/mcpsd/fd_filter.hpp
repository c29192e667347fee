#pragma once

#include <span>
#include <vector>

#include "mcpsd/sampling_design.hpp"

namespace mcpsd {

inline constexpr int kDefaultFilterLength = 25;
inline constexpr int kDefaultIntegerDelay = 12;

/// Causal FIR fractional-delay filter.
struct FdFilter {
  std::vector<double> coeffs;
  double total_delay = 0.0;  // samples at the channel rate W/L
  double fractional = 0.0;   // in [0, 1)

  int length() const noexcept { return static_cast<int>(coeffs.size()); }
  std::span<const double> taps() const noexcept { return coeffs; }
  double energy() const noexcept;  // sum of squared taps
};

/// Lagrange interpolator h(n) = prod_{k != n} (d - k) / (n - k), n, k in [0, N_h).
/// Throws InvalidLength for N_h < 2 and DelayOutOfRange for d outside [0, N_h - 1].
FdFilter design_lagrange(double total_delay, int length);

/// One filter per channel; filter a delays by D + c_a / L.
struct FilterBank {
  std::vector<FdFilter> filters;
  int integer_delay = kDefaultIntegerDelay;
  int length = kDefaultFilterLength;

  const FdFilter& operator[](std::size_t a) const { return filters[a]; }
  std::size_t size() const noexcept { return filters.size(); }
};

FilterBank build_bank(const SamplingPattern& pattern, int length = kDefaultFilterLength,
                      int integer_delay = kDefaultIntegerDelay);

/// H = (1/N) sum_r (N - r) h(r)^2. Throws InvalidLength unless N > N_h.
double compute_H(const FdFilter& filter, long long N);

}  // namespace mcpsd
