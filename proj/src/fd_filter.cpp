#include "mcpsd/fd_filter.hpp"

#include <cmath>
#include <string>

#include "mcpsd/error.hpp"

namespace mcpsd {

double FdFilter::energy() const noexcept {
  double s = 0.0;
  for (double h : coeffs) s += h * h;
  return s;
}

FdFilter design_lagrange(double total_delay, int length) {
  if (length < 2) fail(ErrorCode::InvalidLength, "filter length must be >= 2");
  if (!(total_delay >= 0.0 && total_delay <= length - 1))
    fail(ErrorCode::DelayOutOfRange, "delay " + std::to_string(total_delay) +
                                         " outside [0, " + std::to_string(length - 1) + "]");
  FdFilter f;
  f.total_delay = total_delay;
  f.fractional = total_delay - std::floor(total_delay);
  f.coeffs.assign(static_cast<std::size_t>(length), 1.0);
  for (int n = 0; n < length; ++n) {
    double h = 1.0;
    for (int k = 0; k < length; ++k) {
      if (k == n) continue;
      h *= (total_delay - k) / static_cast<double>(n - k);
    }
    f.coeffs[static_cast<std::size_t>(n)] = h;
  }
  return f;
}

FilterBank build_bank(const SamplingPattern& pattern, int length, int integer_delay) {
  if (integer_delay < 0) fail(ErrorCode::DelayOutOfRange, "integer delay must be >= 0");
  const double max_delay = integer_delay + static_cast<double>(pattern.L - 1) / pattern.L;
  if (max_delay > length - 1)
    fail(ErrorCode::DelayOutOfRange, "D + (L-1)/L = " + std::to_string(max_delay) +
                                         " exceeds N_h - 1 = " + std::to_string(length - 1));
  FilterBank bank;
  bank.integer_delay = integer_delay;
  bank.length = length;
  bank.filters.reserve(pattern.offsets.size());
  for (int c : pattern.offsets)
    bank.filters.push_back(design_lagrange(integer_delay + static_cast<double>(c) / pattern.L, length));
  return bank;
}

double compute_H(const FdFilter& filter, long long N) {
  if (N <= filter.length())
    fail(ErrorCode::InvalidLength, "N=" + std::to_string(N) + " must exceed N_h=" +
                                       std::to_string(filter.length()));
  double s = 0.0;
  for (int r = 0; r < filter.length(); ++r) {
    const double h = filter.coeffs[static_cast<std::size_t>(r)];
    s += static_cast<double>(N - r) * h * h;
  }
  return s / static_cast<double>(N);
}

}  // namespace mcpsd
