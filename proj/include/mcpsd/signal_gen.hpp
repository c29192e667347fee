#pragma once

// Nyquist-rate Gaussian test processes, their per-segment powers, and
// multi-coset subsampling.

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "mcpsd/sampling_design.hpp"

namespace mcpsd {

/// Circular complex samples have E|x|^2 = sigma^2 split evenly between the
/// real and imaginary parts. Real samples have zero imaginary part.
enum class SampleKind { CircularComplex, Real };

inline constexpr int kDefaultBandpassTaps = 201;

struct WhiteModel {
  double sigma2 = kDefaultNyquistRate;  // PSD sigma^2 / W = 1 at the default W
  double W = kDefaultNyquistRate;
  SampleKind kind = SampleKind::CircularComplex;
};

/// White Gaussian input of power sigma2 through a Hamming-windowed sinc
/// bandpass with passbands +/-[low_cut, high_cut] Hz, scaled by gain.
struct FilteredGaussianModel {
  double low_cut = kDefaultNyquistRate / 10;
  double high_cut = kDefaultNyquistRate / 5;
  double gain = 1.0;
  int taps = kDefaultBandpassTaps;
  double sigma2 = kDefaultNyquistRate;
  double W = kDefaultNyquistRate;
  SampleKind kind = SampleKind::CircularComplex;
};

using SignalModel = std::variant<WhiteModel, FilteredGaussianModel>;

void validate_model(const SignalModel& model);
double nyquist_rate(const SignalModel& model) noexcept;
double input_sigma2(const SignalModel& model) noexcept;
SampleKind sample_kind(const SignalModel& model) noexcept;

struct NyquistRecord {
  std::vector<Complex> samples;
  double W = kDefaultNyquistRate;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return samples.size(); }
};

struct ChannelData {
  std::vector<std::vector<Complex>> streams;  // q streams of N samples
  long long N = 0;
};

NyquistRecord gen_white(std::size_t nx, double sigma2, double W, std::uint64_t seed,
                        SampleKind kind = SampleKind::CircularComplex);

/// Unscaled (gain 1) linear-phase bandpass taps for the model.
std::vector<double> design_bandpass(const FilteredGaussianModel& model);

/// White record convolved with gain * bandpass; the startup transient is kept.
NyquistRecord gen_filtered(std::size_t nx, const FilteredGaussianModel& model, std::uint64_t seed);

NyquistRecord generate(const SignalModel& model, std::size_t nx, std::uint64_t seed);

/// Average power per segment, p_l = (L/W) * integral of the PSD over segment l,
/// where segment l (0-based) spans [W/2 - (W/L)(l+1), W/2 - (W/L) l).
std::vector<double> true_segment_power(const SignalModel& model, int L);

/// Gain making (1/L) sum_l p_l^2 equal (sigma2/W)^2, the white reference.
double calibrate_gain(const FilteredGaussianModel& model, int L);

/// r_x(k) = E{x(m+k) x*(m)} at the Nyquist rate (stationary part).
double nyquist_autocorrelation(const SignalModel& model, long long lag);

/// Total process power, the integral of the PSD over [-W/2, W/2].
double total_power(const SignalModel& model);

/// Cross-correlation r_{y_a y_b}(k) = E{y_a(n+k) y_b*(n)} for channel indices a, b.
using ChannelCorrelation = std::function<Complex(int a, int b, long long lag)>;

ChannelCorrelation white_channel_correlation(double sigma2);
ChannelCorrelation channel_correlation(const SignalModel& model, const SamplingPattern& pattern);

/// y_i(n) = x[n L + c_i] for n < N = floor(N_x / L). Throws RecordTooShort if N = 0.
ChannelData multicoset_sample(const NyquistRecord& record, const SamplingPattern& pattern);

/// Segment-wise band edges in Hz, 0-based segment index.
struct SegmentBand {
  double f_low = 0.0;
  double f_high = 0.0;
};
SegmentBand segment_band(int l, int L, double W) noexcept;

/// Segments lying wholly inside the model passband (either frequency sign).
std::vector<int> passband_segments(const FilteredGaussianModel& model, int L);

}  // namespace mcpsd
