#include "mcpsd/signal_gen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mcpsd/error.hpp"
#include "mcpsd/rng.hpp"

namespace mcpsd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// r(k) = sum_n h(n) h(n + k) for k >= 0.
std::vector<double> tap_autocorrelation(const std::vector<double>& h) {
  const std::size_t n = h.size();
  std::vector<double> r(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i + k < n; ++i) r[k] += h[i] * h[i + k];
  return r;
}

// Integral over [lo, hi] (cycles/sample) of |H(nu)|^2 given the tap autocorrelation.
double band_energy(const std::vector<double>& r, double lo, double hi) {
  double s = r[0] * (hi - lo);
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
    s += 2.0 * r[k] * (std::sin(w * hi) - std::sin(w * lo)) / w;
  }
  return s;
}

}  // namespace

void validate_model(const SignalModel& model) {
  std::visit(Overloaded{
                 [](const WhiteModel& m) {
                   if (!(m.sigma2 >= 0.0)) fail(ErrorCode::InvalidArgument, "sigma2 must be >= 0");
                   if (!(m.W > 0.0)) fail(ErrorCode::InvalidArgument, "W must be positive");
                 },
                 [](const FilteredGaussianModel& m) {
                   if (!(m.sigma2 >= 0.0)) fail(ErrorCode::InvalidArgument, "sigma2 must be >= 0");
                   if (!(m.W > 0.0)) fail(ErrorCode::InvalidArgument, "W must be positive");
                   if (!(m.low_cut >= 0.0 && m.low_cut < m.high_cut && m.high_cut <= m.W / 2))
                     fail(ErrorCode::InvalidArgument, "need 0 <= low_cut < high_cut <= W/2");
                   if (m.taps < 3 || m.taps % 2 == 0)
                     fail(ErrorCode::InvalidArgument, "bandpass taps must be odd and >= 3");
                   if (!(m.gain >= 0.0)) fail(ErrorCode::InvalidArgument, "gain must be >= 0");
                 },
             },
             model);
}

double nyquist_rate(const SignalModel& model) noexcept {
  return std::visit([](const auto& m) { return m.W; }, model);
}

double input_sigma2(const SignalModel& model) noexcept {
  return std::visit([](const auto& m) { return m.sigma2; }, model);
}

SampleKind sample_kind(const SignalModel& model) noexcept {
  return std::visit([](const auto& m) { return m.kind; }, model);
}

NyquistRecord gen_white(std::size_t nx, double sigma2, double W, std::uint64_t seed, SampleKind kind) {
  if (!(sigma2 >= 0.0)) fail(ErrorCode::InvalidArgument, "sigma2 must be >= 0");
  NyquistRecord rec;
  rec.W = W;
  rec.seed = seed;
  rec.samples.assign(nx, Complex{});
  if (sigma2 == 0.0) return rec;
  Engine rng(seed);
  if (kind == SampleKind::Real) {
    std::normal_distribution<double> dist(0.0, std::sqrt(sigma2));
    for (auto& s : rec.samples) s = Complex(dist(rng), 0.0);
  } else {
    std::normal_distribution<double> dist(0.0, std::sqrt(sigma2 / 2));
    for (auto& s : rec.samples) {
      const double re = dist(rng);
      const double im = dist(rng);
      s = Complex(re, im);
    }
  }
  return rec;
}

std::vector<double> design_bandpass(const FilteredGaussianModel& model) {
  validate_model(model);
  const int taps = model.taps;
  const double center = 0.5 * (taps - 1);
  const double lo = model.low_cut / model.W;
  const double hi = model.high_cut / model.W;
  std::vector<double> h(static_cast<std::size_t>(taps));
  for (int n = 0; n < taps; ++n) {
    const double t = n - center;
    const double ideal = 2.0 * hi * sinc(2.0 * hi * t) - 2.0 * lo * sinc(2.0 * lo * t);
    const double window = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (taps - 1));
    h[static_cast<std::size_t>(n)] = ideal * window;
  }
  return h;
}

NyquistRecord gen_filtered(std::size_t nx, const FilteredGaussianModel& model, std::uint64_t seed) {
  const std::vector<double> h = design_bandpass(model);
  const NyquistRecord white = gen_white(nx, model.sigma2, model.W, seed, model.kind);
  NyquistRecord rec;
  rec.W = model.W;
  rec.seed = seed;
  rec.samples.assign(nx, Complex{});
  if (model.gain == 0.0) return rec;
  const std::size_t taps = h.size();
  for (std::size_t n = 0; n < nx; ++n) {
    Complex acc{};
    const std::size_t kmax = std::min(taps - 1, n);
    for (std::size_t k = 0; k <= kmax; ++k) acc += h[k] * white.samples[n - k];
    rec.samples[n] = model.gain * acc;
  }
  return rec;
}

NyquistRecord generate(const SignalModel& model, std::size_t nx, std::uint64_t seed) {
  validate_model(model);
  return std::visit(Overloaded{
                        [&](const WhiteModel& m) { return gen_white(nx, m.sigma2, m.W, seed, m.kind); },
                        [&](const FilteredGaussianModel& m) { return gen_filtered(nx, m, seed); },
                    },
                    model);
}

SegmentBand segment_band(int l, int L, double W) noexcept {
  const double width = W / L;
  return {W / 2 - width * (l + 1), W / 2 - width * l};
}

std::vector<double> true_segment_power(const SignalModel& model, int L) {
  validate_model(model);
  if (L < 1 || L % 2 == 0) fail(ErrorCode::InvalidDimensions, "L must be a positive odd integer");
  return std::visit(
      Overloaded{
          [&](const WhiteModel& m) { return std::vector<double>(static_cast<std::size_t>(L), m.sigma2 / m.W); },
          [&](const FilteredGaussianModel& m) {
            const std::vector<double> r = tap_autocorrelation(design_bandpass(m));
            std::vector<double> p(static_cast<std::size_t>(L));
            const double scale = static_cast<double>(L) / m.W * m.sigma2 * m.gain * m.gain;
            for (int l = 0; l < L; ++l) {
              const SegmentBand band = segment_band(l, L, m.W);
              p[static_cast<std::size_t>(l)] = scale * band_energy(r, band.f_low / m.W, band.f_high / m.W);
            }
            return p;
          },
      },
      model);
}

double calibrate_gain(const FilteredGaussianModel& model, int L) {
  FilteredGaussianModel unit = model;
  unit.gain = 1.0;
  const std::vector<double> p = true_segment_power(unit, L);
  double mean_sq = 0.0;
  for (double v : p) mean_sq += v * v;
  mean_sq /= static_cast<double>(p.size());
  if (!(mean_sq > 0.0)) fail(ErrorCode::InvalidArgument, "filter passes no power");
  const double ref = model.sigma2 / model.W;
  return std::pow(ref * ref / mean_sq, 0.25);
}

double nyquist_autocorrelation(const SignalModel& model, long long lag) {
  return std::visit(Overloaded{
                        [&](const WhiteModel& m) { return lag == 0 ? m.sigma2 : 0.0; },
                        [&](const FilteredGaussianModel& m) {
                          const std::vector<double> h = design_bandpass(m);
                          const long long k = lag < 0 ? -lag : lag;
                          if (k >= static_cast<long long>(h.size())) return 0.0;
                          double s = 0.0;
                          for (std::size_t i = 0; i + static_cast<std::size_t>(k) < h.size(); ++i)
                            s += h[i] * h[i + static_cast<std::size_t>(k)];
                          return m.sigma2 * m.gain * m.gain * s;
                        },
                    },
                    model);
}

double total_power(const SignalModel& model) { return nyquist_autocorrelation(model, 0); }

ChannelCorrelation white_channel_correlation(double sigma2) {
  return [sigma2](int a, int b, long long lag) {
    return (a == b && lag == 0) ? Complex(sigma2, 0.0) : Complex{};
  };
}

ChannelCorrelation channel_correlation(const SignalModel& model, const SamplingPattern& pattern) {
  validate_model(model);
  if (std::holds_alternative<WhiteModel>(model)) return white_channel_correlation(input_sigma2(model));
  const auto& m = std::get<FilteredGaussianModel>(model);
  const std::vector<double> h = design_bandpass(m);
  const std::vector<double> r = tap_autocorrelation(h);
  const double scale = m.sigma2 * m.gain * m.gain;
  return [r, scale, offsets = pattern.offsets, L = pattern.L](int a, int b, long long lag) {
    long long k = lag * L + offsets[static_cast<std::size_t>(a)] - offsets[static_cast<std::size_t>(b)];
    if (k < 0) k = -k;
    if (k >= static_cast<long long>(r.size())) return Complex{};
    return Complex(scale * r[static_cast<std::size_t>(k)], 0.0);
  };
}

ChannelData multicoset_sample(const NyquistRecord& record, const SamplingPattern& pattern) {
  const auto L = static_cast<std::size_t>(pattern.L);
  const std::size_t N = record.size() / L;
  if (N == 0)
    fail(ErrorCode::RecordTooShort, "record of " + std::to_string(record.size()) +
                                        " samples is shorter than L=" + std::to_string(L));
  ChannelData ch;
  ch.N = static_cast<long long>(N);
  ch.streams.reserve(pattern.offsets.size());
  for (int c : pattern.offsets) {
    std::vector<Complex> y(N);
    for (std::size_t n = 0; n < N; ++n) y[n] = record.samples[n * L + static_cast<std::size_t>(c)];
    ch.streams.push_back(std::move(y));
  }
  return ch;
}

std::vector<int> passband_segments(const FilteredGaussianModel& model, int L) {
  std::vector<int> out;
  for (int l = 0; l < L; ++l) {
    const SegmentBand b = segment_band(l, L, model.W);
    const bool positive = b.f_low >= model.low_cut && b.f_high <= model.high_cut;
    const bool negative = b.f_low >= -model.high_cut && b.f_high <= -model.low_cut;
    if (positive || negative) out.push_back(l);
  }
  return out;
}

}  // namespace mcpsd
