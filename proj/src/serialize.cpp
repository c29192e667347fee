#include "mcpsd/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mcpsd/error.hpp"

namespace mcpsd {

namespace {

template <class T>
T require(const Json& doc, const char* key) {
  if (!doc.contains(key)) fail(ErrorCode::Parse, std::string("missing key \"") + key + "\"");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad value for \"") + key + "\": " + e.what());
  }
}

template <class T>
T optional(const Json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  return require<T>(doc, key);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": not a number: \"" + std::string(s) + "\"");
  return v;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return {};
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string_view to_string(SampleKind kind) noexcept {
  return kind == SampleKind::Real ? "real" : "complex";
}

SampleKind sample_kind_from_string(std::string_view text) {
  if (text == "complex") return SampleKind::CircularComplex;
  if (text == "real") return SampleKind::Real;
  fail(ErrorCode::Parse, "sample kind must be \"complex\" or \"real\", got \"" + std::string(text) + "\"");
}

Json pattern_to_json(const SamplingPattern& pattern, const PsiSystem* system) {
  Json j;
  j["W"] = pattern.W;
  j["L"] = pattern.L;
  j["q"] = pattern.q;
  j["offsets"] = pattern.offsets;
  j["seed"] = pattern.seed;
  if (system) j["conditionNumber"] = system->condition_number;
  return j;
}

SamplingPattern pattern_from_json(const Json& doc) {
  const int L = require<int>(doc, "L");
  auto offsets = require<std::vector<int>>(doc, "offsets");
  if (doc.contains("q") && require<int>(doc, "q") != static_cast<int>(offsets.size()))
    fail(ErrorCode::Parse, "q does not match the number of offsets");
  SamplingPattern p = make_pattern(L, std::move(offsets), optional<double>(doc, "W", kDefaultNyquistRate));
  p.seed = optional<std::uint64_t>(doc, "seed", 0);
  return p;
}

Json bank_to_json(const FilterBank& bank) {
  Json j;
  j["N_h"] = bank.length;
  j["D"] = bank.integer_delay;
  Json filters = Json::array();
  for (const auto& f : bank.filters)
    filters.push_back({{"totalDelay", f.total_delay}, {"fractional", f.fractional}, {"coeffs", f.coeffs}});
  j["filters"] = std::move(filters);
  return j;
}

Json model_to_json(const SignalModel& model) {
  Json j;
  if (const auto* w = std::get_if<WhiteModel>(&model)) {
    j["type"] = "white";
    j["sigma2"] = w->sigma2;
    j["W"] = w->W;
    j["kind"] = to_string(w->kind);
  } else {
    const auto& f = std::get<FilteredGaussianModel>(model);
    j["type"] = "filtered";
    j["lowCut"] = f.low_cut;
    j["highCut"] = f.high_cut;
    j["gain"] = f.gain;
    j["taps"] = f.taps;
    j["design"] = "hamming-windowed sinc bandpass";
    j["sigma2"] = f.sigma2;
    j["W"] = f.W;
    j["kind"] = to_string(f.kind);
  }
  return j;
}

SignalModel model_from_json(const Json& doc) {
  if (!doc.is_object()) fail(ErrorCode::Parse, "model must be a JSON object");
  const std::string type = optional<std::string>(doc, "type", "white");
  const SampleKind kind = sample_kind_from_string(optional<std::string>(doc, "kind", "complex"));
  SignalModel out;
  if (type == "white") {
    WhiteModel m;
    m.W = optional<double>(doc, "W", m.W);
    m.sigma2 = optional<double>(doc, "sigma2", m.W);
    m.kind = kind;
    out = m;
  } else if (type == "filtered") {
    FilteredGaussianModel m;
    m.W = optional<double>(doc, "W", m.W);
    m.sigma2 = optional<double>(doc, "sigma2", m.W);
    m.low_cut = optional<double>(doc, "lowCut", m.W / 10);
    m.high_cut = optional<double>(doc, "highCut", m.W / 5);
    m.gain = optional<double>(doc, "gain", 1.0);
    m.taps = optional<int>(doc, "taps", m.taps);
    m.kind = kind;
    out = m;
  } else {
    fail(ErrorCode::Parse, "model type must be \"white\" or \"filtered\", got \"" + type + "\"");
  }
  validate_model(out);
  return out;
}

void write_record_csv(std::ostream& out, const NyquistRecord& record, SampleKind kind) {
  if (kind == SampleKind::Real) {
    out << "sample\n";
    for (const auto& s : record.samples) out << format_number(s.real()) << '\n';
  } else {
    out << "re,im\n";
    for (const auto& s : record.samples) out << format_number(s.real()) << ',' << format_number(s.imag()) << '\n';
  }
}

NyquistRecord read_record_csv(std::istream& in, double W) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "empty record file");
  const std::string_view header = trim(line);
  int columns = 0;
  if (header == "sample")
    columns = 1;
  else if (header == "re,im")
    columns = 2;
  else
    fail(ErrorCode::Parse, "record header must be \"sample\" or \"re,im\"");
  NyquistRecord rec;
  rec.W = W;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view s = trim(line);
    if (s.empty()) continue;
    if (columns == 1) {
      rec.samples.emplace_back(parse_double(s, lineno), 0.0);
    } else {
      const auto comma = s.find(',');
      if (comma == std::string_view::npos) fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected re,im");
      rec.samples.emplace_back(parse_double(s.substr(0, comma), lineno), parse_double(s.substr(comma + 1), lineno));
    }
  }
  return rec;
}

void write_estimate_csv(std::ostream& out, const SegmentPowerEstimate& estimate, double W) {
  const int L = static_cast<int>(estimate.p.size());
  out << "segment_index,f_low_hz,f_high_hz,p_hat\n";
  for (int l = 0; l < L; ++l) {
    const SegmentBand b = segment_band(l, L, W);
    out << l + 1 << ',' << format_number(b.f_low) << ',' << format_number(b.f_high) << ','
        << format_number(estimate.p(l)) << '\n';
  }
}

Json report_to_json(const CovarianceReport& r) {
  Json j;
  j["meta"] = {{"L", r.L},   {"q", r.q},           {"Q", r.Q},   {"N", r.N},
               {"N_x", r.Nx}, {"N_h", r.Nh},        {"D", r.D},   {"sigma2", r.sigma2},
               {"W", r.W},   {"kind", to_string(r.kind)}};
  j["H1"] = r.H1;
  j["moments"] = {{"H", r.moments.H}, {"G", r.moments.G}, {"Sigma", r.moments.Sigma}};
  j["U"] = std::vector<double>(r.U.diag.data(), r.U.diag.data() + r.U.diag.size());
  j["bias"] = std::vector<double>(r.bias.data(), r.bias.data() + r.bias.size());
  const Eigen::VectorXd d = r.cov_exact.diagonal();
  j["varExact"] = std::vector<double>(d.data(), d.data() + d.size());
  j["varApprox"] = std::vector<double>(r.var_approx.data(), r.var_approx.data() + r.var_approx.size());
  Json cov = Json::array();
  for (Eigen::Index i = 0; i < r.cov_exact.rows(); ++i) {
    const Eigen::VectorXd row = r.cov_exact.row(i).transpose();
    cov.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  j["covExact"] = std::move(cov);
  return j;
}

void write_report_csv(std::ostream& out, const CovarianceReport& r) {
  out << "segment_index,bias,var_exact,var_approx\n";
  for (int l = 0; l < r.L; ++l)
    out << l + 1 << ',' << format_number(r.bias(l)) << ',' << format_number(r.cov_exact(l, l)) << ','
        << format_number(r.var_approx(l)) << '\n';
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::Parse, e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace mcpsd
