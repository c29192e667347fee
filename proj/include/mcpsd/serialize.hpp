#pragma once

// JSON and CSV forms of patterns, filter banks, records, estimates, reports
// and signal models. CSV is UTF-8 with a header row and LF line endings.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mcpsd/analysis.hpp"
#include "mcpsd/estimator.hpp"
#include "mcpsd/fd_filter.hpp"
#include "mcpsd/sampling_design.hpp"
#include "mcpsd/signal_gen.hpp"

namespace mcpsd {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; NaN becomes the empty string so that
/// missing CSV cells stay blank.
std::string format_number(double value);

std::string_view to_string(SampleKind kind) noexcept;
/// Accepts "complex" and "real".
SampleKind sample_kind_from_string(std::string_view text);

/// {W, L, q, offsets, seed, conditionNumber}; the condition number is
/// written only when a system is supplied.
Json pattern_to_json(const SamplingPattern& pattern, const PsiSystem* system = nullptr);
SamplingPattern pattern_from_json(const Json& doc);

Json bank_to_json(const FilterBank& bank);

/// {"type": "white" | "filtered", ...}. For filtered models a missing "gain"
/// key leaves the default gain of 1.
Json model_to_json(const SignalModel& model);
SignalModel model_from_json(const Json& doc);

/// Real records get a single "sample" column, complex records "re,im".
void write_record_csv(std::ostream& out, const NyquistRecord& record, SampleKind kind);
NyquistRecord read_record_csv(std::istream& in, double W = kDefaultNyquistRate);

/// segment_index (1-based), f_low_hz, f_high_hz, p_hat.
void write_estimate_csv(std::ostream& out, const SegmentPowerEstimate& estimate, double W);

Json report_to_json(const CovarianceReport& report);
/// segment_index, bias, var_exact, var_approx.
void write_report_csv(std::ostream& out, const CovarianceReport& report);

Json parse_json(std::string_view text);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace mcpsd
