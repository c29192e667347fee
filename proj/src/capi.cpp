#include "mcpsd/mcpsd.h"

#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "mcpsd/analysis.hpp"
#include "mcpsd/error.hpp"
#include "mcpsd/estimator.hpp"
#include "mcpsd/harness.hpp"
#include "mcpsd/serialize.hpp"

struct mcpsd_pattern {
  mcpsd::SamplingPattern pattern;
};

struct mcpsd_estimator {
  std::optional<mcpsd::Estimator> est;
};

struct mcpsd_record {
  mcpsd::NyquistRecord record;
};

struct mcpsd_report {
  mcpsd::CovarianceReport report;
};

namespace {

thread_local std::string g_last_error;

mcpsd_status status_of(mcpsd::ErrorCode code) { return static_cast<mcpsd_status>(static_cast<int>(code)); }

template <class F>
mcpsd_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return MCPSD_OK;
  } catch (const mcpsd::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MCPSD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MCPSD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MCPSD_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) mcpsd::fail(mcpsd::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void copy_vector(const Eigen::VectorXd& v, double* out, size_t capacity) {
  need(out, "output buffer");
  if (capacity < static_cast<size_t>(v.size()))
    mcpsd::fail(mcpsd::ErrorCode::InvalidArgument, "output buffer holds " + std::to_string(capacity) +
                                                       " values, need " + std::to_string(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
}

mcpsd::Json config_doc(const char* config_json) {
  if (!config_json || !*config_json) return mcpsd::Json::object();
  return mcpsd::parse_json(config_json);
}

}  // namespace

extern "C" {

const char* mcpsd_version(void) { return MCPSD_VERSION; }

const char* mcpsd_status_string(mcpsd_status status) {
  switch (status) {
    case MCPSD_OK:
      return "Ok";
    case MCPSD_ERR_INTERNAL:
      return "Internal";
    default:
      if (status >= 1 && status <= 10) return mcpsd::to_string(static_cast<mcpsd::ErrorCode>(status)).data();
      return "Unknown";
  }
}

const char* mcpsd_last_error(void) { return g_last_error.c_str(); }

void mcpsd_free_string(char* s) { std::free(s); }

mcpsd_status mcpsd_pattern_generate(int L, int q, uint64_t seed, int max_tries, double W, mcpsd_pattern** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto p = mcpsd::generate_pattern(L, q, seed, max_tries > 0 ? max_tries : mcpsd::kDefaultMaxTries,
                                     W > 0 ? W : mcpsd::kDefaultNyquistRate);
    *out = new mcpsd_pattern{std::move(p)};
  });
}

mcpsd_status mcpsd_pattern_create(int L, const int* offsets, int q, double W, mcpsd_pattern** out) {
  return guarded([&] {
    need(out, "out");
    need(offsets, "offsets");
    *out = nullptr;
    if (q < 1) mcpsd::fail(mcpsd::ErrorCode::InvalidDimensions, "q must be >= 1");
    auto p = mcpsd::make_pattern(L, std::vector<int>(offsets, offsets + q), W > 0 ? W : mcpsd::kDefaultNyquistRate);
    *out = new mcpsd_pattern{std::move(p)};
  });
}

mcpsd_status mcpsd_pattern_from_json(const char* json, mcpsd_pattern** out) {
  return guarded([&] {
    need(out, "out");
    need(json, "json");
    *out = nullptr;
    *out = new mcpsd_pattern{mcpsd::pattern_from_json(mcpsd::parse_json(json))};
  });
}

void mcpsd_pattern_free(mcpsd_pattern* p) { delete p; }

int mcpsd_pattern_L(const mcpsd_pattern* p) { return p ? p->pattern.L : 0; }

int mcpsd_pattern_q(const mcpsd_pattern* p) { return p ? p->pattern.q : 0; }

mcpsd_status mcpsd_pattern_offsets(const mcpsd_pattern* p, int* out, size_t capacity) {
  return guarded([&] {
    need(p, "pattern");
    need(out, "out");
    const size_t n = std::min(capacity, p->pattern.offsets.size());
    for (size_t i = 0; i < n; ++i) out[i] = p->pattern.offsets[i];
  });
}

mcpsd_status mcpsd_pattern_to_json(const mcpsd_pattern* p, char** out) {
  return guarded([&] {
    need(p, "pattern");
    need(out, "out");
    const auto sys = mcpsd::build_psi(p->pattern, mcpsd::build_pair_map(p->pattern.q));
    *out = dup_string(mcpsd::pattern_to_json(p->pattern, &sys).dump(2));
  });
}

mcpsd_status mcpsd_pattern_diagnostics(const mcpsd_pattern* p, char** out) {
  return guarded([&] {
    need(p, "pattern");
    need(out, "out");
    const auto& pat = p->pattern;
    const auto sys = mcpsd::build_psi(pat, mcpsd::build_pair_map(pat.q));
    mcpsd::Json j = mcpsd::pattern_to_json(pat, &sys);
    j["Q"] = pat.Q();
    j["rateHz"] = pat.average_rate();
    j["rank"] = sys.rank;
    j["rankOk"] = sys.rank_ok;
    j["sigmaMax"] = sys.singular_values.size() ? sys.singular_values(0) : 0.0;
    j["sigmaMin"] = sys.singular_values.size() ? sys.singular_values(sys.singular_values.size() - 1) : 0.0;
    if (sys.rank_ok) {
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(pat.L, pat.L);
      j["identityResidual"] = (sys.recovery * sys.psi_breve - eye).cwiseAbs().maxCoeff();
      j["column1MaxError"] = (sys.recovery.col(0).array() - 1.0 / pat.L).abs().maxCoeff();
      const auto phi = mcpsd::phi_diagnostics(sys);
      j["phiMedianError"] = phi.median_error;
      j["phi"] = std::vector<double>(phi.phi.data(), phi.phi.data() + phi.phi.size());
    }
    *out = dup_string(j.dump(2));
  });
}

mcpsd_status mcpsd_record_generate(const char* model_json, size_t nx, uint64_t seed, mcpsd_record** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    mcpsd::SignalModel model = mcpsd::WhiteModel{};
    if (model_json && *model_json) model = mcpsd::model_from_json(mcpsd::parse_json(model_json));
    *out = new mcpsd_record{mcpsd::generate(model, nx, seed)};
  });
}

mcpsd_status mcpsd_record_from_samples(const double* re, const double* im, size_t n, double W, mcpsd_record** out) {
  return guarded([&] {
    need(out, "out");
    need(re, "re");
    *out = nullptr;
    mcpsd::NyquistRecord rec;
    rec.W = W > 0 ? W : mcpsd::kDefaultNyquistRate;
    rec.samples.resize(n);
    for (size_t i = 0; i < n; ++i) rec.samples[i] = {re[i], im ? im[i] : 0.0};
    *out = new mcpsd_record{std::move(rec)};
  });
}

mcpsd_status mcpsd_record_read_csv(const char* path, double W, mcpsd_record** out) {
  return guarded([&] {
    need(out, "out");
    need(path, "path");
    *out = nullptr;
    std::ifstream in(path);
    if (!in) mcpsd::fail(mcpsd::ErrorCode::Io, std::string("cannot open ") + path);
    *out = new mcpsd_record{mcpsd::read_record_csv(in, W > 0 ? W : mcpsd::kDefaultNyquistRate)};
  });
}

mcpsd_status mcpsd_record_write_csv(const mcpsd_record* r, const char* path, mcpsd_kind kind) {
  return guarded([&] {
    need(r, "record");
    need(path, "path");
    std::ostringstream ss;
    mcpsd::write_record_csv(ss, r->record,
                            kind == MCPSD_KIND_REAL ? mcpsd::SampleKind::Real : mcpsd::SampleKind::CircularComplex);
    mcpsd::write_text_file(path, ss.str());
  });
}

size_t mcpsd_record_size(const mcpsd_record* r) { return r ? r->record.size() : 0; }

void mcpsd_record_free(mcpsd_record* r) { delete r; }

mcpsd_status mcpsd_estimator_create(const mcpsd_pattern* p, int Nh, int D, mcpsd_estimator** out) {
  return guarded([&] {
    need(out, "out");
    need(p, "pattern");
    *out = nullptr;
    auto* e = new mcpsd_estimator;
    try {
      e->est.emplace(p->pattern, Nh > 0 ? Nh : mcpsd::kDefaultFilterLength, D >= 0 ? D : mcpsd::kDefaultIntegerDelay);
    } catch (...) {
      delete e;
      throw;
    }
    *out = e;
  });
}

void mcpsd_estimator_free(mcpsd_estimator* e) { delete e; }

mcpsd_status mcpsd_estimator_bank_json(const mcpsd_estimator* e, char** out) {
  return guarded([&] {
    need(e, "estimator");
    need(out, "out");
    *out = dup_string(mcpsd::bank_to_json(e->est->bank()).dump(2));
  });
}

mcpsd_status mcpsd_estimate(const mcpsd_estimator* e, const mcpsd_record* r, double* p_out, size_t capacity) {
  return guarded([&] {
    need(e, "estimator");
    need(r, "record");
    copy_vector(e->est->estimate(r->record).p, p_out, capacity);
  });
}

mcpsd_status mcpsd_estimate_csv(const mcpsd_estimator* e, const mcpsd_record* r, char** out) {
  return guarded([&] {
    need(e, "estimator");
    need(r, "record");
    need(out, "out");
    std::ostringstream ss;
    mcpsd::write_estimate_csv(ss, e->est->estimate(r->record), e->est->pattern().W);
    *out = dup_string(ss.str());
  });
}

mcpsd_status mcpsd_analyze_white(const mcpsd_estimator* e, long long nx, double sigma2, mcpsd_kind kind,
                                 mcpsd_report** out) {
  return guarded([&] {
    need(e, "estimator");
    need(out, "out");
    *out = nullptr;
    if (!(sigma2 >= 0.0)) mcpsd::fail(mcpsd::ErrorCode::InvalidArgument, "sigma2 must be >= 0");
    auto rep = mcpsd::analyze_white(*e->est, nx, sigma2,
                                    kind == MCPSD_KIND_REAL ? mcpsd::SampleKind::Real : mcpsd::SampleKind::CircularComplex);
    *out = new mcpsd_report{std::move(rep)};
  });
}

void mcpsd_report_free(mcpsd_report* r) { delete r; }

mcpsd_status mcpsd_report_bias(const mcpsd_report* r, double* out, size_t capacity) {
  return guarded([&] {
    need(r, "report");
    copy_vector(r->report.bias, out, capacity);
  });
}

mcpsd_status mcpsd_report_var_exact(const mcpsd_report* r, double* out, size_t capacity) {
  return guarded([&] {
    need(r, "report");
    copy_vector(r->report.cov_exact.diagonal(), out, capacity);
  });
}

mcpsd_status mcpsd_report_var_approx(const mcpsd_report* r, double* out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    *out = r->report.var_approx(0);
  });
}

mcpsd_status mcpsd_report_covariance(const mcpsd_report* r, double* out, size_t capacity) {
  return guarded([&] {
    need(r, "report");
    const Eigen::MatrixXd& c = r->report.cov_exact;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = c;
    copy_vector(Eigen::Map<const Eigen::VectorXd>(rm.data(), rm.size()), out, capacity);
  });
}

mcpsd_status mcpsd_report_to_json(const mcpsd_report* r, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    *out = dup_string(mcpsd::report_to_json(r->report).dump(2));
  });
}

mcpsd_status mcpsd_report_to_csv(const mcpsd_report* r, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    std::ostringstream ss;
    mcpsd::write_report_csv(ss, r->report);
    *out = dup_string(ss.str());
  });
}

mcpsd_status mcpsd_run_montecarlo(const char* config_json, char** manifest_out) {
  return guarded([&] {
    need(manifest_out, "manifest_out");
    const mcpsd::ExperimentSpec spec = mcpsd::spec_from_json(config_doc(config_json));
    const auto summaries = mcpsd::run_montecarlo(spec);
    std::ostringstream ss;
    mcpsd::write_summary_csv(ss, summaries);
    mcpsd::write_text_file(spec.output_dir / "montecarlo.csv", ss.str());
    const mcpsd::Json manifest = mcpsd::run_manifest("montecarlo", spec, summaries, {"montecarlo.csv"});
    mcpsd::write_text_file(spec.output_dir / "montecarlo_manifest.json", manifest.dump(2) + "\n");
    *manifest_out = dup_string(manifest.dump(2));
  });
}

mcpsd_status mcpsd_emit_figure(const char* figure, const char* config_json, int montecarlo, char** manifest_out) {
  return guarded([&] {
    need(figure, "figure");
    need(manifest_out, "manifest_out");
    const mcpsd::Figure f = mcpsd::figure_from_string(figure);
    const mcpsd::ExperimentSpec spec = mcpsd::spec_from_json(config_doc(config_json), mcpsd::figure_defaults(f));
    *manifest_out = dup_string(mcpsd::emit_figure_data(f, spec, montecarlo != 0).dump(2));
  });
}

mcpsd_status mcpsd_validate(const char* config_json, char** csv_out) {
  return guarded([&] {
    need(csv_out, "csv_out");
    const mcpsd::ExperimentSpec spec = mcpsd::spec_from_json(config_doc(config_json));
    std::ostringstream ss;
    mcpsd::write_validation_csv(ss, mcpsd::validate(spec));
    *csv_out = dup_string(ss.str());
  });
}

}  // extern "C"
