// Command-line front end. Every subcommand reads an optional JSON config;
// flags given on the command line override the matching config keys.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcpsd/mcpsd.h"

using Json = nlohmann::ordered_json;

namespace {

struct CliError : std::runtime_error {
  int status;
  CliError(int s, const std::string& m) : std::runtime_error(m), status(s) {}
};

void check(mcpsd_status s) {
  if (s != MCPSD_OK)
    throw CliError(s, std::string(mcpsd_status_string(s)) + ": " + mcpsd_last_error());
}

std::string take(char* s) {
  std::string out(s ? s : "");
  mcpsd_free_string(s);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(MCPSD_ERR_IO, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  try {
    return Json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw CliError(MCPSD_ERR_PARSE, path + ": " + e.what());
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(MCPSD_ERR_IO, "cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

template <class Handle, void (*Free)(Handle*)>
struct Deleter {
  void operator()(Handle* h) const { Free(h); }
};
using PatternPtr = std::unique_ptr<mcpsd_pattern, Deleter<mcpsd_pattern, mcpsd_pattern_free>>;
using EstimatorPtr = std::unique_ptr<mcpsd_estimator, Deleter<mcpsd_estimator, mcpsd_estimator_free>>;
using RecordPtr = std::unique_ptr<mcpsd_record, Deleter<mcpsd_record, mcpsd_record_free>>;
using ReportPtr = std::unique_ptr<mcpsd_report, Deleter<mcpsd_report, mcpsd_report_free>>;

// Options shared by the single-pattern subcommands.
struct PatternOptions {
  std::string config;
  std::string pattern_file;
  std::optional<int> L, q, max_tries, Nh, D;
  std::optional<std::uint64_t> seed;
  std::optional<double> W;
  std::vector<int> offsets;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    app->add_option("--pattern", pattern_file, "Pattern JSON file (as written by `design`)");
    app->add_option("--L", L, "Number of spectral segments (odd)");
    app->add_option("--q", q, "Number of channels");
    app->add_option("--seed", seed, "Pattern seed");
    app->add_option("--max-tries", max_tries, "Pattern draws before giving up");
    app->add_option("--W", W, "Nyquist rate in Hz");
    app->add_option("--offsets", offsets, "Explicit channel offsets");
    app->add_option("--Nh", Nh, "Fractional-delay filter length");
    app->add_option("--D", D, "Integer delay");
  }

  Json merged() const {
    Json j = load_config(config);
    if (!pattern_file.empty()) j["pattern"] = Json::parse(slurp(pattern_file));
    if (L) j["L"] = *L;
    if (q) j["q"] = *q;
    if (seed) j["seed"] = *seed;
    if (max_tries) j["maxTries"] = *max_tries;
    if (W) j["W"] = *W;
    if (!offsets.empty()) j["offsets"] = offsets;
    if (Nh) j["Nh"] = *Nh;
    if (D) j["D"] = *D;
    return j;
  }
};

PatternPtr pattern_from(const Json& j) {
  mcpsd_pattern* p = nullptr;
  const double W = j.value("W", 0.0);
  if (j.contains("pattern")) {
    check(mcpsd_pattern_from_json(j["pattern"].dump().c_str(), &p));
  } else if (j.contains("offsets")) {
    const auto offs = j["offsets"].get<std::vector<int>>();
    check(mcpsd_pattern_create(j.value("L", 0), offs.data(), static_cast<int>(offs.size()), W, &p));
  } else {
    if (!j.contains("L") || !j.contains("q"))
      throw CliError(MCPSD_ERR_INVALID_ARGUMENT, "give --pattern, --offsets, or --L and --q");
    check(mcpsd_pattern_generate(j["L"].get<int>(), j["q"].get<int>(), j.value("seed", std::uint64_t{1}),
                                 j.value("maxTries", 0), W, &p));
  }
  return PatternPtr(p);
}

EstimatorPtr estimator_from(const Json& j, const mcpsd_pattern* p) {
  mcpsd_estimator* e = nullptr;
  check(mcpsd_estimator_create(p, j.value("Nh", 0), j.value("D", -1), &e));
  return EstimatorPtr(e);
}

mcpsd_kind kind_from(const std::string& s) {
  if (s == "complex") return MCPSD_KIND_COMPLEX;
  if (s == "real") return MCPSD_KIND_REAL;
  throw CliError(MCPSD_ERR_INVALID_ARGUMENT, "kind must be complex or real");
}

// Options shared by the harness subcommands.
struct HarnessOptions {
  std::string config;
  std::optional<int> trials, workers, Nh, D, max_tries;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir, kind, model_file;
  std::optional<double> sigma2;
  std::vector<long long> nx;
  std::vector<std::string> grid;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    app->add_option("--trials", trials, "Monte Carlo trials per grid point");
    app->add_option("--workers", workers, "Worker threads (0 = all cores)");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--Nh", Nh, "Fractional-delay filter length");
    app->add_option("--D", D, "Integer delay");
    app->add_option("--max-tries", max_tries, "Pattern draws before a grid point is skipped");
    app->add_option("--output-dir", output_dir, "Directory for CSV and manifest output");
    app->add_option("--model", model_file, "Signal model JSON file");
    app->add_option("--kind", kind, "Sample kind: complex or real");
    app->add_option("--sigma2", sigma2, "Input white-noise power");
    app->add_option("--nx", nx, "Nyquist signal lengths");
    app->add_option("--grid", grid, "Grid points as LxQ, e.g. 51x12");
  }

  Json merged() const {
    Json j = load_config(config);
    if (trials) j["trials"] = *trials;
    if (workers) j["workers"] = *workers;
    if (seed) j["seed"] = *seed;
    if (Nh) j["Nh"] = *Nh;
    if (D) j["D"] = *D;
    if (max_tries) j["maxTries"] = *max_tries;
    if (output_dir) j["outputDir"] = *output_dir;
    if (model_file) j["model"] = Json::parse(slurp(*model_file));
    if (kind) j["model"]["kind"] = *kind;
    if (sigma2) j["model"]["sigma2"] = *sigma2;
    if (!nx.empty()) j["nx"] = nx;
    if (!grid.empty()) {
      Json g = Json::array();
      for (const auto& s : grid) {
        const auto x = s.find('x');
        if (x == std::string::npos) throw CliError(MCPSD_ERR_INVALID_ARGUMENT, "grid point must look like 51x12");
        g.push_back({std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))});
      }
      j["grid"] = std::move(g);
    }
    return j;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-coset segment power estimation and analysis"};
  app.set_version_flag("--version", std::string("mcpsd ") + mcpsd_version());
  app.require_subcommand(1);

  auto* design = app.add_subcommand("design", "Draw or load a sampling pattern and report system diagnostics");
  PatternOptions design_opts;
  std::string design_out;
  design_opts.attach(design);
  design->add_option("--out", design_out, "Output JSON file (default stdout)");

  auto* estimate = app.add_subcommand("estimate", "Estimate segment powers from one record");
  PatternOptions est_opts;
  std::string record_file, est_out, save_record, est_model_file, est_kind = "complex";
  std::optional<std::size_t> est_nx;
  std::uint64_t record_seed = 1;
  est_opts.attach(estimate);
  estimate->add_option("--record", record_file, "Record CSV (header `sample` or `re,im`)");
  estimate->add_option("--generate", est_nx, "Generate a record of this many Nyquist samples instead");
  estimate->add_option("--model", est_model_file, "Signal model JSON for --generate");
  estimate->add_option("--record-seed", record_seed, "Seed for --generate");
  estimate->add_option("--save-record", save_record, "Write the generated record to this CSV");
  estimate->add_option("--record-kind", est_kind, "Column layout for --save-record: complex or real");
  estimate->add_option("--out", est_out, "Output CSV (default stdout)");

  auto* analyze = app.add_subcommand("analyze", "Closed-form bias and covariance for white input");
  PatternOptions an_opts;
  std::optional<long long> an_nx;
  std::optional<double> an_sigma2;
  std::string an_kind = "complex", an_format = "json", an_out;
  an_opts.attach(analyze);
  analyze->add_option("--nx", an_nx, "Nyquist signal length");
  analyze->add_option("--sigma2", an_sigma2, "Input power (default W, i.e. unit PSD)");
  analyze->add_option("--kind", an_kind, "Sample kind: complex or real");
  analyze->add_option("--format", an_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  analyze->add_option("--out", an_out, "Output file (default stdout)");

  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo runs over a grid of (L, q) and lengths");
  HarnessOptions mc_opts;
  mc_opts.attach(mc);

  auto* figures = app.add_subcommand("figures", "Emit figure datasets as CSV");
  HarnessOptions fig_opts;
  std::string figure = "all";
  bool analytic_only = false;
  fig_opts.attach(figures);
  figures->add_option("--figure", figure, "fig1..fig6 or all");
  figures->add_flag("--analytic-only", analytic_only, "Skip the Monte Carlo columns");

  auto* validate = app.add_subcommand("validate", "Check grid feasibility, conditioning and rates");
  HarnessOptions val_opts;
  std::string val_out;
  val_opts.attach(validate);
  validate->add_option("--out", val_out, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*design) {
      const Json j = design_opts.merged();
      const PatternPtr p = pattern_from(j);
      char* out = nullptr;
      check(mcpsd_pattern_diagnostics(p.get(), &out));
      emit(take(out), design_out);
    } else if (*estimate) {
      const Json j = est_opts.merged();
      const PatternPtr p = pattern_from(j);
      const EstimatorPtr e = estimator_from(j, p.get());
      mcpsd_record* r = nullptr;
      if (est_nx) {
        std::string model;
        if (!est_model_file.empty())
          model = slurp(est_model_file);
        else if (j.contains("model"))
          model = j["model"].dump();
        check(mcpsd_record_generate(model.c_str(), *est_nx, record_seed, &r));
      } else {
        if (record_file.empty()) throw CliError(MCPSD_ERR_INVALID_ARGUMENT, "give --record or --generate");
        check(mcpsd_record_read_csv(record_file.c_str(), j.value("W", 0.0), &r));
      }
      const RecordPtr rec(r);
      if (!save_record.empty()) check(mcpsd_record_write_csv(rec.get(), save_record.c_str(), kind_from(est_kind)));
      char* out = nullptr;
      check(mcpsd_estimate_csv(e.get(), rec.get(), &out));
      emit(take(out), est_out);
    } else if (*analyze) {
      Json j = an_opts.merged();
      if (an_nx) j["nx"] = *an_nx;
      if (an_sigma2) j["sigma2"] = *an_sigma2;
      if (!j.contains("nx")) throw CliError(MCPSD_ERR_INVALID_ARGUMENT, "give --nx");
      const PatternPtr p = pattern_from(j);
      const EstimatorPtr e = estimator_from(j, p.get());
      const double W = j.contains("pattern") ? j["pattern"].value("W", 1000.0) : j.value("W", 1000.0);
      mcpsd_report* rep = nullptr;
      check(mcpsd_analyze_white(e.get(), j["nx"].get<long long>(), j.value("sigma2", W), kind_from(an_kind), &rep));
      const ReportPtr report(rep);
      char* out = nullptr;
      check(an_format == "csv" ? mcpsd_report_to_csv(report.get(), &out) : mcpsd_report_to_json(report.get(), &out));
      emit(take(out), an_out);
    } else if (*mc) {
      char* manifest = nullptr;
      check(mcpsd_run_montecarlo(mc_opts.merged().dump().c_str(), &manifest));
      emit(take(manifest), "");
    } else if (*figures) {
      const Json j = fig_opts.merged();
      std::vector<std::string> names;
      if (figure == "all")
        names = {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"};
      else
        names = {figure};
      Json all = Json::array();
      for (const auto& name : names) {
        char* manifest = nullptr;
        check(mcpsd_emit_figure(name.c_str(), j.dump().c_str(), analytic_only ? 0 : 1, &manifest));
        all.push_back(Json::parse(take(manifest)));
      }
      emit(all.size() == 1 ? all[0].dump(2) : all.dump(2), "");
    } else if (*validate) {
      char* csv = nullptr;
      check(mcpsd_validate(val_opts.merged().dump().c_str(), &csv));
      emit(take(csv), val_out);
    }
  } catch (const CliError& e) {
    std::cerr << "mcpsd: " << e.what() << '\n';
    return e.status;
  } catch (const std::exception& e) {
    std::cerr << "mcpsd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
