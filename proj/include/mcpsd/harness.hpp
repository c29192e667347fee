#pragma once

// Monte Carlo runs, analytic grids and figure datasets driven by one JSON
// config. Outputs depend only on the spec and master seed.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcpsd/serialize.hpp"
#include "mcpsd/signal_gen.hpp"

namespace mcpsd {

struct GridPoint {
  int L = 0;
  int q = 0;
};

struct ExperimentSpec {
  SignalModel model = WhiteModel{};
  bool auto_gain = true;  // filtered model: calibrate_gain per L unless a gain was given
  std::vector<GridPoint> grid;
  std::vector<long long> nx;
  int trials = 500;
  std::uint64_t seed = 1;
  int Nh = kDefaultFilterLength;
  int D = kDefaultIntegerDelay;
  int max_tries = kDefaultMaxTries;
  int workers = 1;  // 0 picks the hardware concurrency
  std::filesystem::path output_dir = "out";
};

/// Throws InvalidArgument / InvalidDimensions on a malformed spec.
void validate_spec(const ExperimentSpec& spec);

/// Overlays config keys (model, grid, nx, trials, seed, Nh, D, maxTries,
/// workers, outputDir) onto `base`.
ExperimentSpec spec_from_json(const Json& doc, ExperimentSpec base = {});
Json spec_to_json(const ExperimentSpec& spec);

using LogSink = std::function<void(const std::string&)>;

struct TrialSummary {
  int L = 0;
  int q = 0;
  long long Nx = 0;
  long long N = 0;
  int trials = 0;
  bool skipped = false;
  std::string note;

  SamplingPattern pattern;
  int attempts = 0;
  double condition_number = 0.0;
  double gain = 1.0;

  Eigen::VectorXd truth;  // true_segment_power
  Eigen::VectorXd mean;
  Eigen::VectorXd var;     // unbiased sample variance
  Eigen::VectorXd se;      // standard error of the mean
  Eigen::VectorXd var_se;  // standard error of the sample variance

  // White-input closed forms at the model's sigma2 (the matched-power
  // reference for filtered input). NaN when N <= 2 N_h.
  Eigen::VectorXd bias_exact;
  Eigen::VectorXd var_exact;
  double var_approx = 0.0;
  double H1 = 0.0;
  // E{p_hat} from expected_Rz for the actual model.
  Eigen::VectorXd expected_mean;

  /// p - mean, the Monte Carlo shortfall.
  Eigen::VectorXd bias_mc() const { return truth - mean; }
};

/// One summary per (grid point, N_x), grid-major. Infeasible grid points are
/// logged and returned with skipped = true. trials = 0 skips the simulation
/// and fills only the analytic columns.
std::vector<TrialSummary> run_montecarlo(const ExperimentSpec& spec, const LogSink& log = {});

/// One row per summary and segment.
void write_summary_csv(std::ostream& out, const std::vector<TrialSummary>& summaries);

enum class Figure { Fig1 = 1, Fig2, Fig3, Fig4, Fig5, Fig6 };

Figure figure_from_string(std::string_view name);
std::string figure_name(Figure figure);

/// Default grids and trial counts of each figure.
ExperimentSpec figure_defaults(Figure figure);

struct FigureCurve {
  std::string name;  // file stem
  std::vector<double> x, analytic_exact, analytic_approx, montecarlo, montecarlo_se;
};

/// Computes the curves of one figure. With montecarlo = false only analytic
/// columns are filled.
std::vector<FigureCurve> figure_curves(Figure figure, const ExperimentSpec& spec, bool montecarlo,
                                       const LogSink& log = {});

/// x, analytic_exact, analytic_approx, montecarlo, montecarlo_se.
std::string curve_csv(const FigureCurve& curve);

/// Writes one CSV per curve plus a manifest into spec.output_dir and returns
/// the manifest.
Json emit_figure_data(Figure figure, const ExperimentSpec& spec, bool montecarlo, const LogSink& log = {});

struct ValidationRow {
  int L = 0;
  int q = 0;
  int Q = 0;
  bool dims_ok = false;
  bool rank_ok = false;
  int attempts = 0;
  double condition_number = 0.0;
  double rate_hz = 0.0;
  long long Nx = 0;  // 0 when the spec has no lengths
  long long N = 0;
  bool length_ok = false;
  std::string status;
};

/// Report-only: never throws for infeasible points.
std::vector<ValidationRow> validate(const ExperimentSpec& spec);
void write_validation_csv(std::ostream& out, const std::vector<ValidationRow>& rows);

/// Spec, seeds, patterns and filter metadata of a run; no timestamps.
Json run_manifest(const std::string& command, const ExperimentSpec& spec,
                  const std::vector<TrialSummary>& summaries, const std::vector<std::string>& files);

}  // namespace mcpsd
