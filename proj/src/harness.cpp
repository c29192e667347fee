#include "mcpsd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "mcpsd/error.hpp"
#include "mcpsd/rng.hpp"

namespace mcpsd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kPatternStream = 0x7061747465726eULL;

void emit(const LogSink& log, const std::string& msg) {
  if (log)
    log(msg);
  else
    std::cerr << msg << '\n';
}

long long json_length(const Json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 1.0 && std::floor(d) == d && d < 9e15) return static_cast<long long>(d);
  }
  fail(ErrorCode::Parse, "signal lengths must be positive integers");
}

GridPoint json_grid_point(const Json& v) {
  if (v.is_array() && v.size() == 2) return {v[0].get<int>(), v[1].get<int>()};
  if (v.is_object() && v.contains("L") && v.contains("q")) return {v["L"].get<int>(), v["q"].get<int>()};
  fail(ErrorCode::Parse, "grid entries must be [L, q] or {\"L\": .., \"q\": ..}");
}

SignalModel point_model(const ExperimentSpec& spec, int L) {
  if (auto* f = std::get_if<FilteredGaussianModel>(&spec.model); f && spec.auto_gain) {
    FilteredGaussianModel m = *f;
    m.gain = calibrate_gain(m, L);
    return m;
  }
  return spec.model;
}

double model_gain(const SignalModel& m) {
  if (const auto* f = std::get_if<FilteredGaussianModel>(&m)) return f->gain;
  return 1.0;
}

Eigen::VectorXd nan_vector(int n) { return Eigen::VectorXd::Constant(n, kNaN); }

void fill_analytic(TrialSummary& s, const Estimator& est, const SignalModel& model, long long nx,
                   const LogSink& log) {
  const int L = s.L;
  s.bias_exact = nan_vector(L);
  s.var_exact = nan_vector(L);
  s.var_approx = kNaN;
  s.H1 = kNaN;
  s.expected_mean = nan_vector(L);
  if (s.N <= est.bank().length) return;
  const Eigen::MatrixXcd rz = expected_Rz(est.bank(), channel_correlation(model, est.pattern()), s.N);
  s.expected_mean = expected_powers(est.system(), est.pair_map(), rz, est.pattern().W);
  if (s.N <= 2LL * est.bank().length) {
    emit(log, "note: (L,q)=(" + std::to_string(s.L) + "," + std::to_string(s.q) + ") N_x=" +
                  std::to_string(nx) + ": N <= 2 N_h, closed forms left empty");
    return;
  }
  const CovarianceReport rep = analyze_white(est, nx, input_sigma2(model), sample_kind(model));
  s.bias_exact = rep.bias;
  s.var_exact = rep.cov_exact.diagonal();
  s.var_approx = rep.var_approx(0);
  s.H1 = rep.H1;
}

void run_trials(TrialSummary& s, const Estimator& est, const SignalModel& model, const ExperimentSpec& spec,
                std::uint64_t grid_index, std::uint64_t nx_index) {
  const int T = spec.trials;
  const int L = s.L;
  Eigen::MatrixXd draws(T, L);
  const auto nx = static_cast<std::size_t>(s.Nx);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int t = next++; t < T; t = next++) {
      try {
        const std::uint64_t seed = derive_seed(spec.seed, {grid_index, nx_index, static_cast<std::uint64_t>(t)});
        draws.row(t) = est.estimate(generate(model, nx, seed)).p.transpose();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = T;
      }
    }
  };
  int workers = spec.workers > 0 ? spec.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, T);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Aggregated in trial order, so the schedule cannot change the result.
  s.mean = Eigen::VectorXd::Zero(L);
  s.var = Eigen::VectorXd::Zero(L);
  s.se = Eigen::VectorXd::Zero(L);
  s.var_se = Eigen::VectorXd::Zero(L);
  for (int l = 0; l < L; ++l) {
    double sum = 0.0;
    for (int t = 0; t < T; ++t) sum += draws(t, l);
    const double m = sum / T;
    double m2 = 0.0, m4 = 0.0;
    for (int t = 0; t < T; ++t) {
      const double d = draws(t, l) - m;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    s.mean(l) = m;
    if (T > 1) {
      s.var(l) = m2 / (T - 1);
      s.se(l) = std::sqrt(s.var(l) / T);
      const double c2 = m2 / T;
      s.var_se(l) = std::sqrt(std::max(0.0, m4 / T - c2 * c2) / T);
    }
  }
}

struct FigureRun {
  std::vector<FigureCurve> curves;
  std::vector<TrialSummary> summaries;
};

double passband_average(const Eigen::VectorXd& v, const std::vector<int>& segs) {
  if (segs.empty()) return kNaN;
  double s = 0.0;
  for (int l : segs) s += v(l);
  return s / static_cast<double>(segs.size());
}

WhiteModel white_reference(const SignalModel& model) {
  WhiteModel w;
  w.sigma2 = input_sigma2(model);
  w.W = nyquist_rate(model);
  w.kind = sample_kind(model);
  return w;
}

FilteredGaussianModel filtered_of(const ExperimentSpec& spec) {
  if (const auto* f = std::get_if<FilteredGaussianModel>(&spec.model)) return *f;
  FilteredGaussianModel f;
  f.sigma2 = input_sigma2(spec.model);
  f.W = nyquist_rate(spec.model);
  f.low_cut = f.W / 10;
  f.high_cut = f.W / 5;
  f.kind = sample_kind(spec.model);
  return f;
}

std::string point_tag(int L, int q) { return "L" + std::to_string(L) + "_q" + std::to_string(q); }

void push_point(FigureCurve& c, double x, double exact, double approx, double mc, double se) {
  c.x.push_back(x);
  c.analytic_exact.push_back(exact);
  c.analytic_approx.push_back(approx);
  c.montecarlo.push_back(mc);
  c.montecarlo_se.push_back(se);
}

// Variance curves of the filtered figures: the white curve reads segment 1,
// the filtered curve averages over segments wholly inside the passband.
void filtered_pair(const TrialSummary& white, const TrialSummary& filt, const FilteredGaussianModel& fm,
                   double x, bool montecarlo, FigureCurve& wc, FigureCurve& fc) {
  if (white.skipped || filt.skipped) return;
  const double exact = white.var_exact(0);
  const double approx = white.var_approx;
  push_point(wc, x, exact, approx, montecarlo ? white.var(0) : kNaN, montecarlo ? white.var_se(0) : kNaN);
  const std::vector<int> pb = passband_segments(fm, filt.L);
  double mc = kNaN, se = kNaN;
  if (montecarlo && !pb.empty()) {
    mc = passband_average(filt.var, pb);
    // Segments treated as independent for the standard error.
    se = passband_average(filt.var_se, pb) / std::sqrt(static_cast<double>(pb.size()));
  }
  push_point(fc, x, exact, approx, mc, se);
}

FigureRun compute_figure(Figure figure, const ExperimentSpec& spec_in, bool montecarlo, const LogSink& log) {
  ExperimentSpec spec = spec_in;
  if (!montecarlo) spec.trials = 0;
  validate_spec(spec);
  FigureRun run;
  const std::string fig = figure_name(figure);

  switch (figure) {
    case Figure::Fig1:
    case Figure::Fig4: {
      run.summaries = run_montecarlo(spec, log);
      for (const auto& s : run.summaries) {
        if (s.skipped) continue;
        const std::string name = fig + "_" + point_tag(s.L, s.q);
        auto it = std::find_if(run.curves.begin(), run.curves.end(), [&](const auto& c) { return c.name == name; });
        if (it == run.curves.end()) {
          run.curves.push_back({name, {}, {}, {}, {}, {}});
          it = run.curves.end() - 1;
        }
        if (figure == Figure::Fig1)
          push_point(*it, static_cast<double>(s.Nx), s.bias_exact(0), kNaN,
                     montecarlo ? s.bias_mc()(0) : kNaN, montecarlo ? s.se(0) : kNaN);
        else
          push_point(*it, static_cast<double>(s.Nx), s.var_exact(0), s.var_approx,
                     montecarlo ? s.var(0) : kNaN, montecarlo ? s.var_se(0) : kNaN);
      }
      break;
    }
    case Figure::Fig2:
    case Figure::Fig3: {
      run.summaries = run_montecarlo(spec, log);
      for (const auto& s : run.summaries) {
        if (s.skipped) continue;
        std::string name = fig + (figure == Figure::Fig2 ? "_L" + std::to_string(s.L) : "_q" + std::to_string(s.q));
        if (spec.nx.size() > 1) name += "_Nx" + std::to_string(s.Nx);
        auto it = std::find_if(run.curves.begin(), run.curves.end(), [&](const auto& c) { return c.name == name; });
        if (it == run.curves.end()) {
          run.curves.push_back({name, {}, {}, {}, {}, {}});
          it = run.curves.end() - 1;
        }
        push_point(*it, figure == Figure::Fig2 ? s.q : s.L, s.var_exact(0), s.var_approx,
                   montecarlo ? s.var(0) : kNaN, montecarlo ? s.var_se(0) : kNaN);
      }
      break;
    }
    case Figure::Fig5:
    case Figure::Fig6: {
      const FilteredGaussianModel fm = filtered_of(spec);
      ExperimentSpec ws = spec;
      ws.model = white_reference(fm);
      ExperimentSpec fs = spec;
      fs.model = fm;
      const auto white = run_montecarlo(ws, log);
      const auto filt = run_montecarlo(fs, log);
      FigureCurve wc{fig + "_white", {}, {}, {}, {}, {}};
      FigureCurve fc{fig + "_filtered", {}, {}, {}, {}, {}};
      for (std::size_t i = 0; i < white.size(); ++i) {
        const double x = figure == Figure::Fig5 ? white[i].L : static_cast<double>(white[i].Nx);
        FilteredGaussianModel pm = fm;
        pm.gain = filt[i].gain;
        filtered_pair(white[i], filt[i], pm, x, montecarlo, wc, fc);
      }
      run.curves = {wc, fc};
      run.summaries = white;
      run.summaries.insert(run.summaries.end(), filt.begin(), filt.end());
      break;
    }
  }
  return run;
}

}  // namespace

void validate_spec(const ExperimentSpec& spec) {
  validate_model(spec.model);
  if (spec.grid.empty()) fail(ErrorCode::InvalidArgument, "grid must contain at least one (L, q) pair");
  for (const auto& g : spec.grid)
    if (g.L < 1 || g.L % 2 == 0 || g.q < 1 || g.q >= g.L)
      fail(ErrorCode::InvalidDimensions,
           "grid point (" + std::to_string(g.L) + "," + std::to_string(g.q) + ") needs odd L and 1 <= q < L");
  if (spec.nx.empty()) fail(ErrorCode::InvalidArgument, "at least one N_x is required");
  for (long long n : spec.nx)
    if (n < 1) fail(ErrorCode::InvalidArgument, "N_x values must be positive");
  if (spec.trials < 0) fail(ErrorCode::InvalidArgument, "trials must be >= 0");
  if (spec.Nh < 2) fail(ErrorCode::InvalidLength, "N_h must be >= 2");
  if (spec.D < 0 || spec.D + 1 > spec.Nh - 1)
    fail(ErrorCode::DelayOutOfRange, "need 0 <= D and D + 1 <= N_h - 1");
  if (spec.max_tries < 1) fail(ErrorCode::InvalidArgument, "maxTries must be >= 1");
  if (spec.workers < 0) fail(ErrorCode::InvalidArgument, "workers must be >= 0");
}

ExperimentSpec spec_from_json(const Json& doc, ExperimentSpec base) {
  if (!doc.is_object()) fail(ErrorCode::Parse, "config must be a JSON object");
  try {
    if (doc.contains("model")) {
      base.model = model_from_json(doc["model"]);
      base.auto_gain = !doc["model"].contains("gain") || doc["model"]["gain"].is_null();
    }
    if (doc.contains("grid")) {
      base.grid.clear();
      for (const auto& g : doc["grid"]) base.grid.push_back(json_grid_point(g));
    }
    if (doc.contains("nx")) {
      base.nx.clear();
      if (doc["nx"].is_array())
        for (const auto& v : doc["nx"]) base.nx.push_back(json_length(v));
      else
        base.nx.push_back(json_length(doc["nx"]));
    }
    if (doc.contains("trials")) base.trials = doc["trials"].get<int>();
    if (doc.contains("seed")) base.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("Nh")) base.Nh = doc["Nh"].get<int>();
    if (doc.contains("D")) base.D = doc["D"].get<int>();
    if (doc.contains("maxTries")) base.max_tries = doc["maxTries"].get<int>();
    if (doc.contains("workers")) base.workers = doc["workers"].get<int>();
    if (doc.contains("outputDir")) base.output_dir = doc["outputDir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("config: ") + e.what());
  }
  return base;
}

Json spec_to_json(const ExperimentSpec& spec) {
  Json j;
  j["model"] = model_to_json(spec.model);
  if (std::holds_alternative<FilteredGaussianModel>(spec.model) && spec.auto_gain) j["model"]["gain"] = nullptr;
  Json grid = Json::array();
  for (const auto& g : spec.grid) grid.push_back({g.L, g.q});
  j["grid"] = std::move(grid);
  j["nx"] = spec.nx;
  j["trials"] = spec.trials;
  j["seed"] = spec.seed;
  j["Nh"] = spec.Nh;
  j["D"] = spec.D;
  j["maxTries"] = spec.max_tries;
  j["outputDir"] = spec.output_dir.generic_string();
  return j;
}

std::vector<TrialSummary> run_montecarlo(const ExperimentSpec& spec, const LogSink& log) {
  validate_spec(spec);
  std::vector<TrialSummary> out;
  const double W = nyquist_rate(spec.model);
  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    const auto [L, q] = spec.grid[gi];
    auto skip_all = [&](const std::string& why) {
      emit(log, "skipped (L,q)=(" + std::to_string(L) + "," + std::to_string(q) + "): " + why);
      for (long long nx : spec.nx) {
        TrialSummary s;
        s.L = L;
        s.q = q;
        s.Nx = nx;
        s.N = nx / L;
        s.skipped = true;
        s.note = why;
        out.push_back(std::move(s));
      }
    };
    if (!dimensions_feasible(L, q)) {
      skip_all("infeasible, 2Q < L");
      continue;
    }
    PatternDraw draw;
    try {
      draw = generate_pattern_counted(L, q, derive_seed(spec.seed, {gi, kPatternStream}), spec.max_tries, W);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FeasibilityExhausted) throw;
      skip_all(e.what());
      continue;
    }
    const Estimator est(draw.pattern, spec.Nh, spec.D);
    const SignalModel model = point_model(spec, L);
    const std::vector<double> truth = true_segment_power(model, L);

    for (std::size_t ni = 0; ni < spec.nx.size(); ++ni) {
      TrialSummary s;
      s.L = L;
      s.q = q;
      s.Nx = spec.nx[ni];
      s.N = s.Nx / L;
      s.pattern = draw.pattern;
      s.attempts = draw.attempts;
      s.condition_number = est.system().condition_number;
      s.gain = model_gain(model);
      s.truth = Eigen::Map<const Eigen::VectorXd>(truth.data(), L);
      s.mean = s.var = s.se = s.var_se = nan_vector(L);
      if (s.N <= spec.Nh) {
        s.skipped = true;
        s.note = "record too short: N <= N_h";
        emit(log, "skipped (L,q)=(" + std::to_string(L) + "," + std::to_string(q) + ") N_x=" +
                      std::to_string(s.Nx) + ": " + s.note);
        out.push_back(std::move(s));
        continue;
      }
      fill_analytic(s, est, model, s.Nx, log);
      if (spec.trials > 0) {
        s.trials = spec.trials;
        run_trials(s, est, model, spec, gi, ni);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<TrialSummary>& summaries) {
  out << "L,q,N_x,N,trials,segment_index,true_power,mean,var,se,bias_mc,bias_exact,var_exact,var_approx,"
         "expected_mean\n";
  for (const auto& s : summaries) {
    if (s.skipped) continue;
    const Eigen::VectorXd bias = s.bias_mc();
    for (int l = 0; l < s.L; ++l) {
      out << s.L << ',' << s.q << ',' << s.Nx << ',' << s.N << ',' << s.trials << ',' << l + 1 << ','
          << format_number(s.truth(l)) << ',' << format_number(s.mean(l)) << ',' << format_number(s.var(l))
          << ',' << format_number(s.se(l)) << ',' << format_number(bias(l)) << ','
          << format_number(s.bias_exact(l)) << ',' << format_number(s.var_exact(l)) << ','
          << format_number(s.var_approx) << ',' << format_number(s.expected_mean(l)) << '\n';
    }
  }
}

Figure figure_from_string(std::string_view name) {
  static constexpr std::string_view names[] = {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"};
  for (int i = 0; i < 6; ++i)
    if (name == names[i]) return static_cast<Figure>(i + 1);
  fail(ErrorCode::InvalidArgument, "unknown figure \"" + std::string(name) + "\" (expected fig1..fig6)");
}

std::string figure_name(Figure figure) { return "fig" + std::to_string(static_cast<int>(figure)); }

ExperimentSpec figure_defaults(Figure figure) {
  ExperimentSpec s;
  const std::vector<long long> sweep{10000, 20000, 50000, 100000, 200000, 500000, 1000000};
  const std::vector<GridPoint> reference_points{{51, 12}, {101, 25}, {201, 50}};
  s.trials = 2000;
  switch (figure) {
    case Figure::Fig1:
      s.grid = reference_points;
      s.nx = sweep;
      s.trials = 500;
      break;
    case Figure::Fig4:
      s.grid = reference_points;
      s.nx = sweep;
      break;
    case Figure::Fig2:
      for (int L : {51, 71, 91})
        for (int q = 10; q <= 45; q += 5) s.grid.push_back({L, q});
      s.nx = {100000};
      break;
    case Figure::Fig3:
      for (int q : {25, 35, 45})
        for (int L = 51; L <= 201; L += 10)
          if (dimensions_feasible(L, q)) s.grid.push_back({L, q});
      s.nx = {100000};
      break;
    case Figure::Fig5:
      s.model = FilteredGaussianModel{};
      for (int L = 51; L <= 201; L += 10) s.grid.push_back({L, 45});
      s.nx = {100000};
      break;
    case Figure::Fig6:
      s.model = FilteredGaussianModel{};
      s.grid = {{101, 25}};
      s.nx = sweep;
      break;
  }
  return s;
}

std::vector<FigureCurve> figure_curves(Figure figure, const ExperimentSpec& spec, bool montecarlo,
                                       const LogSink& log) {
  return compute_figure(figure, spec, montecarlo, log).curves;
}

std::string curve_csv(const FigureCurve& c) {
  std::ostringstream out;
  out << "x,analytic_exact,analytic_approx,montecarlo,montecarlo_se\n";
  for (std::size_t i = 0; i < c.x.size(); ++i)
    out << format_number(c.x[i]) << ',' << format_number(c.analytic_exact[i]) << ','
        << format_number(c.analytic_approx[i]) << ',' << format_number(c.montecarlo[i]) << ','
        << format_number(c.montecarlo_se[i]) << '\n';
  return out.str();
}

Json emit_figure_data(Figure figure, const ExperimentSpec& spec, bool montecarlo, const LogSink& log) {
  const FigureRun run = compute_figure(figure, spec, montecarlo, log);
  std::vector<std::string> files;
  for (const auto& c : run.curves) {
    const std::string file = c.name + ".csv";
    write_text_file(spec.output_dir / file, curve_csv(c));
    files.push_back(file);
  }
  const std::string manifest_file = figure_name(figure) + "_manifest.json";
  Json manifest = run_manifest("figures " + figure_name(figure), spec, run.summaries, files);
  manifest["montecarlo"] = montecarlo;
  write_text_file(spec.output_dir / manifest_file, manifest.dump(2) + "\n");
  return manifest;
}

std::vector<ValidationRow> validate(const ExperimentSpec& spec) {
  std::vector<ValidationRow> rows;
  const double W = nyquist_rate(spec.model);
  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    const auto [L, q] = spec.grid[gi];
    ValidationRow base;
    base.L = L;
    base.q = q;
    base.Q = q >= 1 ? equation_count(q) : 0;
    base.dims_ok = dimensions_feasible(L, q);
    base.rate_hz = L > 0 ? static_cast<double>(q) / L * W : kNaN;
    base.condition_number = kNaN;
    if (!base.dims_ok) {
      base.status = "infeasible: need odd L, 1 <= q < L and 2Q >= L";
    } else {
      try {
        const PatternDraw d =
            generate_pattern_counted(L, q, derive_seed(spec.seed, {gi, kPatternStream}), spec.max_tries, W);
        base.rank_ok = true;
        base.attempts = d.attempts;
        base.condition_number = build_psi(d.pattern, build_pair_map(q)).condition_number;
        base.status = "ok";
      } catch (const Error& e) {
        base.attempts = spec.max_tries;
        base.status = e.what();
      }
    }
    const std::vector<long long> lengths = spec.nx.empty() ? std::vector<long long>{0} : spec.nx;
    for (long long nx : lengths) {
      ValidationRow r = base;
      r.Nx = nx;
      r.N = L > 0 ? nx / L : 0;
      r.length_ok = nx > 0 && r.N > 2LL * spec.Nh;
      if (nx > 0 && !r.length_ok && r.status == "ok") r.status = "too short: N <= 2 N_h";
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

void write_validation_csv(std::ostream& out, const std::vector<ValidationRow>& rows) {
  out << "L,q,Q,dims_ok,rank_ok,attempts,condition_number,rate_hz,rate_display,N_x,N,length_ok,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    out << r.L << ',' << r.q << ',' << r.Q << ',' << r.dims_ok << ',' << r.rank_ok << ',' << r.attempts << ','
        << format_number(r.condition_number) << ',' << format_number(r.rate_hz) << ','
        << (std::isnan(r.rate_hz) ? std::string() : std::to_string(std::lround(r.rate_hz))) << ','
        << (r.Nx > 0 ? std::to_string(r.Nx) : std::string()) << ',' << (r.Nx > 0 ? std::to_string(r.N) : std::string())
        << ',' << r.length_ok << ',' << status << '\n';
  }
}

Json run_manifest(const std::string& command, const ExperimentSpec& spec,
                  const std::vector<TrialSummary>& summaries, const std::vector<std::string>& files) {
  Json j;
  j["tool"] = "mcpsd";
  j["version"] = MCPSD_VERSION;
  j["command"] = command;
  j["spec"] = spec_to_json(spec);
  j["seedDerivation"] =
      "trial seed = splitmix64 chain of (master seed, grid index, N_x index, trial index); "
      "pattern seed = splitmix64 chain of (master seed, grid index, pattern stream)";
  j["filter"] = {{"family", "Lagrange"}, {"N_h", spec.Nh}, {"D", spec.D}};
  j["generator"] = "std::mt19937_64 with std::normal_distribution";
  Json points = Json::array();
  for (const auto& s : summaries) {
    Json p;
    p["L"] = s.L;
    p["q"] = s.q;
    p["N_x"] = s.Nx;
    p["N"] = s.N;
    p["skipped"] = s.skipped;
    if (!s.note.empty()) p["note"] = s.note;
    if (!s.pattern.offsets.empty()) {
      p["pattern"] = pattern_to_json(s.pattern);
      p["pattern"]["conditionNumber"] = s.condition_number;
      p["attempts"] = s.attempts;
      p["gain"] = s.gain;
      p["rateHz"] = s.pattern.average_rate();
    }
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  j["files"] = files;
  return j;
}

}  // namespace mcpsd
