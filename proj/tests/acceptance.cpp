// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mcpsd/analysis.hpp"
#include "mcpsd/harness.hpp"
#include "oracles.hpp"

using namespace mcpsd;

namespace {

struct Result {
  bool pass = true;
  std::vector<std::string> details;

  static std::string format(const char* fmt, auto... args) {
    if constexpr (sizeof...(args) == 0) {
      return fmt;
    } else {
      char buf[512];
      std::snprintf(buf, sizeof buf, fmt, args...);
      return buf;
    }
  }
  void note(const char* fmt, auto... args) { details.push_back(format(fmt, args...)); }
  void require(bool ok, const char* fmt, auto... args) {
    if (!ok) pass = false;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + format(fmt, args...));
  }
};

std::vector<std::pair<int, int>> pairs_of(const PairIndexMap& m) { return m.entries; }

Result pseudoinverse_structure() {
  Result r;
  const GridPoint points[] = {{15, 6}, {51, 12}, {101, 25}};
  for (const auto& g : points) {
    double col1 = 0.0, ident = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const auto p = generate_pattern(g.L, g.q, 1000 + s);
      const auto map = build_pair_map(g.q);
      const auto sys = build_psi(p, map);
      const Eigen::MatrixXd Pb = oracle::psi_breve(g.L, p.offsets, pairs_of(map));
      const Eigen::MatrixXd AP = oracle::matmul(sys.recovery, Pb);
      ident = std::max(ident, (AP - Eigen::MatrixXd::Identity(g.L, g.L)).cwiseAbs().maxCoeff());
      col1 = std::max(col1, (sys.recovery.col(0).array() - 1.0 / g.L).abs().maxCoeff());
    }
    r.require(col1 <= 1e-9, "(L=%d,q=%d) 20 patterns: max |A(:,1) - 1/L| = %.3e", g.L, g.q, col1);
    r.require(ident <= 1e-9, "(L=%d,q=%d) 20 patterns: max |A Psi_breve - I| = %.3e", g.L, g.q, ident);
  }
  return r;
}

SamplingPattern raw_pattern(int L, std::vector<int> c) {
  SamplingPattern p;
  p.L = L;
  p.q = static_cast<int>(c.size());
  p.offsets = std::move(c);
  return p;
}

Result oracle_equivalence() {
  Result r;
  struct Case {
    SamplingPattern p;
    long long N;
    int Nh, D;
  };
  const Case cases[] = {{raw_pattern(5, {0, 2}), 32, 5, 2}, {raw_pattern(5, {0, 1, 3}), 64, 9, 4}};
  for (const auto& cs : cases) {
    const auto map = build_pair_map(cs.p.q);
    const auto bank = build_bank(cs.p, cs.Nh, cs.D);
    for (SampleKind kind : {SampleKind::CircularComplex, SampleKind::Real}) {
      const Eigen::MatrixXd O = fourth_moment_oracle(bank, map, 1.0, cs.N, kind);
      const auto U = build_U_white(compute_filter_moments(bank, map, cs.N), 1.0, kind);
      double rel = 0.0, off = 0.0;
      for (Eigen::Index i = 0; i < O.rows(); ++i) {
        const double ref = O(i, i);
        const double d = std::abs(U.diag(i) - ref);
        rel = std::max(rel, ref == 0.0 ? d : d / std::abs(ref));
        for (Eigen::Index j = 0; j < O.cols(); ++j)
          if (i != j) off = std::max(off, std::abs(O(i, j)));
      }
      const char* kname = kind == SampleKind::Real ? "real" : "complex";
      r.require(rel <= 1e-10, "L=%d q=%d N=%lld Nh=%d %s: max relative diagonal error %.3e", cs.p.L, cs.p.q, cs.N,
                cs.Nh, kname, rel);
      r.require(off <= 1e-12, "L=%d q=%d N=%lld Nh=%d %s: max |oracle off-diagonal| %.3e", cs.p.L, cs.p.q, cs.N,
                cs.Nh, kname, off);
    }
  }
  return r;
}

Result moment_identities() {
  Result r;
  const auto p = raw_pattern(5, {0, 1, 3});
  const long long N = 32;
  const int Nh = 7;
  const auto bank = build_bank(p, Nh, 3);
  const auto map = build_pair_map(p.q);
  const auto moments = compute_filter_moments(bank, map, N);
  for (int k = 0; k < map.Q(); ++k) {
    const auto [a, b] = map.entries[static_cast<std::size_t>(k)];
    const auto& ha = bank[static_cast<std::size_t>(a)].coeffs;
    const auto& hb = bank[static_cast<std::size_t>(b)].coeffs;
    double worst[3] = {0.0, 0.0, 0.0};
    double total = 0.0;
    for (long long n = 0; n < N; ++n) {
      const double ref = oracle::S_definition(ha, hb, n, N);
      total += ref;
      const double err = std::abs(moment_term(ha, hb, n, N) - ref) / std::max(1.0, std::abs(ref));
      const int regime = n < Nh - 1 ? 0 : (n > N - Nh ? 2 : 1);
      worst[regime] = std::max(worst[regime], err);
    }
    const double closed = moments.interior_count() * moments.G[static_cast<std::size_t>(k)] +
                          moments.Sigma[static_cast<std::size_t>(k)];
    const double sum_err = std::abs(closed - total) / std::max(1.0, std::abs(total));
    r.require(worst[0] <= 1e-12 && worst[1] <= 1e-12 && worst[2] <= 1e-12,
              "pair %d (%d,%d): left %.2e interior %.2e right %.2e", k + 1, a, b, worst[0], worst[1], worst[2]);
    r.require(sum_err <= 1e-12, "pair %d: (N-2Nh+2) G + Sigma vs sum_n S(n): %.2e", k + 1, sum_err);
  }
  return r;
}

ExperimentSpec white_spec(int L, int q, std::vector<long long> nx, int trials, std::uint64_t seed) {
  ExperimentSpec s;
  s.grid = {{L, q}};
  s.nx = std::move(nx);
  s.trials = trials;
  s.seed = seed;
  s.workers = 0;
  return s;
}

Result bias_validation() {
  Result r;
  const auto out = run_montecarlo(white_spec(15, 6, {5000, 15000}, 500, 11));
  double scaled[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& s = out[i];
    const double mc = s.bias_mc()(0);
    const double se = s.se(0);
    const double expect = s.bias_exact(0);
    r.require(std::abs(mc - expect) <= 4 * se, "N_x=%lld segment 1: MC bias %.5f, analytic %.5f, SE %.5f (%.2f SE)",
              s.Nx, mc, expect, se, std::abs(mc - expect) / se);
    int within = 0;
    for (Eigen::Index l = 0; l < s.mean.size(); ++l)
      if (std::abs(s.bias_mc()(l) - s.bias_exact(l)) <= 4 * s.se(l)) ++within;
    r.note("N_x=%lld: %d of %d segments within 4 SE", s.Nx, within, static_cast<int>(s.mean.size()));
    scaled[i] = expect * static_cast<double>(s.Nx);
  }
  const double ratio = scaled[1] / scaled[0];
  r.require(std::abs(ratio - 1.0) <= 0.1, "bias*N_x: %.4f at 5000, %.4f at 15000, ratio %.4f", scaled[0], scaled[1],
            ratio);
  return r;
}

Result variance_validation() {
  Result r;
  const auto out = run_montecarlo(white_spec(15, 6, {15000}, 2000, 12));
  const auto& s = out.front();
  const double ratio = s.var(0) / s.var_exact(0);
  r.require(std::abs(ratio - 1.0) <= 0.15, "segment 1: MC var %.6f (SE %.6f), exact C11 %.6f, ratio %.4f", s.var(0),
            s.var_se(0), s.var_exact(0), ratio);
  double lo = 1e9, hi = 0.0;
  for (Eigen::Index l = 0; l < s.var.size(); ++l) {
    lo = std::min(lo, s.var(l) / s.var_exact(l));
    hi = std::max(hi, s.var(l) / s.var_exact(l));
  }
  r.note("all segments: MC/exact ratio in [%.3f, %.3f]", lo, hi);
  return r;
}

Result approximation_fidelity() {
  Result r;
  const GridPoint points[] = {{51, 12}, {101, 25}, {201, 50}};
  for (const auto& g : points) {
    const Estimator est(generate_pattern(g.L, g.q, 7));
    const auto rep = analyze_white(est, 100000, 1000.0);
    const double ratio = rep.var_approx(0) / rep.cov_exact(0, 0);
    r.require(std::abs(ratio - 1.0) <= 0.25, "(L=%d,q=%d): approx %.6e exact %.6e ratio %.4f", g.L, g.q,
              rep.var_approx(0), rep.cov_exact(0, 0), ratio);
  }
  auto check_curves = [&](Figure f, bool decreasing) {
    const auto curves = figure_curves(f, figure_defaults(f), false);
    for (const auto& c : curves) {
      bool ok = c.x.size() >= 2;
      for (std::size_t i = 1; i < c.x.size(); ++i) {
        const bool step = decreasing ? c.analytic_exact[i] < c.analytic_exact[i - 1]
                                     : c.analytic_exact[i] > c.analytic_exact[i - 1];
        ok = ok && step;
      }
      r.require(ok, "%s: %zu points, exact C11 strictly %s (%.4e .. %.4e)", c.name.c_str(), c.x.size(),
                decreasing ? "decreasing in q" : "increasing in L", c.analytic_exact.front(), c.analytic_exact.back());
    }
  };
  check_curves(Figure::Fig2, true);
  check_curves(Figure::Fig3, false);
  return r;
}

Result consistency_trend() {
  Result r;
  const Estimator est(generate_pattern(51, 12, 3));
  std::vector<CovarianceReport> reps;
  for (long long nx : {10000LL, 100000LL, 1000000LL}) reps.push_back(analyze_white(est, nx, 1000.0));
  auto max_off = [](const Eigen::MatrixXd& C) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < C.rows(); ++i)
      for (Eigen::Index j = 0; j < C.cols(); ++j)
        if (i != j) m = std::max(m, std::abs(C(i, j)));
    return m;
  };
  for (std::size_t i = 0; i < reps.size(); ++i)
    r.note("N_x=%lld: bias %.4e C11 %.4e max|C_ij| %.4e", reps[i].Nx, reps[i].bias(0), reps[i].cov_exact(0, 0),
           max_off(reps[i].cov_exact));
  for (std::size_t i = 1; i < reps.size(); ++i) {
    const auto& a = reps[i - 1];
    const auto& b = reps[i];
    r.require(b.bias(0) < a.bias(0), "bias decreases %lld -> %lld", a.Nx, b.Nx);
    r.require(b.cov_exact(0, 0) < a.cov_exact(0, 0), "C11 decreases %lld -> %lld", a.Nx, b.Nx);
    const double ratio = a.cov_exact(0, 0) / b.cov_exact(0, 0);
    r.require(ratio >= 8.0 && ratio <= 12.0, "var(%lld)/var(%lld) = %.4f", a.Nx, b.Nx, ratio);
    r.require(max_off(b.cov_exact) < max_off(a.cov_exact), "max off-diagonal decreases %lld -> %lld", a.Nx, b.Nx);
  }
  return r;
}

Result filtered_parity() {
  Result r;
  ExperimentSpec s = white_spec(101, 25, {100000}, 300, 13);
  s.model = FilteredGaussianModel{};
  const auto out = run_montecarlo(s);
  const auto& t = out.front();
  FilteredGaussianModel m;
  m.gain = t.gain;
  const auto pass = passband_segments(m, 101);
  double mc = 0.0, white = 0.0;
  for (int l : pass) {
    mc += t.var(l);
    white += t.var_exact(l);
  }
  mc /= static_cast<double>(pass.size());
  white /= static_cast<double>(pass.size());
  const double ratio = mc / white;
  r.note("gain %.6f, %zu passband segments", t.gain, pass.size());
  r.require(ratio >= 0.5 && ratio <= 2.0, "passband MC var %.6e, white analytic %.6e, ratio %.4f", mc, white, ratio);
  return r;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Result determinism() {
  Result r;
  ExperimentSpec s;
  s.grid = {{15, 6}, {21, 7}};
  s.nx = {3000, 9000};
  s.trials = 40;
  s.seed = 99;
  auto summary = [&](int workers) {
    s.workers = workers;
    std::ostringstream out;
    write_summary_csv(out, run_montecarlo(s));
    return out.str();
  };
  const std::string a = summary(1);
  r.require(a == summary(1), "summary CSV identical on rerun (%zu bytes)", a.size());
  r.require(a == summary(4), "summary CSV identical with 1 and 4 workers");

  // Same output directory each time: the manifests record it.
  const auto base = std::filesystem::temp_directory_path() / "mcpsd_acceptance";
  auto emit = [&](int workers) {
    std::filesystem::remove_all(base);
    ExperimentSpec f = s;
    f.workers = workers;
    f.output_dir = base;
    emit_figure_data(Figure::Fig4, f, true);
    ExperimentSpec g = f;
    g.model = FilteredGaussianModel{};
    g.grid = {{21, 7}};
    g.trials = 5;
    g.nx = {9000};
    emit_figure_data(Figure::Fig6, g, true);
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(base)) files[e.path().filename().string()] = read_file(e.path());
    return files;
  };
  const auto first = emit(1);
  const bool same = first == emit(1) && first == emit(4);
  r.require(!first.empty() && same, "%zu figure files byte-identical across rerun and 1/4 workers", first.size());
  std::filesystem::remove_all(base);
  return r;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Result()> run;
  };
  const Criterion criteria[] = {
      {"1 pseudoinverse structure", pseudoinverse_structure},
      {"2 fourth-moment oracle equivalence", oracle_equivalence},
      {"3 fluctuation moment identities", moment_identities},
      {"4 bias validation", bias_validation},
      {"5 variance validation", variance_validation},
      {"6 approximation fidelity and trends", approximation_fidelity},
      {"7 consistency trend", consistency_trend},
      {"8 filtered input parity", filtered_parity},
      {"9 determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Result res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.pass = false;
      res.details.push_back(std::string("FAIL exception: ") + e.what());
    }
    std::printf("%s %s\n", res.pass ? "PASS" : "FAIL", c.name);
    for (const auto& d : res.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    if (!res.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed;
}
