#include <gtest/gtest.h>

#include "mcpsd/analysis.hpp"
#include "mcpsd/error.hpp"
#include "mcpsd/rng.hpp"
#include "oracles.hpp"

using namespace mcpsd;

namespace {

SamplingPattern raw_pattern(int L, std::vector<int> offsets) {
  SamplingPattern p;
  p.L = L;
  p.q = static_cast<int>(offsets.size());
  p.offsets = std::move(offsets);
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

}  // namespace

TEST(ExpectedRz, WhiteInput) {
  const auto p = make_pattern(15, {0, 3, 4, 9, 11, 14});
  const auto bank = build_bank(p);
  const auto R = expected_Rz(bank, white_channel_correlation(2.0), 500);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      if (a == b)
        EXPECT_NEAR(R(a, b).real(), 2.0 * compute_H(bank[static_cast<std::size_t>(a)], 500), 1e-13);
      else
        EXPECT_EQ(std::abs(R(a, b)), 0.0);
    }
}

TEST(ExpectedRz, CorrectionVanishesForLongRecords) {
  FilteredGaussianModel m;
  const auto p = make_pattern(15, {0, 3, 4, 9, 11, 14});
  const auto bank = build_bank(p);
  const auto ry = channel_correlation(m, p);
  const auto R = expected_Rz(bank, ry, 100000000LL);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      Complex full{};
      for (int r = 0; r < 25; ++r)
        for (int s = 0; s < 25; ++s)
          full += bank[static_cast<std::size_t>(a)].coeffs[static_cast<std::size_t>(r)] *
                  bank[static_cast<std::size_t>(b)].coeffs[static_cast<std::size_t>(s)] * ry(a, b, s - r);
      // |E R - full| <= (N_h - 1) / N * sum |h_a(r) h_b(s) r(s - r)|.
      double mag = 0.0;
      for (int r = 0; r < 25; ++r)
        for (int s = 0; s < 25; ++s)
          mag += std::abs(bank[static_cast<std::size_t>(a)].coeffs[static_cast<std::size_t>(r)] *
                          bank[static_cast<std::size_t>(b)].coeffs[static_cast<std::size_t>(s)] * ry(a, b, s - r));
      const double bound = 24.0 / 1e8 * mag;
      EXPECT_LE(std::abs(R(a, b) - full), bound + 1e-12 * mag);
      EXPECT_GT(std::abs(R(a, b) - full), 0.0);
    }
}

TEST(ExpectedPowers, WhiteMeanIsH1) {
  const Estimator est(generate_pattern(51, 12, 4));
  const long long N = 400;
  const auto R = expected_Rz(est.bank(), white_channel_correlation(1000.0), N);
  const auto Ep = expected_powers(est.system(), est.pair_map(), R, 1000.0);
  EXPECT_LE((Ep.array() - compute_H(est.bank()[0], N)).abs().maxCoeff(), 1e-12);
}

TEST(Bias, Examples) {
  for (double b : bias_white(15, 1000.0, 1000.0, 1.0)) EXPECT_EQ(b, 0.0);
  for (double b : bias_white(7, 1000.0, 1000.0, 0.99)) EXPECT_NEAR(b, 0.01, 1e-15);
  EXPECT_EQ(code_of([] { bias_white(7, 1000.0, 1000.0, 0.0); }), ErrorCode::InvalidArgument);
}

TEST(Moments, ImpulseAndTwoTap) {
  const auto bank = build_bank(make_pattern(15, {0, 3, 4, 9, 11, 14}));
  const auto m = compute_filter_moments(bank, build_pair_map(6), 1000);
  EXPECT_NEAR(m.G[0], 1.0, 1e-15);

  FilterBank half;
  FdFilter f;
  f.coeffs = {0.5, 0.5};
  half.filters = {f};
  half.length = 2;
  half.integer_delay = 0;
  const auto mh = compute_filter_moments(half, build_pair_map(1), 10);
  EXPECT_NEAR(mh.G[0], 0.375, 1e-15);
}

TEST(Moments, AllRegimesMatchDefinition) {
  for (auto [Nh, D, N] : {std::tuple{7, 3, 32LL}, std::tuple{9, 4, 64LL}}) {
    const auto p = raw_pattern(5, {0, 1, 3});
    const auto bank = build_bank(p, Nh, D);
    const auto map = build_pair_map(3);
    const auto mom = compute_filter_moments(bank, map, N);
    for (int k = 0; k < map.Q(); ++k) {
      const auto [a, b] = map.entries[static_cast<std::size_t>(k)];
      const auto& ha = bank[static_cast<std::size_t>(a)].coeffs;
      const auto& hb = bank[static_cast<std::size_t>(b)].coeffs;
      double total = 0.0, edges = 0.0;
      for (long long n = 0; n < N; ++n) {
        const double def = oracle::S_definition(ha, hb, n, N);
        EXPECT_NEAR(moment_term(ha, hb, n, N), def, 1e-12) << "k=" << k << " n=" << n;
        const bool interior = n >= Nh - 1 && n <= N - Nh;
        if (interior)
          EXPECT_NEAR(def, mom.G[static_cast<std::size_t>(k)], 1e-12);
        else
          edges += def;
        total += def;
      }
      EXPECT_NEAR(edges, mom.Sigma[static_cast<std::size_t>(k)], 1e-12);
      EXPECT_NEAR(total, mom.interior_count() * mom.G[static_cast<std::size_t>(k)] + mom.Sigma[static_cast<std::size_t>(k)],
                  1e-11);
    }
  }
}

TEST(Moments, EdgeSumIndependentOfLength) {
  const auto bank = build_bank(make_pattern(15, {0, 3, 4, 9, 11, 14}));
  const auto map = build_pair_map(6);
  const auto a = compute_filter_moments(bank, map, 60);
  const auto b = compute_filter_moments(bank, map, 100000);
  for (int k = 0; k < map.Q(); ++k) {
    EXPECT_NEAR(a.G[static_cast<std::size_t>(k)], b.G[static_cast<std::size_t>(k)], 1e-14);
    EXPECT_NEAR(a.Sigma[static_cast<std::size_t>(k)], b.Sigma[static_cast<std::size_t>(k)], 1e-12);
  }
  EXPECT_GE(a.G[0], 0.0);
  EXPECT_GE(a.Sigma[0], 0.0);
  EXPECT_EQ(code_of([&] { compute_filter_moments(bank, map, 50); }), ErrorCode::InvalidLength);
}

TEST(UWhite, LimitsAndStructure) {
  const auto bank = build_bank(make_pattern(15, {0, 3, 4, 9, 11, 14}));
  const auto map = build_pair_map(6);
  const double s2 = 3.0;
  const auto U = build_U_white(compute_filter_moments(bank, map, 100000000LL), s2);
  EXPECT_EQ(U.diag(map.Q()), 0.0);
  const double Hinf = compute_H(bank[0], 100000000LL);
  EXPECT_NEAR(U.diag(0), s2 * s2 * Hinf * Hinf, 1e-6);
  EXPECT_NEAR(U.diag(0), s2 * s2, 1e-5);
  for (int k = 1; k < 2 * map.Q(); ++k) EXPECT_LT(U.diag(k), 1e-7);
  const auto Us = build_U_white(compute_filter_moments(bank, map, 100), s2);
  const double H1 = compute_H(bank[0], 100);
  EXPECT_GE(Us.diag(0), s2 * s2 * H1 * H1);
}

TEST(UWhite, MatchesFourthMomentOracle) {
  const auto p = raw_pattern(5, {0, 2});
  const auto map = build_pair_map(2);
  for (SampleKind kind : {SampleKind::CircularComplex, SampleKind::Real}) {
    for (auto [Nh, D, N] : {std::tuple{5, 2, 32LL}, std::tuple{7, 3, 40LL}}) {
      const auto bank = build_bank(p, Nh, D);
      const Eigen::MatrixXd full = fourth_moment_oracle(bank, map, 1.5, N, kind);
      const auto U = build_U_white(compute_filter_moments(bank, map, N), 1.5, kind);
      for (int i = 0; i < full.rows(); ++i)
        for (int j = 0; j < full.cols(); ++j) {
          if (i == j)
            EXPECT_NEAR(full(i, i), U.diag(i), 1e-10 * std::max(1.0, std::abs(U.diag(i))));
          else
            EXPECT_LE(std::abs(full(i, j)), 1e-12);
        }
    }
  }
}

TEST(Oracle, SizeBound) {
  const auto p = raw_pattern(5, {0, 2});
  EXPECT_EQ(code_of([&] { fourth_moment_oracle(build_bank(p, 11, 5), build_pair_map(2), 1.0, 64); }),
            ErrorCode::InstanceTooLarge);
  EXPECT_EQ(code_of([&] { fourth_moment_oracle(build_bank(p, 5, 2), build_pair_map(2), 1.0, 200); }),
            ErrorCode::InstanceTooLarge);
}

TEST(Covariance, AsymptoticUGivesZero) {
  const auto sys = build_psi(generate_pattern(15, 6, 2), build_pair_map(6));
  const double s2 = 1000.0;
  UMatrix U;
  U.diag = Eigen::VectorXd::Zero(2 * 16);
  U.diag(0) = s2 * s2;
  const auto C = covariance_exact(sys, U, 15, 1000.0, 1.0, s2);
  EXPECT_LE(C.cwiseAbs().maxCoeff(), 1e-12);
  const auto bad = build_psi(make_pattern(7, {0, 1, 2}), build_pair_map(3));
  UMatrix U8;
  U8.diag = Eigen::VectorXd::Ones(8);
  EXPECT_EQ(code_of([&] { covariance_exact(bad, U8, 7, 1000.0, 1.0, 1.0); }), ErrorCode::RankDeficient);
}

TEST(Covariance, SymmetricAndHalvesWithDoubledLength) {
  const Estimator est(generate_pattern(51, 12, 6));
  const auto a = analyze_white(est, 50000, 1000.0);
  const auto b = analyze_white(est, 100000, 1000.0);
  EXPECT_LE((a.cov_exact - a.cov_exact.transpose()).cwiseAbs().maxCoeff(), 0.0);
  const double ratio = a.cov_exact(0, 0) / b.cov_exact(0, 0);
  EXPECT_GE(ratio, 1.8);
  EXPECT_LE(ratio, 2.2);
  for (int l = 1; l < 51; ++l) EXPECT_EQ(a.bias(l), a.bias(0));
  EXPECT_GT(a.var_approx(0), 0.0);
}

TEST(Covariance, ExactEqualsGenericSandwich) {
  // Literal (L/W)^2 A U A^T - E{p}E{p}^T with the normal-equation inverse.
  const auto p = generate_pattern(15, 6, 7);
  const Estimator est(p);
  const auto rep = analyze_white(est, 15000, 1000.0);
  const auto map = build_pair_map(6);
  const Eigen::MatrixXd P = oracle::psi_breve(15, p.offsets, map.entries);
  const Eigen::MatrixXd A = (P.transpose() * P).inverse() * P.transpose();
  const Eigen::MatrixXd U = rep.U.diag.asDiagonal();
  const double mean = rep.H1 * 1000.0 / 1000.0;
  const Eigen::MatrixXd C = oracle::matmul(oracle::matmul(A, U), A.transpose()) * (15.0 / 1000.0) * (15.0 / 1000.0) -
                            Eigen::MatrixXd::Constant(15, 15, mean * mean);
  EXPECT_LE((C - rep.cov_exact).cwiseAbs().maxCoeff(), 1e-10 * rep.cov_exact.cwiseAbs().maxCoeff());
}

TEST(Approx, Trends) {
  const double a10 = variance_approx(201, equation_count(10), 100000, 25, 1.0, 30.0, 1000.0, 1000.0);
  const double a20 = variance_approx(201, equation_count(20), 100000, 25, 1.0, 30.0, 1000.0, 1000.0);
  EXPECT_NEAR(a20 / a10, 0.25, 0.05);
  const double big = variance_approx(51, 67, 100000000000LL, 25, 1.0, 30.0, 1000.0, 1000.0);
  const double small = variance_approx(51, 67, 10000000000LL, 25, 1.0, 30.0, 1000.0, 1000.0);
  EXPECT_NEAR(big / small, 0.1, 1e-3);
}

TEST(Approx, CloseToExactAtReferencePoint) {
  const Estimator est(generate_pattern(101, 25, 3));
  const auto rep = analyze_white(est, 100000, 1000.0);
  EXPECT_NEAR(rep.var_approx(0) / rep.cov_exact(0, 0), 1.0, 0.25);
}

TEST(Phi, OrthogonalSystemAndPositivity) {
  PsiSystem sys;
  const int L = 5, Q = 4;
  sys.psi = Eigen::MatrixXcd::Zero(Q, L);
  sys.psi_breve = Eigen::MatrixXd::Zero(2 * Q, L);
  for (int l = 0; l < L; ++l) sys.psi_breve(l, l) = std::sqrt(static_cast<double>(Q));
  sys.rank_ok = true;
  const auto d = phi_diagnostics(sys);
  for (int l = 0; l < L; ++l) EXPECT_NEAR(d.phi(l), 1.0 / Q, 1e-15);
  EXPECT_NEAR(d.median_error, 0.0, 1e-14);

  const auto real = phi_diagnostics(build_psi(generate_pattern(51, 12, 1), build_pair_map(12)));
  EXPECT_GT(real.phi.minCoeff(), 0.0);
  EXPECT_LT(real.median_error, 1.0);
}

TEST(Analyze, ReportMetadata) {
  const Estimator est(generate_pattern(15, 6, 1));
  const auto r = analyze_white(est, 15007, 1000.0);
  EXPECT_EQ(r.N, 1000);
  EXPECT_EQ(r.Nx, 15000);
  EXPECT_EQ(r.Q, 16);
  EXPECT_NEAR(r.H1, 0.988, 1e-15);
  EXPECT_NEAR(r.bias(0), 0.012, 1e-15);
  EXPECT_EQ(code_of([&] { analyze_white(est, 15 * 50, 1000.0); }), ErrorCode::InvalidLength);
}

TEST(MonteCarlo, RealSamplesFollowRealKindFormula) {
  const Estimator est(generate_pattern(15, 6, 12));
  const auto rep = analyze_white(est, 15000, 1000.0, SampleKind::Real);
  const int trials = 1000;
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double p0 =
        est.estimate(gen_white(15000, 1000.0, 1000.0, derive_seed(9, {static_cast<std::uint64_t>(t)}), SampleKind::Real)).p(0);
    s += p0;
    s2 += p0 * p0;
  }
  const double mean = s / trials;
  const double var = (s2 - trials * mean * mean) / (trials - 1);
  EXPECT_NEAR(var / rep.cov_exact(0, 0), 1.0, 0.15);
}
