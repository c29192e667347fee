#include "mcpsd/sampling_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mcpsd/error.hpp"
#include "mcpsd/rng.hpp"

namespace mcpsd {

namespace {

void check_dimensions(int L, int q) {
  if (L < 1 || L % 2 == 0)
    fail(ErrorCode::InvalidDimensions, "L must be a positive odd integer, got " + std::to_string(L));
  if (q < 1 || q >= L)
    fail(ErrorCode::InvalidDimensions,
         "q must satisfy 1 <= q < L, got q=" + std::to_string(q) + " L=" + std::to_string(L));
  if (2 * equation_count(q) < L)
    fail(ErrorCode::InvalidDimensions,
         "system is underdetermined: 2Q=" + std::to_string(2 * equation_count(q)) +
             " < L=" + std::to_string(L));
}

}  // namespace

bool dimensions_feasible(int L, int q) noexcept {
  return L >= 1 && L % 2 == 1 && q >= 1 && q < L && 2 * equation_count(q) >= L;
}

SamplingPattern make_pattern(int L, std::vector<int> offsets, double W) {
  const int q = static_cast<int>(offsets.size());
  check_dimensions(L, q);
  if (!(W > 0.0)) fail(ErrorCode::InvalidDimensions, "Nyquist rate W must be positive");
  std::vector<int> sorted = offsets;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorCode::InvalidDimensions, "offsets must be pairwise distinct");
  if (sorted.front() < 0 || sorted.back() > L - 1)
    fail(ErrorCode::InvalidDimensions, "offsets must lie in [0, L-1]");
  SamplingPattern p;
  p.L = L;
  p.q = q;
  p.offsets = std::move(offsets);
  p.W = W;
  return p;
}

PairIndexMap build_pair_map(int q) {
  PairIndexMap map;
  map.entries.reserve(static_cast<std::size_t>(equation_count(q)));
  map.entries.emplace_back(0, 0);
  for (int a = 0; a < q; ++a)
    for (int b = a + 1; b < q; ++b) map.entries.emplace_back(a, b);
  return map;
}

PsiSystem build_psi(const SamplingPattern& pattern, const PairIndexMap& map) {
  const int L = pattern.L;
  const int Q = map.Q();
  PsiSystem sys;
  sys.psi.resize(Q, L);
  sys.psi_breve.resize(2 * Q, L);
  for (int k = 0; k < Q; ++k) {
    const auto [a, b] = map.entries[static_cast<std::size_t>(k)];
    const int diff = pattern.offsets[static_cast<std::size_t>(a)] -
                     pattern.offsets[static_cast<std::size_t>(b)];
    const double omega = 2.0 * std::numbers::pi / L * diff;
    for (int l = 0; l < L; ++l) {
      const double phase = -omega * segment_shift(l, L);
      // diff == 0 keeps row k exactly (1, 0).
      const Complex e = diff == 0 ? Complex(1.0, 0.0) : std::polar(1.0, phase);
      sys.psi(k, l) = e;
      sys.psi_breve(k, l) = e.real();
      sys.psi_breve(Q + k, l) = e.imag();
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(sys.psi_breve, Eigen::ComputeThinU | Eigen::ComputeThinV);
  sys.singular_values = svd.singularValues();
  const double smax = sys.singular_values.size() ? sys.singular_values(0) : 0.0;
  const double tol = std::max(2 * Q, L) * std::numeric_limits<double>::epsilon() * smax;
  sys.rank = static_cast<int>((sys.singular_values.array() > tol).count());
  sys.rank_ok = sys.rank == L;
  const double smin = sys.singular_values.size() ? sys.singular_values(sys.singular_values.size() - 1) : 0.0;
  sys.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

  if (sys.rank_ok) {
    const Eigen::VectorXd inv = sys.singular_values.cwiseInverse();
    sys.recovery = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    sys.qr.compute(sys.psi_breve);
  }
  return sys;
}

Eigen::VectorXd solve_ls(const PsiSystem& system, const Eigen::VectorXd& u_breve) {
  if (!system.rank_ok)
    fail(ErrorCode::RankDeficient, "psi_breve has rank " + std::to_string(system.rank) +
                                       " < L=" + std::to_string(system.L()));
  if (u_breve.size() != system.psi_breve.rows())
    fail(ErrorCode::InvalidDimensions, "u_breve must have 2Q entries");
  return system.qr.solve(u_breve);
}

PatternDraw generate_pattern_counted(int L, int q, std::uint64_t seed, int max_tries, double W) {
  check_dimensions(L, q);
  if (max_tries < 1) fail(ErrorCode::InvalidArgument, "max_tries must be >= 1");
  Engine rng(seed);
  const PairIndexMap map = build_pair_map(q);
  std::vector<int> pool(static_cast<std::size_t>(L - 1));
  for (int attempt = 1; attempt <= max_tries; ++attempt) {
    // Partial Fisher-Yates over {1, ..., L-1}.
    for (int i = 0; i < L - 1; ++i) pool[static_cast<std::size_t>(i)] = i + 1;
    std::vector<int> offsets{0};
    for (int i = 0; i < q - 1; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     uniform_below(rng, static_cast<std::uint64_t>(L - 1 - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      offsets.push_back(pool[static_cast<std::size_t>(i)]);
    }
    std::sort(offsets.begin() + 1, offsets.end());
    SamplingPattern p = make_pattern(L, std::move(offsets), W);
    p.seed = seed;
    if (build_psi(p, map).rank_ok) return {std::move(p), attempt};
  }
  fail(ErrorCode::FeasibilityExhausted,
       "no full-rank pattern for (L,q)=(" + std::to_string(L) + "," + std::to_string(q) +
           ") after " + std::to_string(max_tries) + " tries");
}

SamplingPattern generate_pattern(int L, int q, std::uint64_t seed, int max_tries, double W) {
  return generate_pattern_counted(L, q, seed, max_tries, W).pattern;
}

}  // namespace mcpsd
