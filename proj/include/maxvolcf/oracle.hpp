#pragma once

#include <Eigen/Dense>
#include <vector>

#include "maxvolcf/errors.hpp"
#include "maxvolcf/maxvol.hpp"

namespace maxvolcf {
namespace oracle {

/// Size caps for the exhaustive oracles. Exceeding a cap is an error so a
/// test cannot accidentally launch an exponential search.
struct OracleConfig {
  int max_f = 4;
  int max_L0 = 6;
  int max_m = 10;
  std::uint64_t seed = 0;
};

/// SVD-based Moore-Penrose pseudoinverse.
inline MatrixXd pinv_oracle(const MatrixXd& S) {
  Eigen::JacobiSVD<MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-13 * sv.size() * (sv.size() > 0 ? sv(0) : 0.0);
  VectorXd inv = VectorXd::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

struct SvdResult {
  MatrixXd U;
  VectorXd sigma;
  MatrixXd V;
};

inline SvdResult svd_oracle(const MatrixXd& A) {
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Exhaustive rectangular-volume maximization over all column subsets of
/// size L0. Lexicographically first subset wins ties.
inline SeedSet brute_force_max_rectvol(const MatrixXd& Q, Index L0,
                                       const OracleConfig& caps = {}) {
  const Index f = Q.rows();
  const Index m = Q.cols();
  if (f > caps.max_f || L0 > caps.max_L0 || m > caps.max_m)
    throw ArgumentError("brute_force_max_rectvol: size caps exceeded");
  if (L0 < f || L0 > m) throw ArgumentError("brute_force_max_rectvol: need f <= L0 <= m");

  std::vector<Index> comb(static_cast<std::size_t>(L0));
  for (Index i = 0; i < L0; ++i) comb[static_cast<std::size_t>(i)] = i;
  std::vector<Index> best;
  double best_vol = -1.0;
  for (;;) {
    double vol = rectangular_volume(SeedSet::from_indices(Q, comb).S);
    if (vol > best_vol) {
      best_vol = vol;
      best = comb;
    }
    // next combination in lexicographic order
    Index i = L0 - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == m - L0 + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < L0; ++j)
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }
  return SeedSet::from_indices(Q, std::move(best));
}

/// Straightforward greedy extension: recompute Rectvol([S, q_i]) from
/// scratch for every candidate at every step; ties go to the lowest index.
inline std::vector<Index> naive_greedy(const MatrixXd& Q, Index L0, const SeedSet& init) {
  if (L0 < init.size() || L0 > Q.cols()) throw ArgumentError("naive_greedy: bad L0");
  std::vector<Index> k = init.indices;
  MatrixXd S = init.S;
  std::vector<bool> used(static_cast<std::size_t>(Q.cols()), false);
  for (Index i : k) used[static_cast<std::size_t>(i)] = true;
  while (static_cast<Index>(k.size()) < L0) {
    Index best = -1;
    double best_vol = -1.0;
    MatrixXd ext(S.rows(), S.cols() + 1);
    ext.leftCols(S.cols()) = S;
    for (Index i = 0; i < Q.cols(); ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      ext.col(S.cols()) = Q.col(i);
      double vol = rectangular_volume(ext);
      if (vol > best_vol) {
        best_vol = vol;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    k.push_back(best);
    S.conservativeResize(Eigen::NoChange, S.cols() + 1);
    S.col(S.cols() - 1) = Q.col(best);
  }
  return k;
}

/// det(AB) <= M/(M-N) * max_i det(A_{-i} B_{-i}), checked exhaustively.
inline bool lemma1_check(const MatrixXd& A, const MatrixXd& B, const OracleConfig& caps = {}) {
  const Index N = A.rows();
  const Index M = A.cols();
  if (B.rows() != M || B.cols() != N) throw ArgumentError("lemma1_check: shape mismatch");
  if (M <= N) throw ArgumentError("lemma1_check: requires M > N");
  if (N > caps.max_f || M > caps.max_m) throw ArgumentError("lemma1_check: size caps exceeded");

  const double lhs = (A * B).determinant();
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < M; ++i) {
    MatrixXd Ai(N, M - 1), Bi(M - 1, N);
    Index c = 0;
    for (Index j = 0; j < M; ++j) {
      if (j == i) continue;
      Ai.col(c) = A.col(j);
      Bi.row(c) = B.row(j);
      ++c;
    }
    best = std::max(best, (Ai * Bi).determinant());
  }
  const double bound = static_cast<double>(M) / static_cast<double>(M - N) * best;
  return lhs <= bound + 1e-10;
}

}  // namespace oracle
}  // namespace maxvolcf
