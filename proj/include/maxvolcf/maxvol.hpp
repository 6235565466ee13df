#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "maxvolcf/errors.hpp"

namespace maxvolcf {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Product of singular values, sqrt(det(S S^T)). Coincides with |det S|
/// for square S. Requires a wide (or square) matrix.
inline double rectangular_volume(const MatrixXd& S) {
  if (S.rows() > S.cols())
    throw ArgumentError("rectangular_volume: matrix has more rows than columns");
  Eigen::JacobiSVD<MatrixXd> svd(S);
  double v = 1.0;
  for (Index s = 0; s < svd.singularValues().size(); ++s) v *= svd.singularValues()(s);
  return v;
}

/// Ordered seed indices into the columns of Q, plus the submatrix S = Q(:,k).
struct SeedSet {
  std::vector<Index> indices;
  MatrixXd S;  // f x L

  Index size() const { return static_cast<Index>(indices.size()); }

  static SeedSet from_indices(const MatrixXd& Q, std::vector<Index> idx) {
    SeedSet out;
    out.S.resize(Q.rows(), static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (idx[j] < 0 || idx[j] >= Q.cols()) throw ArgumentError("seed index out of range");
      out.S.col(static_cast<Index>(j)) = Q.col(idx[j]);
    }
    out.indices = std::move(idx);
    return out;
  }
};

/// Live state of the greedy extension: the least-norm coefficient matrix
/// C (L x m rows active, solving S C = Q) and the cached squared column
/// norms w_i = ||c_i||^2 that drive the argmax selection.
class CoefficientState {
 public:
  CoefficientState() = default;

  /// Build from a square invertible seed: C = S^{-1} Q.
  static CoefficientState square_init(const MatrixXd& Q, const SeedSet& seed,
                                      Index capacity = 0) {
    const Index f = Q.rows();
    if (seed.size() != f) throw ArgumentError("square_init: seed size must equal rank");
    Eigen::PartialPivLU<MatrixXd> lu(seed.S);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) throw ArgumentError("square_init: singular seed submatrix");
    CoefficientState st;
    st.rows_ = f;
    if (capacity < f) capacity = f;
    st.C_.resize(capacity, Q.cols());
    st.C_.topRows(f) = lu.solve(Q);
    st.w_ = st.C_.topRows(f).colwise().squaredNorm();
    return st;
  }

  /// Adopt a precomputed coefficient matrix (used by square maxvol).
  static CoefficientState adopt(MatrixXd C) {
    CoefficientState st;
    st.rows_ = C.rows();
    st.w_ = C.colwise().squaredNorm();
    st.C_ = std::move(C);
    return st;
  }

  Index rows() const { return rows_; }
  Index cols() const { return C_.cols(); }
  auto coefficients() const { return C_.topRows(rows_); }
  const VectorXd& norms() const { return w_; }
  double norm(Index i) const { return w_(i); }
  VectorXd column(Index i) const { return C_.col(i).head(rows_); }

  void reserve(Index capacity) {
    if (capacity > C_.rows()) C_.conservativeResize(capacity, Eigen::NoChange);
  }

  /// Multiplicative rectangular-volume gain of appending column i.
  double volume_gain(Index i) const {
    if (i < 0 || i >= cols()) throw ArgumentError("volume_gain: index out of range");
    return std::sqrt(1.0 + w_(i));
  }

  /// Rank-1 growth: S <- [S, q_i]. Updates C in place,
  ///   C <- [C - c_i c_i^T C / (1 + w_i); c_i^T C / (1 + w_i)]
  /// and every norm w_j <- w_j - (c_i^T c_j)^2 / (1 + w_i).
  void append_column(SeedSet& seed, const MatrixXd& Q, Index i) {
    if (i < 0 || i >= cols()) throw ArgumentError("append_column: index out of range");
    for (Index k : seed.indices)
      if (k == i) throw ArgumentError("append_column: index already in seed");
    const Index L = rows_;
    if (L + 1 > C_.rows()) reserve(std::max<Index>(L + 1, C_.rows() * 2));

    const VectorXd ci = C_.col(i).head(L);
    const double alpha = 1.0 + ci.squaredNorm();
    const VectorXd u = C_.topRows(L).transpose() * ci;  // u_j = c_i^T c_j
    C_.row(L).noalias() = u.transpose() / alpha;
    C_.topRows(L).noalias() -= ci * (u.transpose() / alpha);
    w_.noalias() -= u.cwiseAbs2() / alpha;
    w_ = w_.cwiseMax(0.0);
    ++rows_;

    seed.indices.push_back(i);
    seed.S.conservativeResize(Eigen::NoChange, seed.S.cols() + 1);
    seed.S.col(seed.S.cols() - 1) = Q.col(i);

#ifndef NDEBUG
    if (++appends_since_check_ >= 64) {
      appends_since_check_ = 0;
      VectorXd fresh = C_.topRows(rows_).colwise().squaredNorm();
      double drift = (fresh - w_).cwiseAbs().maxCoeff();
      if (drift > 1e-6 * (1.0 + fresh.maxCoeff()))
        throw std::logic_error("CoefficientState: cached norms drifted from C");
    }
#endif
  }

 private:
  MatrixXd C_;  // capacity x m; first rows_ rows are live
  VectorXd w_;  // m cached squared column norms
  Index rows_ = 0;
#ifndef NDEBUG
  int appends_since_check_ = 0;
#endif
};

inline double volume_gain(const CoefficientState& st, Index i) { return st.volume_gain(i); }

inline void append_column(CoefficientState& st, SeedSet& seed, const MatrixXd& Q, Index i) {
  st.append_column(seed, Q, i);
}

/// f column indices from Gaussian elimination on Q with complete pivoting
/// over the not-yet-selected columns. Ties break to the lowest index.
inline SeedSet lu_pivot_init(const MatrixXd& Q) {
  const Index f = Q.rows();
  const Index m = Q.cols();
  if (f > m) throw ArgumentError("lu_pivot_init: more rows than columns");
  MatrixXd A = Q;
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  std::vector<Index> pivots;
  pivots.reserve(static_cast<std::size_t>(f));
  for (Index step = 0; step < f; ++step) {
    Index best_r = -1, best_c = -1;
    double best = 0.0;
    for (Index c = 0; c < m; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      for (Index r = step; r < f; ++r) {
        double a = std::abs(A(r, c));
        if (a > best) {
          best = a;
          best_r = r;
          best_c = c;
        }
      }
    }
    if (best < 1e-12)
      throw RankDeficiencyError(static_cast<int>(step),
                                "lu_pivot_init: all pivots below 1e-12 at elimination step " +
                                    std::to_string(step));
    A.row(step).swap(A.row(best_r));
    used[static_cast<std::size_t>(best_c)] = true;
    pivots.push_back(best_c);
    for (Index r = step + 1; r < f; ++r) {
      double factor = A(r, best_c) / A(step, best_c);
      A.row(r) -= factor * A.row(step);
    }
  }
  return SeedSet::from_indices(Q, std::move(pivots));
}

struct SquareMaxvolResult {
  SeedSet seed;
  CoefficientState state;
  int swaps = 0;
};

/// Dominant-submatrix iteration: swap the seed column whose coefficient
/// exceeds 1 + tol in modulus for the offending outside column, each swap
/// multiplying |det S| by that coefficient.
inline SquareMaxvolResult square_maxvol(const MatrixXd& Q, const SeedSet& init, double tol,
                                        int max_iters) {
  const Index f = Q.rows();
  const Index m = Q.cols();
  if (init.size() != f) throw ArgumentError("square_maxvol: init seed must have size f");
  if (tol < 0.0) throw ArgumentError("square_maxvol: tol must be nonnegative");
  if (max_iters <= 0) throw ArgumentError("square_maxvol: max_iters must be positive");

  std::vector<Index> k = init.indices;
  Eigen::PartialPivLU<MatrixXd> lu(init.S);
  if (!(lu.rcond() > 1e-14)) throw ArgumentError("square_maxvol: singular initial submatrix");
  MatrixXd C = lu.solve(Q);  // f x m, C(p, j) = coefficient of seed p in column j

  int swaps = 0;
  while (true) {
    Index p = 0, j = 0;
    double best = 0.0;
    for (Index col = 0; col < m; ++col)
      for (Index row = 0; row < f; ++row) {
        double a = std::abs(C(row, col));
        if (a > best) {
          best = a;
          p = row;
          j = col;
        }
      }
    if (best <= 1.0 + tol) break;
    if (swaps >= max_iters)
      throw IterationCapError(std::vector<std::ptrdiff_t>(k.begin(), k.end()),
                              "square_maxvol: iteration cap reached before dominance");
    // Swap seed position p for column j; C' = C - (c_j - e_p) C(p,:) / C(p,j).
    VectorXd cj = C.col(j);
    cj(p) -= 1.0;
    Eigen::RowVectorXd rp = C.row(p) / C(p, j);
    C.noalias() -= cj * rp;
    k[static_cast<std::size_t>(p)] = j;
    ++swaps;
  }

  SquareMaxvolResult out;
  out.seed = SeedSet::from_indices(Q, std::move(k));
  out.state = CoefficientState::adopt(std::move(C));
  out.swaps = swaps;
  return out;
}

struct RectMaxvolOptions {
  bool refine_with_square_maxvol = false;
  double square_tol = 1e-2;
  int square_max_iters = 0;  // 0 -> 2 * f
};

struct RectMaxvolResult {
  SeedSet seed;
  CoefficientState state;
};

namespace detail {

inline SeedSet rect_init(const MatrixXd& Q, const RectMaxvolOptions& opt) {
  SeedSet seed = lu_pivot_init(Q);
  if (opt.refine_with_square_maxvol) {
    int cap = opt.square_max_iters > 0 ? opt.square_max_iters : static_cast<int>(2 * Q.rows());
    seed = square_maxvol(Q, seed, opt.square_tol, cap).seed;
  }
  return seed;
}

/// Greedy loop shared by the fixed-size and auto-stopping entry points.
/// Appends argmax_{i not in k} w_i (ties to the lowest index) while
/// `keep_going` allows it.
template <typename Predicate>
RectMaxvolResult rect_extend(const MatrixXd& Q, SeedSet seed, Index capacity,
                             Predicate keep_going) {
  CoefficientState st = CoefficientState::square_init(Q, seed, capacity);
  std::vector<bool> in_seed(static_cast<std::size_t>(Q.cols()), false);
  for (Index i : seed.indices) in_seed[static_cast<std::size_t>(i)] = true;
  for (;;) {
    Index best = -1;
    double bw = -1.0;
    for (Index i = 0; i < Q.cols(); ++i)
      if (!in_seed[static_cast<std::size_t>(i)] && st.norm(i) > bw) {
        bw = st.norm(i);
        best = i;
      }
    if (best < 0 || !keep_going(seed, bw)) break;
    st.append_column(seed, Q, best);
    in_seed[static_cast<std::size_t>(best)] = true;
  }
  return {std::move(seed), std::move(st)};
}

}  // namespace detail

/// Algorithm: LU-pivot (optionally square-maxvol refined) initialization of
/// f columns, then greedy rectangular-volume extension to L0 columns via
/// the rank-1 coefficient updates.
inline RectMaxvolResult rect_maxvol(const MatrixXd& Q, Index L0,
                                    const RectMaxvolOptions& opt = {}) {
  const Index f = Q.rows();
  if (L0 < f) throw ArgumentError("rect_maxvol: L0 must be at least the rank f");
  if (L0 > Q.cols()) throw ArgumentError("rect_maxvol: L0 exceeds the number of columns");
  SeedSet seed = detail::rect_init(Q, opt);
  return detail::rect_extend(Q, std::move(seed), L0,
                             [L0](const SeedSet& s, double) { return s.size() < L0; });
}

/// Auto-stopping variant: grow until every outside column satisfies
/// w_i <= 1, i.e. all latent vectors lie inside the seed ellipsoid.
inline RectMaxvolResult rect_maxvol_auto(const MatrixXd& Q, const RectMaxvolOptions& opt = {},
                                         Index max_size = 0) {
  if (max_size <= 0) max_size = Q.cols();
  if (max_size > Q.cols()) throw ArgumentError("rect_maxvol_auto: max_size exceeds columns");
  SeedSet seed = detail::rect_init(Q, opt);
  Index cap = std::max<Index>(max_size, seed.size());
  return detail::rect_extend(Q, std::move(seed), cap,
                             [max_size](const SeedSet& s, double max_w) {
                               return max_w > 1.0 && s.size() < max_size;
                             });
}

}  // namespace maxvolcf
