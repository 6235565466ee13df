#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "maxvolcf/errors.hpp"
#include "maxvolcf/ratings.hpp"

namespace maxvolcf {

/// Rank-f PureSVD factor pair. R ~= P^T Q with P = Sigma U^T (singular
/// values absorbed into the user side) and Q = V^T, so Q has orthonormal rows.
struct Factorization {
  int f = 0;
  Eigen::MatrixXd P;  // f x n, user factors in columns
  Eigen::MatrixXd Q;  // f x m, item factors in columns
  Eigen::VectorXd singular_values;  // length f, nonincreasing

  double predicted_rating(Eigen::Index u, Eigen::Index i) const {
    if (u < 0 || u >= P.cols() || i < 0 || i >= Q.cols())
      throw ArgumentError("predicted_rating: index out of range");
    return P.col(u).dot(Q.col(i));
  }
};

/// Keeps the leading f components of an already computed factorization.
inline Factorization truncate(const Factorization& full, int f) {
  if (f <= 0 || f > full.f) throw ArgumentError("truncate: bad rank");
  Factorization out;
  out.f = f;
  out.P = full.P.topRows(f);
  out.Q = full.Q.topRows(f);
  out.singular_values = full.singular_values.head(f);
  return out;
}

/// Truncated SVD of the sparse rating matrix; unknown entries participate
/// as exact zeros. Dense BDC solver: exact (no iteration) at the scales
/// this toolkit targets, tol is recorded for the contract only.
inline Factorization pure_svd(const RatingMatrix& R, int f, double tol = 1e-8) {
  (void)tol;
  const auto n = R.rows();
  const auto m = R.cols();
  if (f <= 0) throw ArgumentError("pure_svd: rank must be positive");
  if (f > std::min(n, m)) throw ArgumentError("pure_svd: rank exceeds min(n, m)");
  if (R.nnz() == 0) throw ArgumentError("pure_svd: empty rating matrix");

  Eigen::MatrixXd dense = Eigen::MatrixXd(R.matrix());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw ConvergenceError(-1.0, "pure_svd: SVD solver did not converge");

  Factorization out;
  out.f = f;
  out.singular_values = svd.singularValues().head(f);
  Eigen::MatrixXd Uf = svd.matrixU().leftCols(f);
  Eigen::MatrixXd Vf = svd.matrixV().leftCols(f);
  // Sign convention: largest-magnitude entry of each right singular vector
  // is positive, so repeated runs produce identical factors.
  for (int s = 0; s < f; ++s) {
    Eigen::Index idx;
    Vf.col(s).cwiseAbs().maxCoeff(&idx);
    if (Vf(idx, s) < 0.0) {
      Vf.col(s) = -Vf.col(s);
      Uf.col(s) = -Uf.col(s);
    }
  }
  out.P = out.singular_values.asDiagonal() * Uf.transpose();
  out.Q = Vf.transpose();
  return out;
}

namespace detail {

inline void write_matrix(std::ofstream& out, const Eigen::MatrixXd& M) {
  std::int64_t r = M.rows(), c = M.cols();
  out.write(reinterpret_cast<const char*>(&r), sizeof(r));
  out.write(reinterpret_cast<const char*>(&c), sizeof(c));
  out.write(reinterpret_cast<const char*>(M.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(r * c)));
}

inline Eigen::MatrixXd read_matrix(std::ifstream& in) {
  std::int64_t r = 0, c = 0;
  in.read(reinterpret_cast<char*>(&r), sizeof(r));
  in.read(reinterpret_cast<char*>(&c), sizeof(c));
  Eigen::MatrixXd M(r, c);
  in.read(reinterpret_cast<char*>(M.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(r * c)));
  return M;
}

}  // namespace detail

constexpr std::uint32_t kFactorCacheMagic = 0x4d564346;  // "MVCF"

inline void save_factorization(const Factorization& F, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(reinterpret_cast<const char*>(&kFactorCacheMagic), sizeof(kFactorCacheMagic));
    std::int32_t f = F.f;
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    detail::write_matrix(out, F.P);
    detail::write_matrix(out, F.Q);
    detail::write_matrix(out, F.singular_values);
  }
  std::filesystem::rename(tmp, path);
}

inline bool load_factorization(const std::filesystem::path& path, Factorization& F) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint32_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  if (magic != kFactorCacheMagic) return false;
  std::int32_t f = 0;
  in.read(reinterpret_cast<char*>(&f), sizeof(f));
  F.f = f;
  F.P = detail::read_matrix(in);
  F.Q = detail::read_matrix(in);
  F.singular_values = detail::read_matrix(in);
  return static_cast<bool>(in);
}

/// On-disk cache keyed by (dataset hash, rank, solver tag). A cached
/// rank >= f is truncated instead of recomputed.
inline Factorization cached_pure_svd(const RatingMatrix& R, int f,
                                     const std::filesystem::path& cache_dir,
                                     double tol = 1e-8) {
  if (cache_dir.empty()) return pure_svd(R, f, tol);
  std::filesystem::create_directories(cache_dir);
  char name[64];
  std::snprintf(name, sizeof(name), "svd_%016llx_f%d_bdc.bin",
                static_cast<unsigned long long>(R.content_hash()), f);
  auto path = cache_dir / name;
  Factorization F;
  if (load_factorization(path, F) && F.f == f) return F;
  F = pure_svd(R, f, tol);
  save_factorization(F, path);
  return F;
}

}  // namespace maxvolcf
