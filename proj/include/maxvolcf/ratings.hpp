#pragma once

#include <Eigen/SparseCore>
#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "maxvolcf/errors.hpp"

namespace maxvolcf {

struct RatingTriplet {
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  double rating = 0.0;
};

/// Sparse user x item rating matrix. Stored entries are always > 0;
/// an absent entry means "unknown" and reads as 0.
class RatingMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<double>;  // column-major

  RatingMatrix() = default;
  RatingMatrix(Sparse mat, std::vector<std::int64_t> row_ids,
               std::vector<std::int64_t> col_ids)
      : mat_(std::move(mat)),
        row_ids_(std::move(row_ids)),
        col_ids_(std::move(col_ids)) {
    for (std::size_t i = 0; i < row_ids_.size(); ++i) row_index_[row_ids_[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < col_ids_.size(); ++i) col_index_[col_ids_[i]] = static_cast<int>(i);
  }

  Eigen::Index rows() const { return mat_.rows(); }
  Eigen::Index cols() const { return mat_.cols(); }
  Eigen::Index nnz() const { return mat_.nonZeros(); }
  const Sparse& matrix() const { return mat_; }

  double entry(Eigen::Index u, Eigen::Index i) const { return mat_.coeff(u, i); }

  const std::vector<std::int64_t>& row_ids() const { return row_ids_; }
  const std::vector<std::int64_t>& col_ids() const { return col_ids_; }

  RatingMatrix transpose() const {
    Sparse t = mat_.transpose();
    t.makeCompressed();
    return RatingMatrix(std::move(t), col_ids_, row_ids_);
  }

  /// Submatrix keeping only the given rows (in the given order).
  RatingMatrix select_rows(const std::vector<Eigen::Index>& keep) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(nnz()));
    std::vector<Eigen::Index> pos(static_cast<std::size_t>(rows()), -1);
    std::vector<std::int64_t> ids;
    ids.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
      pos[static_cast<std::size_t>(keep[r])] = static_cast<Eigen::Index>(r);
      ids.push_back(row_ids_[static_cast<std::size_t>(keep[r])]);
    }
    for (int c = 0; c < mat_.outerSize(); ++c) {
      for (Sparse::InnerIterator it(mat_, c); it; ++it) {
        Eigen::Index r = pos[static_cast<std::size_t>(it.row())];
        if (r >= 0) trips.emplace_back(static_cast<int>(r), c, it.value());
      }
    }
    Sparse sub(static_cast<Eigen::Index>(keep.size()), cols());
    sub.setFromTriplets(trips.begin(), trips.end());
    sub.makeCompressed();
    return RatingMatrix(std::move(sub), std::move(ids), col_ids_);
  }

  std::vector<RatingTriplet> triplets() const {
    std::vector<RatingTriplet> out;
    out.reserve(static_cast<std::size_t>(nnz()));
    for (int c = 0; c < mat_.outerSize(); ++c)
      for (Sparse::InnerIterator it(mat_, c); it; ++it)
        out.push_back({row_ids_[static_cast<std::size_t>(it.row())],
                       col_ids_[static_cast<std::size_t>(it.col())], it.value()});
    return out;
  }

  /// FNV-1a over the canonical triplet stream; used as a cache key.
  std::uint64_t content_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
      const auto* b = static_cast<const unsigned char*>(p);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
      }
    };
    auto trips = triplets();
    std::sort(trips.begin(), trips.end(), [](const RatingTriplet& a, const RatingTriplet& b) {
      return std::tie(a.user_id, a.item_id) < std::tie(b.user_id, b.item_id);
    });
    for (const auto& t : trips) {
      mix(&t.user_id, sizeof(t.user_id));
      mix(&t.item_id, sizeof(t.item_id));
      mix(&t.rating, sizeof(t.rating));
    }
    return h;
  }

 private:
  Sparse mat_;
  std::vector<std::int64_t> row_ids_, col_ids_;
  std::unordered_map<std::int64_t, int> row_index_, col_index_;
};

struct CsvFormat {
  char delimiter = ',';
  bool has_header = false;
};

inline RatingMatrix ratings_from_triplets(const std::vector<RatingTriplet>& trips) {
  // Last occurrence of a (user, item) pair wins.
  std::unordered_map<std::int64_t, int> row_index, col_index;
  std::vector<std::int64_t> row_ids, col_ids;
  std::map<std::pair<int, int>, double> cells;
  for (const auto& t : trips) {
    auto [ru, inserted_u] = row_index.try_emplace(t.user_id, static_cast<int>(row_ids.size()));
    if (inserted_u) row_ids.push_back(t.user_id);
    auto [ri, inserted_i] = col_index.try_emplace(t.item_id, static_cast<int>(col_ids.size()));
    if (inserted_i) col_ids.push_back(t.item_id);
    cells[{ru->second, ri->second}] = t.rating;
  }
  std::vector<Eigen::Triplet<double>> et;
  et.reserve(cells.size());
  for (const auto& [rc, v] : cells) et.emplace_back(rc.first, rc.second, v);
  RatingMatrix::Sparse mat(static_cast<Eigen::Index>(row_ids.size()),
                           static_cast<Eigen::Index>(col_ids.size()));
  mat.setFromTriplets(et.begin(), et.end());
  mat.makeCompressed();
  return RatingMatrix(std::move(mat), std::move(row_ids), std::move(col_ids));
}

/// Parses `user,item,rating[,timestamp]` lines. Timestamps are discarded.
inline RatingMatrix parse_ratings(std::istream& in, const CsvFormat& fmt = {}) {
  std::vector<RatingTriplet> trips;
  std::string line;
  std::size_t lineno = 0;
  bool skip_header = fmt.has_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_header) {
      skip_header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, fmt.delimiter)) fields.push_back(field);
    if (fields.size() < 3) throw ParseError(lineno, "expected user,item,rating");
    RatingTriplet t;
    try {
      std::size_t pos = 0;
      t.user_id = std::stoll(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument(fields[0]);
      t.item_id = std::stoll(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument(fields[1]);
      t.rating = std::stod(fields[2], &pos);
      if (pos != fields[2].size()) throw std::invalid_argument(fields[2]);
    } catch (const std::logic_error&) {
      throw ParseError(lineno, "malformed field in '" + line + "'");
    }
    if (!(t.rating > 0.0 && t.rating <= 10.0))
      throw ParseError(lineno, "rating " + fields[2] + " outside (0, 10]");
    trips.push_back(t);
  }
  if (trips.empty()) throw ParseError(lineno, "no rating triplets in input");
  return ratings_from_triplets(trips);
}

/// Canonical triplet CSV, sorted by external (user, item) ids.
inline std::string serialize_ratings(const RatingMatrix& R) {
  auto trips = R.triplets();
  std::sort(trips.begin(), trips.end(), [](const RatingTriplet& a, const RatingTriplet& b) {
    return std::tie(a.user_id, a.item_id) < std::tie(b.user_id, b.item_id);
  });
  std::ostringstream out;
  out.precision(17);
  for (const auto& t : trips) out << t.user_id << ',' << t.item_id << ',' << t.rating << '\n';
  return out.str();
}

struct FoldSplit {
  int fold_count = 0;
  std::vector<int> assignments;  // entity -> fold id
  std::uint64_t seed = 0;

  std::vector<Eigen::Index> members_of(int fold) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(static_cast<Eigen::Index>(i));
    return out;
  }
  std::vector<Eigen::Index> complement_of(int fold) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(static_cast<Eigen::Index>(i));
    return out;
  }
};

/// Deterministic near-equal partition: fold sizes differ by at most one.
inline FoldSplit split_folds(int entity_count, int fold_count, std::uint64_t seed) {
  if (fold_count <= 0 || entity_count <= 0)
    throw ArgumentError("entity_count and fold_count must be positive");
  if (fold_count > entity_count)
    throw ArgumentError("fold_count exceeds entity count");
  std::vector<int> perm(static_cast<std::size_t>(entity_count));
  for (int i = 0; i < entity_count; ++i) perm[static_cast<std::size_t>(i)] = i;
  // Hand-rolled Fisher-Yates so the assignment is stable across stdlibs.
  std::mt19937_64 rng(seed);
  for (int i = entity_count - 1; i > 0; --i) {
    auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  FoldSplit split;
  split.fold_count = fold_count;
  split.seed = seed;
  split.assignments.resize(static_cast<std::size_t>(entity_count));
  for (int i = 0; i < entity_count; ++i)
    split.assignments[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i % fold_count;
  return split;
}

/// True exactly where a stored rating is >= threshold.
inline Eigen::SparseMatrix<bool> binarize_relevance(const RatingMatrix& R, double threshold) {
  std::vector<Eigen::Triplet<bool>> trips;
  const auto& m = R.matrix();
  for (int c = 0; c < m.outerSize(); ++c)
    for (RatingMatrix::Sparse::InnerIterator it(m, c); it; ++it)
      if (it.value() >= threshold)
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), true);
  Eigen::SparseMatrix<bool> out(R.rows(), R.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

}  // namespace maxvolcf
