#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "maxvolcf/elicitation.hpp"
#include "maxvolcf/factorization.hpp"
#include "maxvolcf/maxvol.hpp"
#include "maxvolcf/ratings.hpp"

namespace maxvolcf {

inline double precision_at_k(const std::vector<Index>& ranked,
                             const std::unordered_set<Index>& relevant, int k) {
  if (k <= 0) throw ArgumentError("precision_at_k: k must be positive");
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  if (take == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < take; ++i) hits += relevant.count(ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

inline double recall_at_k(const std::vector<Index>& ranked,
                          const std::unordered_set<Index>& relevant, int k) {
  if (k <= 0) throw ArgumentError("recall_at_k: k must be positive");
  if (relevant.empty()) return 0.0;
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < take; ++i) hits += relevant.count(ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

/// Fraction of cold-axis entities with at least one known rating among the
/// seed items (toolkit definition; the paper defers to its references).
inline double coverage(const RatingMatrix& R, const std::vector<Index>& k) {
  if (R.rows() == 0) return 0.0;
  std::vector<bool> hit(static_cast<std::size_t>(R.rows()), false);
  for (Index col : k) {
    if (col < 0 || col >= R.cols()) throw ArgumentError("coverage: seed index out of range");
    for (RatingMatrix::Sparse::InnerIterator it(R.matrix(), static_cast<int>(col)); it; ++it)
      hit[static_cast<std::size_t>(it.row())] = true;
  }
  auto covered = std::count(hit.begin(), hit.end(), true);
  return static_cast<double>(covered) / static_cast<double>(R.rows());
}

/// 1 - mean pairwise |cos| similarity of the seed latent vectors
/// (toolkit definition).
inline double diversity(const Factorization& F, const std::vector<Index>& k) {
  if (k.size() < 2) throw ArgumentError("diversity: need at least two seed items");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < k.size(); ++a)
    for (std::size_t b = a + 1; b < k.size(); ++b) {
      const auto qa = F.Q.col(k[a]);
      const auto qb = F.Q.col(k[b]);
      double den = qa.norm() * qb.norm();
      total += den > 0.0 ? std::abs(qa.dot(qb)) / den : 1.0;
      ++pairs;
    }
  return 1.0 - total / static_cast<double>(pairs);
}

enum class ColdStartMode { User, Item };

struct EvalConfig {
  Selector selector = Selector::Rectangular;
  int f = 10;
  Index L0 = 10;
  bool auto_size = false;
  Variant variant = Variant::ViaRatings;
  std::vector<int> k_list = {10};
  ColdStartMode mode = ColdStartMode::User;
  double relevance_threshold = 4.0;
  RectMaxvolOptions rect;
};

struct FoldMetrics {
  int fold = 0;
  int cold_count = 0;
  Index seed_size = 0;
  std::map<int, double> precision;  // k -> mean over cold entities
  std::map<int, double> recall;
  double coverage = 0.0;
  double diversity = 0.0;
};

struct EvalReport {
  std::vector<FoldMetrics> per_fold;
  std::map<int, double> mean_precision, sigma_precision;
  std::map<int, double> mean_recall, sigma_recall;
  double mean_coverage = 0.0;
  double mean_diversity = 0.0;
  nlohmann::json config;

  nlohmann::json to_json() const {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& fm : per_fold) {
      nlohmann::json pf = {{"fold", fm.fold},
                           {"cold_count", fm.cold_count},
                           {"seed_size", fm.seed_size},
                           {"coverage", fm.coverage},
                           {"diversity", fm.diversity}};
      for (const auto& [k, v] : fm.precision) pf["precision_at"][std::to_string(k)] = v;
      for (const auto& [k, v] : fm.recall) pf["recall_at"][std::to_string(k)] = v;
      folds.push_back(pf);
    }
    nlohmann::json agg;
    for (const auto& [k, v] : mean_precision) {
      agg["precision_at"][std::to_string(k)] = {{"mean", v}, {"sigma", sigma_precision.at(k)}};
      agg["recall_at"][std::to_string(k)] = {{"mean", mean_recall.at(k)},
                                             {"sigma", sigma_recall.at(k)}};
    }
    agg["coverage"] = mean_coverage;
    agg["diversity"] = mean_diversity;
    return {{"schema_version", 1}, {"config", config}, {"per_fold", folds}, {"aggregate", agg}};
  }
};

namespace detail {

/// Metrics of one fold given a ready train-side factorization.
inline FoldMetrics evaluate_fold(const RatingMatrix& R, const std::vector<Index>& cold,
                                 const RatingMatrix& train, const Factorization& F,
                                 const EvalConfig& cfg, int fold_id) {
  std::vector<Index> k;
  if (cfg.selector == Selector::Square) {
    auto res = square_maxvol(F.Q, lu_pivot_init(F.Q), cfg.rect.square_tol,
                             cfg.rect.square_max_iters > 0 ? cfg.rect.square_max_iters
                                                           : static_cast<int>(4 * cfg.f + 16));
    k = res.seed.indices;
  } else {
    auto res = cfg.auto_size ? rect_maxvol_auto(F.Q, cfg.rect)
                             : rect_maxvol(F.Q, cfg.L0, cfg.rect);
    k = res.seed.indices;
  }
  MatrixXd C = cfg.variant == Variant::ViaRatings ? coefficients_via_ratings(train, k)
                                                  : coefficients_via_factors(F, k);

  std::unordered_set<Index> seed_set(k.begin(), k.end());
  FoldMetrics fm;
  fm.fold = fold_id;
  fm.seed_size = static_cast<Index>(k.size());
  fm.coverage = coverage(train, k);
  fm.diversity = diversity(F, k);

  const Index m = R.cols();
  std::vector<Index> candidates;
  candidates.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i)
    if (!seed_set.count(i)) candidates.push_back(i);

  // Dense block of the cold rows; one sparse pass instead of per-entry probes.
  MatrixXd cold_rows = MatrixXd(R.select_rows(cold).matrix());

  std::map<int, double> psum, rsum;
  for (int kk : cfg.k_list) psum[kk] = rsum[kk] = 0.0;
  int counted = 0;
  for (Index row = 0; row < cold_rows.rows(); ++row) {
    Eigen::RowVectorXd zp(static_cast<Index>(k.size()));
    for (std::size_t j = 0; j < k.size(); ++j) zp(static_cast<Index>(j)) = cold_rows(row, k[j]);
    Eigen::RowVectorXd z = zp * C;

    std::unordered_set<Index> relevant;
    for (Index i : candidates)
      if (cold_rows(row, i) >= cfg.relevance_threshold) relevant.insert(i);

    std::vector<Index> ranked = candidates;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&z](Index a, Index b) { return z(a) > z(b); });

    for (int kk : cfg.k_list) {
      psum[kk] += precision_at_k(ranked, relevant, kk);
      rsum[kk] += recall_at_k(ranked, relevant, kk);
    }
    ++counted;
  }
  fm.cold_count = counted;
  for (int kk : cfg.k_list) {
    fm.precision[kk] = counted > 0 ? psum[kk] / counted : 0.0;
    fm.recall[kk] = counted > 0 ? rsum[kk] / counted : 0.0;
  }
  return fm;
}

inline void aggregate(EvalReport& rep, const std::vector<int>& k_list) {
  for (int kk : k_list) {
    double pm = 0.0, rm = 0.0;
    for (const auto& fm : rep.per_fold) {
      pm += fm.precision.at(kk);
      rm += fm.recall.at(kk);
    }
    const auto nf = static_cast<double>(rep.per_fold.size());
    pm /= nf;
    rm /= nf;
    double pv = 0.0, rv = 0.0;
    for (const auto& fm : rep.per_fold) {
      pv += (fm.precision.at(kk) - pm) * (fm.precision.at(kk) - pm);
      rv += (fm.recall.at(kk) - rm) * (fm.recall.at(kk) - rm);
    }
    rep.mean_precision[kk] = pm;
    rep.sigma_precision[kk] = std::sqrt(pv / nf);
    rep.mean_recall[kk] = rm;
    rep.sigma_recall[kk] = std::sqrt(rv / nf);
  }
  double cov = 0.0, div = 0.0;
  for (const auto& fm : rep.per_fold) {
    cov += fm.coverage;
    div += fm.diversity;
  }
  rep.mean_coverage = cov / static_cast<double>(rep.per_fold.size());
  rep.mean_diversity = div / static_cast<double>(rep.per_fold.size());
}

}  // namespace detail

/// The fold protocol: for each fold, train on the warm folds, elicit the
/// cold entities' seed ratings (0 where unknown), rank the non-seed items
/// by predicted score and average Precision@k / Recall@k. Item cold start
/// runs the same pipeline on the transposed matrix.
inline EvalReport evaluate_cold_start(const RatingMatrix& R_in, const FoldSplit& folds,
                                      const EvalConfig& cfg) {
  const RatingMatrix R = cfg.mode == ColdStartMode::Item ? R_in.transpose() : R_in;
  if (static_cast<Index>(folds.assignments.size()) != R.rows())
    throw ArgumentError("evaluate_cold_start: fold split does not match cold-axis size");

  EvalReport rep;
  rep.config = {{"selector", to_string(cfg.selector)},
                {"f", cfg.f},
                {"L0", cfg.auto_size ? -1 : cfg.L0},
                {"auto_size", cfg.auto_size},
                {"variant", to_string(cfg.variant)},
                {"mode", cfg.mode == ColdStartMode::User ? "user" : "item"},
                {"k_list", cfg.k_list},
                {"relevance_threshold", cfg.relevance_threshold},
                {"fold_count", folds.fold_count},
                {"fold_seed", folds.seed}};

  for (int fold = 0; fold < folds.fold_count; ++fold) {
    auto cold = folds.members_of(fold);
    RatingMatrix train = R.select_rows(folds.complement_of(fold));
    // A fold is skipped only if no cold entity holds any relevant item.
    RatingMatrix cold_block = R.select_rows(cold);
    bool any_relevant = false;
    const auto& cb = cold_block.matrix();
    for (int c = 0; c < cb.outerSize() && !any_relevant; ++c)
      for (RatingMatrix::Sparse::InnerIterator it(cb, c); it; ++it)
        if (it.value() >= cfg.relevance_threshold) {
          any_relevant = true;
          break;
        }
    if (!any_relevant) {
      std::cerr << "warning: fold " << fold << " has no cold entity with a relevant item; skipped\n";
      continue;
    }
    Factorization F = pure_svd(train, cfg.f);
    rep.per_fold.push_back(detail::evaluate_fold(R, cold, train, F, cfg, fold));
  }
  if (!rep.per_fold.empty()) detail::aggregate(rep, cfg.k_list);
  return rep;
}

struct SweepCell {
  Selector selector = Selector::Rectangular;
  int f = 0;
  Index L0 = 0;
  EvalReport report;
  bool best_rank = false;  // best f for this (selector, L0) by validation metric
};

/// Full (L0, f) grid of the evaluation protocol. Rectangular cells with
/// f > L0 are skipped. Factorizations are computed once per (fold, f).
inline std::vector<SweepCell> sweep(const RatingMatrix& R_in, const FoldSplit& folds,
                                    const std::vector<Index>& seed_sizes,
                                    const std::vector<int>& rank_grid, EvalConfig base) {
  const RatingMatrix R = base.mode == ColdStartMode::Item ? R_in.transpose() : R_in;
  if (static_cast<Index>(folds.assignments.size()) != R.rows())
    throw ArgumentError("sweep: fold split does not match cold-axis size");

  struct FoldData {
    std::vector<Index> cold;
    RatingMatrix train;
    std::map<int, Factorization> factors;  // f -> factorization of train
  };
  std::vector<FoldData> fold_data;
  for (int fold = 0; fold < folds.fold_count; ++fold) {
    FoldData fd;
    fd.cold = folds.members_of(fold);
    fd.train = R.select_rows(folds.complement_of(fold));
    fold_data.push_back(std::move(fd));
  }
  int f_max = 0;
  for (Index L : seed_sizes) f_max = std::max(f_max, static_cast<int>(L));
  for (int f : rank_grid) f_max = std::max(f_max, f);
  for (auto& fd : fold_data) {
    Factorization full = pure_svd(fd.train, std::min<int>(f_max, static_cast<int>(std::min(
                                                                     fd.train.rows(), fd.train.cols()))));
    std::vector<int> ranks(rank_grid);
    for (Index L : seed_sizes) ranks.push_back(static_cast<int>(L));
    for (int f : ranks)
      if (f <= full.f) fd.factors.emplace(f, truncate(full, f));
  }

  auto run_cell = [&](Selector sel, int f, Index L0) {
    EvalConfig cfg = base;
    cfg.selector = sel;
    cfg.f = f;
    cfg.L0 = L0;
    cfg.auto_size = false;
    SweepCell cell;
    cell.selector = sel;
    cell.f = f;
    cell.L0 = L0;
    cell.report.config = {{"selector", to_string(sel)}, {"f", f}, {"L0", L0}};
    for (int fold = 0; fold < folds.fold_count; ++fold) {
      auto& fd = fold_data[static_cast<std::size_t>(fold)];
      cell.report.per_fold.push_back(
          detail::evaluate_fold(R, fd.cold, fd.train, fd.factors.at(f), cfg, fold));
    }
    detail::aggregate(cell.report, cfg.k_list);
    return cell;
  };

  std::vector<SweepCell> cells;
  const int headline_k = base.k_list.front();
  for (Index L0 : seed_sizes) {
    // Square selector: rank is tied to the seed set size.
    if (fold_data.front().factors.count(static_cast<int>(L0)))
      cells.push_back(run_cell(Selector::Square, static_cast<int>(L0), L0));
    // Rectangular selector over the rank grid, marking the best rank.
    std::size_t best_idx = 0;
    double best_val = -1.0;
    std::size_t first = cells.size();
    for (int f : rank_grid) {
      if (f > static_cast<Index>(L0)) continue;
      cells.push_back(run_cell(Selector::Rectangular, f, L0));
      double v = cells.back().report.mean_precision.at(headline_k);
      if (v > best_val) {
        best_val = v;
        best_idx = cells.size() - 1;
      }
    }
    if (cells.size() > first) cells[best_idx].best_rank = true;
  }
  return cells;
}

/// Plot-ready CSV: one row per (cell, metric, k).
inline std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out.precision(12);
  out << "schema_version,selector,f,L0,metric,k,mean,sigma,best_rank\n";
  for (const auto& c : cells) {
    for (const auto& [k, v] : c.report.mean_precision)
      out << 1 << ',' << to_string(c.selector) << ',' << c.f << ',' << c.L0 << ",precision," << k
          << ',' << v << ',' << c.report.sigma_precision.at(k) << ',' << (c.best_rank ? 1 : 0)
          << '\n';
    for (const auto& [k, v] : c.report.mean_recall)
      out << 1 << ',' << to_string(c.selector) << ',' << c.f << ',' << c.L0 << ",recall," << k
          << ',' << v << ',' << c.report.sigma_recall.at(k) << ',' << (c.best_rank ? 1 : 0)
          << '\n';
  }
  return out.str();
}

}  // namespace maxvolcf
