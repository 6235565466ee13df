#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxvolcf/errors.hpp"
#include "maxvolcf/factorization.hpp"
#include "maxvolcf/maxvol.hpp"
#include "maxvolcf/ratings.hpp"

namespace maxvolcf {

enum class Variant { ViaRatings, ViaFactors };
enum class Selector { Square, Rectangular };

inline std::string to_string(Variant v) {
  return v == Variant::ViaRatings ? "ratings" : "factors";
}
inline std::string to_string(Selector s) {
  return s == Selector::Square ? "square" : "rectangular";
}

/// Least-squares coefficients from the rating matrix itself:
/// C_R = (R(:,k)^T R(:,k))^{-1} R(:,k)^T R.
inline MatrixXd coefficients_via_ratings(const RatingMatrix& R, const std::vector<Index>& k) {
  const Index n = R.rows();
  const auto L0 = static_cast<Index>(k.size());
  MatrixXd Rk(n, L0);
  for (Index j = 0; j < L0; ++j) {
    if (k[static_cast<std::size_t>(j)] < 0 || k[static_cast<std::size_t>(j)] >= R.cols())
      throw ArgumentError("coefficients_via_ratings: seed index out of range");
    Rk.col(j) = R.matrix().col(k[static_cast<std::size_t>(j)]);
  }
  MatrixXd gram = Rk.transpose() * Rk;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  const double emax = eig.eigenvalues().maxCoeff();
  const double emin = eig.eigenvalues().minCoeff();
  const double cond = emin > 0.0 ? std::sqrt(emax / emin) : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12))
    throw IllConditioningError(
        cond, "coefficients_via_ratings: Gram matrix condition " + std::to_string(cond) +
                  " exceeds 1e12; try a smaller seed set or the via-factors variant");
  MatrixXd rhs = Rk.transpose() * R.matrix();
  return gram.ldlt().solve(rhs);
}

/// Least-norm coefficients from the latent factors: C = S^+ Q with
/// S^+ = S^T (S S^T)^{-1}, the right pseudoinverse of S = Q(:,k).
inline MatrixXd coefficients_via_factors(const Factorization& F, const std::vector<Index>& k) {
  const Index f = F.Q.rows();
  SeedSet seed = SeedSet::from_indices(F.Q, std::vector<Index>(k.begin(), k.end()));
  Eigen::JacobiSVD<MatrixXd> svd(seed.S);
  if (svd.singularValues()(f - 1) <= 1e-12 * svd.singularValues()(0))
    throw RankDeficiencyError(static_cast<int>(f),
                              "coefficients_via_factors: seed submatrix is rank deficient");
  MatrixXd gram = seed.S * seed.S.transpose();  // f x f
  return seed.S.transpose() * gram.llt().solve(F.Q);
}

/// z = z' C: predicted full rating row from the elicited seed ratings.
inline Eigen::RowVectorXd predict_cold(const Eigen::RowVectorXd& z_prime, const MatrixXd& C_pred) {
  if (z_prime.cols() != C_pred.rows())
    throw ArgumentError("predict_cold: seed rating vector length does not match coefficients");
  return z_prime * C_pred;
}

struct Predictor {
  std::vector<Index> k;
  MatrixXd C_pred;  // L0 x m
  Variant variant = Variant::ViaRatings;
  int f = 0;
  Index L0 = 0;
  std::uint64_t dataset_hash = 0;

  Eigen::RowVectorXd predict(const Eigen::RowVectorXd& z_prime) const {
    return predict_cold(z_prime, C_pred);
  }

  /// Writes `<prefix>.json` (header) and `<prefix>.csv` (coefficients).
  void save(const std::filesystem::path& prefix) const {
    nlohmann::json header = {
        {"schema_version", 1},
        {"variant", to_string(variant)},
        {"f", f},
        {"L0", L0},
        {"k", k},
        {"dataset_hash", dataset_hash},
    };
    std::ofstream jf(prefix.string() + ".json");
    jf << header.dump(2) << '\n';
    std::ofstream cf(prefix.string() + ".csv");
    cf.precision(17);
    for (Index r = 0; r < C_pred.rows(); ++r) {
      for (Index c = 0; c < C_pred.cols(); ++c) {
        if (c) cf << ',';
        cf << C_pred(r, c);
      }
      cf << '\n';
    }
  }

  static Predictor load(const std::filesystem::path& prefix) {
    std::ifstream jf(prefix.string() + ".json");
    if (!jf) throw ArgumentError("Predictor::load: missing header " + prefix.string() + ".json");
    nlohmann::json header = nlohmann::json::parse(jf);
    Predictor p;
    p.variant = header.at("variant") == "ratings" ? Variant::ViaRatings : Variant::ViaFactors;
    p.f = header.at("f");
    p.L0 = header.at("L0");
    p.k = header.at("k").get<std::vector<Index>>();
    p.dataset_hash = header.at("dataset_hash");
    std::ifstream cf(prefix.string() + ".csv");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(cf, line)) {
      std::vector<double> row;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
      rows.push_back(std::move(row));
    }
    p.C_pred.resize(static_cast<Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        p.C_pred(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return p;
  }
};

struct BuildOptions {
  bool auto_size = false;  // rectangular only: grow until max w_i <= 1
  RectMaxvolOptions rect;
  double svd_tol = 1e-8;
};

/// End-to-end predictor construction: PureSVD, seed selection, coefficients.
inline Predictor build_predictor(const RatingMatrix& R, int f, Index L0, Variant variant,
                                 Selector selector, const BuildOptions& opt = {}) {
  if (selector == Selector::Square && !opt.auto_size && L0 != f)
    throw ArgumentError("build_predictor: square selector requires L0 == f");
  if (selector == Selector::Square && opt.auto_size)
    throw ArgumentError("build_predictor: auto seed size requires the rectangular selector");
  if (!opt.auto_size && (L0 < f || L0 > R.cols()))
    throw ArgumentError("build_predictor: requires f <= L0 <= item count");

  Factorization F = pure_svd(R, f, opt.svd_tol);
  std::vector<Index> k;
  if (selector == Selector::Square) {
    SeedSet init = lu_pivot_init(F.Q);
    auto res = square_maxvol(F.Q, init, opt.rect.square_tol,
                             opt.rect.square_max_iters > 0 ? opt.rect.square_max_iters
                                                           : static_cast<int>(4 * f + 16));
    k = res.seed.indices;
  } else {
    auto res = opt.auto_size ? rect_maxvol_auto(F.Q, opt.rect) : rect_maxvol(F.Q, L0, opt.rect);
    k = res.seed.indices;
  }

  Predictor p;
  p.k = k;
  p.variant = variant;
  p.f = f;
  p.L0 = static_cast<Index>(k.size());
  p.dataset_hash = R.content_hash();
  p.C_pred = variant == Variant::ViaRatings ? coefficients_via_ratings(R, k)
                                            : coefficients_via_factors(F, k);
  return p;
}

}  // namespace maxvolcf
