#pragma once

#include <Eigen/Dense>
#include <random>
#include <sstream>
#include <vector>

#include "maxvolcf/ratings.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = gauss(rng);
  return M;
}

inline maxvolcf::RatingMatrix random_sparse_ratings(std::mt19937_64& rng, int n, int m,
                                                    double density) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> star(1, 5);
  std::vector<maxvolcf::RatingTriplet> trips;
  for (int u = 0; u < n; ++u)
    for (int i = 0; i < m; ++i)
      if (unif(rng) < density) trips.push_back({u + 1, i + 1, static_cast<double>(star(rng))});
  // guarantee every row and column has at least one entry
  for (int u = 0; u < n; ++u) trips.push_back({u + 1, 1 + static_cast<int>(rng() % m),
                                               static_cast<double>(star(rng))});
  for (int i = 0; i < m; ++i) trips.push_back({1 + static_cast<int>(rng() % n), i + 1,
                                               static_cast<double>(star(rng))});
  return maxvolcf::ratings_from_triplets(trips);
}

/// Synthetic star-rating dataset with low-rank preference structure plus
/// noise, on a MovieLens-like scale. Deterministic in the seed.
inline maxvolcf::RatingMatrix synthetic_dataset(std::uint64_t seed, int n, int m, int true_rank,
                                                double density, double noise_sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd U = random_matrix(rng, n, true_rank) / std::sqrt(static_cast<double>(true_rank));
  Eigen::MatrixXd V = random_matrix(rng, m, true_rank);
  // Popularity skew: some items are rated far more often than others.
  std::vector<double> item_pop(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) item_pop[static_cast<std::size_t>(i)] = std::pow(unif(rng), 2.0);
  double pop_mean = 0.0;
  for (double p : item_pop) pop_mean += p;
  pop_mean /= m;

  std::vector<maxvolcf::RatingTriplet> trips;
  for (int u = 0; u < n; ++u) {
    for (int i = 0; i < m; ++i) {
      double p = density * item_pop[static_cast<std::size_t>(i)] / pop_mean;
      if (unif(rng) >= p) continue;
      double score = 3.5 + 1.2 * U.row(u).dot(V.row(i)) + noise_sigma * gauss(rng);
      double stars = std::clamp(std::round(score), 1.0, 5.0);
      trips.push_back({u + 1, i + 1, stars});
    }
  }
  return maxvolcf::ratings_from_triplets(trips);
}

}  // namespace testutil
