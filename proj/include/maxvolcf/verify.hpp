#pragma once

#include <Eigen/Dense>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "maxvolcf/maxvol.hpp"
#include "maxvolcf/oracle.hpp"

namespace maxvolcf {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int instances = 50;
  /// Test-harness hook: additive error injected into each cached norm after
  /// every append, to confirm the suite detects a broken update rule.
  double inject_w_error = 0.0;
};

/// Capped oracle-equivalence suite behind the CLI `verify` subcommand.
inline std::vector<VerifyCheck> run_verification(const VerifyOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_matrix = [&](Index r, Index c) {
    MatrixXd M(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) M(i, j) = gauss(rng);
    return M;
  };

  std::vector<VerifyCheck> checks;
  auto record = [&checks](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
  };

  // Volume identity: Rectvol([S, q_i]) = Rectvol(S) * sqrt(1 + w_i).
  {
    double worst = 0.0;
    for (int t = 0; t < opt.instances; ++t) {
      Index f = 2 + static_cast<Index>(rng() % 3);
      Index m = f + 2 + static_cast<Index>(rng() % 8);
      MatrixXd Q = random_matrix(f, m);
      auto res = rect_maxvol(Q, std::min<Index>(f + 1 + static_cast<Index>(rng() % 2), m));
      for (Index i = 0; i < m; ++i) {
        bool in_seed = false;
        for (Index s : res.seed.indices) in_seed |= (s == i);
        if (in_seed) continue;
        MatrixXd ext(f, res.seed.S.cols() + 1);
        ext << res.seed.S, Q.col(i);
        double direct = rectangular_volume(ext);
        double via_gain = rectangular_volume(res.seed.S) * res.state.volume_gain(i);
        worst = std::max(worst, std::abs(direct - via_gain) / std::max(direct, 1e-300));
      }
    }
    std::ostringstream d;
    d << "max relative deviation " << worst;
    record("volume-identity", worst <= 1e-8, d.str());
  }

  // Rank-1 update equals pseudoinverse recomputation.
  {
    double worst_c = 0.0, worst_w = 0.0;
    for (int t = 0; t < opt.instances; ++t) {
      Index f = 2 + static_cast<Index>(rng() % 3);
      Index m = f + 4 + static_cast<Index>(rng() % 10);
      MatrixXd Q = random_matrix(f, m);
      SeedSet seed = lu_pivot_init(Q);
      CoefficientState st = CoefficientState::square_init(Q, seed, m);
      Index L0 = std::min<Index>(f + 3, m);
      std::mt19937_64 pick(rng());
      while (seed.size() < L0) {
        std::vector<Index> outside;
        for (Index i = 0; i < m; ++i) {
          bool in = false;
          for (Index s : seed.indices) in |= (s == i);
          if (!in) outside.push_back(i);
        }
        Index i = outside[pick() % outside.size()];
        st.append_column(seed, Q, i);
        MatrixXd C_ref = oracle::pinv_oracle(seed.S) * Q;
        VectorXd w_ref = C_ref.colwise().squaredNorm();
        double cerr = (MatrixXd(st.coefficients()) - C_ref).norm() / std::max(C_ref.norm(), 1e-300);
        VectorXd w_live = st.norms();
        if (opt.inject_w_error != 0.0) w_live.array() += opt.inject_w_error;
        double werr = (w_live - w_ref).cwiseAbs().maxCoeff();
        worst_c = std::max(worst_c, cerr);
        worst_w = std::max(worst_w, werr);
      }
    }
    std::ostringstream d;
    d << "max C deviation " << worst_c << ", max w deviation " << worst_w;
    record("rank1-update-equivalence", worst_c <= 1e-8 && worst_w <= 1e-8, d.str());
  }

  // Greedy selection matches the naive rectangular-volume oracle.
  {
    bool all_equal = true;
    std::string detail = "all index sequences identical";
    for (int t = 0; t < opt.instances && all_equal; ++t) {
      Index f = 2 + static_cast<Index>(rng() % 3);
      Index m = f + 4 + static_cast<Index>(rng() % 16);
      Index L0 = std::min<Index>(f + 2 + static_cast<Index>(rng() % 4), m);
      MatrixXd Q = random_matrix(f, m);
      SeedSet init = lu_pivot_init(Q);
      auto fast = rect_maxvol(Q, L0);
      auto naive = oracle::naive_greedy(Q, L0, init);
      if (fast.seed.indices != naive) {
        all_equal = false;
        detail = "sequence mismatch at instance " + std::to_string(t);
      }
    }
    record("greedy-oracle-equivalence", all_equal, detail);
  }

  // Theorem-1 bound at the exhaustive optimum.
  {
    bool all_pass = true;
    std::string detail = "bound held on every instance";
    for (int t = 0; t < opt.instances && all_pass; ++t) {
      Index f = 2 + static_cast<Index>(rng() % 2);
      Index m = 6 + static_cast<Index>(rng() % 3);
      Index L0 = std::min<Index>(f + 1 + static_cast<Index>(rng() % 2), m);
      MatrixXd Q = random_matrix(f, m);
      auto best = oracle::brute_force_max_rectvol(Q, L0);
      MatrixXd C = oracle::pinv_oracle(best.S) * Q;
      double bound = std::sqrt(static_cast<double>(f) / static_cast<double>(L0 + 1 - f));
      for (Index i = 0; i < m; ++i) {
        bool in = false;
        for (Index s : best.indices) in |= (s == i);
        if (!in && C.col(i).norm() > bound + 1e-10) {
          all_pass = false;
          detail = "bound violated at instance " + std::to_string(t);
        }
      }
    }
    record("theorem1-bound-at-optimum", all_pass, detail);
  }

  // Lemma 1 Monte-Carlo.
  {
    bool all_pass = true;
    std::string detail = "lemma held on every instance";
    for (int t = 0; t < opt.instances && all_pass; ++t) {
      Index N = 2 + static_cast<Index>(rng() % 3);
      Index M = N + 1 + static_cast<Index>(rng() % 4);
      if (!oracle::lemma1_check(random_matrix(N, M), random_matrix(M, N))) {
        all_pass = false;
        detail = "lemma violated at instance " + std::to_string(t);
      }
    }
    record("lemma1-monte-carlo", all_pass, detail);
  }

  return checks;
}

}  // namespace maxvolcf
