// Acceptance suite: one pass/fail line per criterion. Every criterion runs
// twice with identical seeds; the second pass must reproduce the pass/fail
// verdicts and the metric CSVs byte-for-byte (timing columns excluded).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "maxvolcf/elicitation.hpp"
#include "maxvolcf/evaluation.hpp"
#include "maxvolcf/factorization.hpp"
#include "maxvolcf/maxvol.hpp"
#include "maxvolcf/oracle.hpp"
#include "maxvolcf/ratings.hpp"
#include "test_helpers.hpp"

using namespace maxvolcf;

namespace {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  std::string csv;              // deterministic metric payload
  bool timing_based = false;    // CSV not byte-compared for timing criteria
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Volume identity: Rectvol([S,q_i]) = Rectvol(S) sqrt(1 + w_i).
CriterionResult criterion1() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int states = 0;
  while (states < 1000) {
    Index f = 2 + static_cast<Index>(rng() % 7);           // 2..8
    Index L = f + static_cast<Index>(rng() % (f + 1));     // f..2f
    Index m = L + 1 + static_cast<Index>(rng() % (200 - L));
    MatrixXd Q = testutil::random_matrix(rng, f, m);
    SeedSet seed = lu_pivot_init(Q);
    CoefficientState st = CoefficientState::square_init(Q, seed, L);
    std::vector<bool> in(static_cast<std::size_t>(m), false);
    for (Index i : seed.indices) in[static_cast<std::size_t>(i)] = true;
    while (seed.size() < L) {
      Index pick = static_cast<Index>(rng() % static_cast<std::uint64_t>(m));
      while (in[static_cast<std::size_t>(pick)]) pick = (pick + 1) % m;
      st.append_column(seed, Q, pick);
      in[static_cast<std::size_t>(pick)] = true;
    }
    Index cand = static_cast<Index>(rng() % static_cast<std::uint64_t>(m));
    while (in[static_cast<std::size_t>(cand)]) cand = (cand + 1) % m;
    MatrixXd ext(f, L + 1);
    ext << seed.S, Q.col(cand);
    double direct = rectangular_volume(ext);
    double via = rectangular_volume(seed.S) * std::sqrt(1.0 + st.norm(cand));
    worst = std::max(worst, std::abs(direct - via) / direct);
    ++states;
  }
  CriterionResult r;
  r.id = 1;
  r.name = "volume identity";
  r.pass = worst <= 1e-8;
  r.detail = "max relative deviation " + fmt(worst) + " over 1000 states";
  r.csv = "criterion,metric,value\n1,max_rel_dev," + fmt(worst) + "\n";
  return r;
}

// ---------------------------------------------------------------------------
// 2. Rank-1 update equivalence against the pseudoinverse oracle.
CriterionResult criterion2() {
  std::mt19937_64 rng(202);
  double worst_c = 0.0, worst_w = 0.0;
  int appends = 0;
  while (appends < 10000) {
    Index f = 2 + static_cast<Index>(rng() % 5);            // 2..6
    Index m = f + 6 + static_cast<Index>(rng() % 30);
    Index L0 = std::min<Index>(2 * f + 3, m);
    MatrixXd Q = testutil::random_matrix(rng, f, m);
    SeedSet seed = lu_pivot_init(Q);
    CoefficientState st = CoefficientState::square_init(Q, seed, L0);
    std::vector<Index> outside;
    while (seed.size() < L0 && appends < 10000) {
      outside.clear();
      for (Index i = 0; i < m; ++i) {
        bool in = std::find(seed.indices.begin(), seed.indices.end(), i) != seed.indices.end();
        if (!in) outside.push_back(i);
      }
      Index i = outside[rng() % outside.size()];
      st.append_column(seed, Q, i);
      ++appends;
      MatrixXd C_ref = oracle::pinv_oracle(seed.S) * Q;
      VectorXd w_ref = C_ref.colwise().squaredNorm();
      worst_c = std::max(worst_c, (MatrixXd(st.coefficients()) - C_ref).norm() / C_ref.norm());
      worst_w = std::max(worst_w, (st.norms() - w_ref).cwiseAbs().maxCoeff());
    }
  }
  CriterionResult r;
  r.id = 2;
  r.name = "rank-1 update equivalence";
  r.pass = worst_c <= 1e-8 && worst_w <= 1e-8;
  r.detail = "10000 appends, max C dev " + fmt(worst_c) + ", max w dev " + fmt(worst_w);
  r.csv = "criterion,metric,value\n2,max_c_dev," + fmt(worst_c) + "\n2,max_w_dev," + fmt(worst_w) +
          "\n";
  return r;
}

// ---------------------------------------------------------------------------
// 3. Greedy-oracle equivalence.
CriterionResult criterion3() {
  std::mt19937_64 rng(303);
  int mismatches = 0;
  std::string first_csv = "criterion,instance,match\n";
  for (int t = 0; t < 200; ++t) {
    Index f = 2 + static_cast<Index>(rng() % 4);            // 2..5
    Index m = f + 6 + static_cast<Index>(rng() % (40 - f - 5));
    Index L0 = std::min<Index>(f + 2 + static_cast<Index>(rng() % 6), std::min<Index>(12, m));
    MatrixXd Q = testutil::random_matrix(rng, f, m);
    auto fast = rect_maxvol(Q, L0);
    auto naive = oracle::naive_greedy(Q, L0, lu_pivot_init(Q));
    bool match = fast.seed.indices == naive;
    mismatches += !match;
    first_csv += "3," + std::to_string(t) + ',' + (match ? "1" : "0") + '\n';
  }
  CriterionResult r;
  r.id = 3;
  r.name = "greedy-oracle equivalence";
  r.pass = mismatches == 0;
  r.detail = std::to_string(mismatches) + " mismatches over 200 instances";
  r.csv = first_csv;
  return r;
}

// ---------------------------------------------------------------------------
// 4. Theorem-1 bound at the exhaustive volume optimum.
CriterionResult criterion4() {
  std::mt19937_64 rng(404);
  int violations = 0;
  double worst_excess = 0.0;
  for (int t = 0; t < 200; ++t) {
    Index f = 2 + static_cast<Index>(rng() % 2);            // 2..3
    Index m = f + 3 + static_cast<Index>(rng() % (8 - f - 2));
    Index L0 = std::min<Index>(f + static_cast<Index>(rng() % 3), std::min<Index>(5, m));
    MatrixXd Q = testutil::random_matrix(rng, f, m);
    auto best = oracle::brute_force_max_rectvol(Q, L0);
    MatrixXd C = oracle::pinv_oracle(best.S) * Q;
    double bound = std::sqrt(static_cast<double>(f) / static_cast<double>(L0 + 1 - f));
    for (Index i = 0; i < m; ++i) {
      bool in = std::find(best.indices.begin(), best.indices.end(), i) != best.indices.end();
      if (in) continue;
      double excess = C.col(i).norm() - (bound + 1e-10);
      worst_excess = std::max(worst_excess, excess);
      violations += excess > 0.0;
    }
  }
  CriterionResult r;
  r.id = 4;
  r.name = "theorem-1 bound at brute-force optimum";
  r.pass = violations == 0;
  r.detail = std::to_string(violations) + " violations; worst excess " + fmt(worst_excess);
  r.csv = "criterion,metric,value\n4,violations," + std::to_string(violations) + "\n";
  return r;
}

// ---------------------------------------------------------------------------
// 5. Lemma-1 Monte-Carlo.
CriterionResult criterion5() {
  std::mt19937_64 rng(505);
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    Index N = 2 + static_cast<Index>(rng() % 3);             // 2..4
    Index M = N + 1 + static_cast<Index>(rng() % (10 - N));  // N+1..10
    MatrixXd A = testutil::random_matrix(rng, N, M);
    MatrixXd B = testutil::random_matrix(rng, M, N);
    failures += !oracle::lemma1_check(A, B);
  }
  CriterionResult r;
  r.id = 5;
  r.name = "lemma-1 Monte-Carlo";
  r.pass = failures == 0;
  r.detail = std::to_string(failures) + " failures over 1000 pairs";
  r.csv = "criterion,metric,value\n5,failures," + std::to_string(failures) + "\n";
  return r;
}

// ---------------------------------------------------------------------------
// 6. Empirical norm decay on Gaussian factors (f = 50, m = 2000).
CriterionResult criterion6() {
  const Index f = 50, m = 2000;
  const Index L_first = static_cast<Index>(std::ceil(1.3 * f));   // 65
  const Index L_second = static_cast<Index>(std::ceil(2.2 * f));  // 110
  int ok_first = 0, ok_second = 0;
  std::string csv = "criterion,seed,max_norm_at_65,max_norm_at_110\n";
  for (int s = 0; s < 20; ++s) {
    std::mt19937_64 rng(606 + static_cast<std::uint64_t>(s));
    MatrixXd Q = testutil::random_matrix(rng, f, m);
    SeedSet seed = lu_pivot_init(Q);
    CoefficientState st = CoefficientState::square_init(Q, seed, L_second);
    std::vector<bool> in(static_cast<std::size_t>(m), false);
    for (Index i : seed.indices) in[static_cast<std::size_t>(i)] = true;
    auto max_outside = [&] {
      double w = 0.0;
      for (Index i = 0; i < m; ++i)
        if (!in[static_cast<std::size_t>(i)]) w = std::max(w, st.norm(i));
      return std::sqrt(w);
    };
    double at_first = 0.0;
    while (seed.size() < L_second) {
      Index best = -1;
      for (Index i = 0; i < m; ++i)
        if (!in[static_cast<std::size_t>(i)] && (best < 0 || st.norm(i) > st.norm(best))) best = i;
      st.append_column(seed, Q, best);
      in[static_cast<std::size_t>(best)] = true;
      if (seed.size() == L_first) at_first = max_outside();
    }
    double at_second = max_outside();
    ok_first += at_first <= 2.0;
    ok_second += at_second <= 1.0;
    csv += "6," + std::to_string(s) + ',' + fmt(at_first) + ',' + fmt(at_second) + '\n';
  }
  CriterionResult r;
  r.id = 6;
  r.name = "empirical norm decay (L0 ~ 1.3f and 2.2f)";
  r.pass = ok_first >= 18 && ok_second >= 18;  // >= 90% of 20 seeds
  r.detail = "sqrt(w) <= 2 at L0=65 in " + std::to_string(ok_first) + "/20, <= 1 at L0=110 in " +
             std::to_string(ok_second) + "/20";
  r.csv = csv;
  return r;
}

// ---------------------------------------------------------------------------
// 7. Square maxvol dominance and single-swap local optimality.
CriterionResult criterion7() {
  std::mt19937_64 rng(707);
  const double tol = 1e-2;
  int dominance_fail = 0, swap_fail = 0;
  for (int t = 0; t < 100; ++t) {
    Index f = 2 + static_cast<Index>(rng() % 5);            // 2..6
    Index m = f + 4 + static_cast<Index>(rng() % (60 - f - 3));
    MatrixXd Q = testutil::random_matrix(rng, f, m);
    auto res = square_maxvol(Q, lu_pivot_init(Q), tol, 500);
    if (MatrixXd(res.state.coefficients()).cwiseAbs().maxCoeff() > 1.0 + tol) ++dominance_fail;
    double det0 = std::abs(res.seed.S.determinant());
    for (std::size_t p = 0; p < res.seed.indices.size() && swap_fail == 0; ++p)
      for (Index j = 0; j < m; ++j) {
        auto k = res.seed.indices;
        k[p] = j;
        double det1 = std::abs(SeedSet::from_indices(Q, k).S.determinant());
        if (det1 > det0 * (1.0 + tol) + 1e-12) {
          ++swap_fail;
          break;
        }
      }
  }
  CriterionResult r;
  r.id = 7;
  r.name = "square maxvol dominance";
  r.pass = dominance_fail == 0 && swap_fail == 0;
  r.detail = std::to_string(dominance_fail) + " dominance / " + std::to_string(swap_fail) +
             " swap violations over 100 instances";
  r.csv = "criterion,metric,value\n7,dominance_fail," + std::to_string(dominance_fail) +
          "\n7,swap_fail," + std::to_string(swap_fail) + "\n";
  return r;
}

// ---------------------------------------------------------------------------
// 8. Exact recovery on synthetic exact rank-f matrices.
CriterionResult criterion8() {
  std::mt19937_64 rng(808);
  const int f = 8, n = 300, m = 200;
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  MatrixXd P(f, n), Qf(f, m);
  for (int s = 0; s < f; ++s) {
    for (int u = 0; u < n; ++u) P(s, u) = unif(rng);
    for (int i = 0; i < m; ++i) Qf(s, i) = unif(rng);
  }
  MatrixXd dense = P.transpose() * Qf * (5.0 / f);
  std::vector<RatingTriplet> trips;
  for (int u = 0; u < n; ++u)
    for (int i = 0; i < m; ++i) trips.push_back({u, i, dense(u, i)});
  RatingMatrix R = ratings_from_triplets(trips);

  CriterionResult r;
  r.id = 8;
  r.name = "exact recovery via factors";
  r.pass = true;
  r.csv = "criterion,L0,rel_residual\n";
  Factorization F = pure_svd(R, f);
  for (Index L0 : {Index{f}, Index{2 * f}}) {
    auto sel = rect_maxvol(F.Q, L0);
    MatrixXd C = coefficients_via_factors(F, sel.seed.indices);
    MatrixXd Rk(n, L0);
    for (Index j = 0; j < L0; ++j) Rk.col(j) = dense.col(sel.seed.indices[static_cast<std::size_t>(j)]);
    double rel = (dense - Rk * C).norm() / dense.norm();
    r.pass = r.pass && rel <= 1e-8;
    r.detail += (r.detail.empty() ? "" : ", ") + ("L0=" + std::to_string(L0) + ": " + fmt(rel));
    r.csv += "8," + std::to_string(L0) + ',' + fmt(rel) + '\n';
  }
  return r;
}

// ---------------------------------------------------------------------------
// 9. Complexity scaling of the append loop: t(400) / t(200) <= 5.5.
CriterionResult criterion9() {
  const Index f = 10, m = 20000;
  auto loop_seconds = [&](Index L0, std::uint64_t seed_val) {
    std::mt19937_64 rng(seed_val);
    MatrixXd Q = testutil::random_matrix(rng, f, m);
    SeedSet seed = lu_pivot_init(Q);
    CoefficientState st = CoefficientState::square_init(Q, seed, L0);
    std::vector<bool> in(static_cast<std::size_t>(m), false);
    for (Index i : seed.indices) in[static_cast<std::size_t>(i)] = true;
    auto t0 = std::chrono::steady_clock::now();
    while (seed.size() < L0) {
      Index best = -1;
      for (Index i = 0; i < m; ++i)
        if (!in[static_cast<std::size_t>(i)] && (best < 0 || st.norm(i) > st.norm(best))) best = i;
      st.append_column(seed, Q, best);
      in[static_cast<std::size_t>(best)] = true;
    }
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
  };
  std::vector<double> t200, t400;
  for (int rep = 0; rep < 5; ++rep) {
    t200.push_back(loop_seconds(200, 909 + static_cast<std::uint64_t>(rep)));
    t400.push_back(loop_seconds(400, 909 + static_cast<std::uint64_t>(rep)));
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  double ratio = median(t400) / median(t200);
  CriterionResult r;
  r.id = 9;
  r.name = "append-loop complexity scaling";
  r.pass = ratio <= 5.5;
  r.detail = "median t(L0=400)/t(L0=200) = " + fmt(ratio) + " (quadratic prediction 4)";
  r.csv = "criterion,metric,value\n9,time_ratio," + fmt(ratio) + "\n";
  r.timing_based = true;
  return r;
}

// ---------------------------------------------------------------------------
// 10. Rectangular vs square on a MovieLens-scale synthetic dataset.
CriterionResult criterion10() {
  // A public MovieLens file cannot ship with the repository, so the check
  // runs on a synthetic dataset of the same scale and rating scheme
  // (~100K star ratings, popularity-skewed, low-rank preferences + noise).
  RatingMatrix R = testutil::synthetic_dataset(1010, 900, 1500, 8, 0.075, 1.0);
  FoldSplit folds = split_folds(static_cast<int>(R.rows()), 5, 2024);
  EvalConfig base;
  base.variant = Variant::ViaRatings;
  base.k_list = {10};
  base.relevance_threshold = 4.0;
  auto cells = sweep(R, folds, {Index{10}, Index{20}, Index{30}}, {5, 8, 10}, base);

  int wins = 0, total = 0;
  std::string csv = "criterion,L0,fold,square_p10,rect_p10,rect_wins\n";
  for (Index L0 : {Index{10}, Index{20}, Index{30}}) {
    const SweepCell* square = nullptr;
    const SweepCell* rect = nullptr;
    for (const auto& c : cells) {
      if (c.L0 != L0) continue;
      if (c.selector == Selector::Square) square = &c;
      if (c.selector == Selector::Rectangular && c.best_rank) rect = &c;
    }
    if (!square || !rect) continue;
    for (std::size_t fold = 0; fold < square->report.per_fold.size(); ++fold) {
      double sp = square->report.per_fold[fold].precision.at(10);
      double rp = rect->report.per_fold[fold].precision.at(10);
      bool win = rp >= sp;
      wins += win;
      ++total;
      csv += "10," + std::to_string(L0) + ',' + std::to_string(fold) + ',' + fmt(sp) + ',' +
             fmt(rp) + ',' + (win ? "1" : "0") + '\n';
    }
  }
  CriterionResult r;
  r.id = 10;
  r.name = "rectangular vs square end-to-end (synthetic desk-scale proxy)";
  r.pass = total > 0 && wins * 10 >= total * 6;  // >= 60% of cells
  r.detail = "best-rank rectangular P@10 >= square in " + std::to_string(wins) + "/" +
             std::to_string(total) + " cells (statistical proxy; published-scale " +
             "absolute values are out of reach by design)";
  r.csv = csv;
  return r;
}

std::vector<CriterionResult> run_all() {
  return {criterion1(), criterion2(), criterion3(), criterion4(), criterion5(),
          criterion6(), criterion7(), criterion8(), criterion9(), criterion10()};
}

}  // namespace

int main() {
  auto first = run_all();
  bool all_pass = true;
  for (const auto& c : first) {
    std::cout << "[criterion " << c.id << "] " << (c.pass ? "PASS" : "FAIL") << "  " << c.name
              << " -- " << c.detail << "\n";
    all_pass &= c.pass;
  }

  // 11. Determinism: identical seeds reproduce verdicts and metric CSVs.
  auto second = run_all();
  bool deterministic = first.size() == second.size();
  for (std::size_t i = 0; deterministic && i < first.size(); ++i) {
    if (first[i].pass != second[i].pass) deterministic = false;
    if (!first[i].timing_based && first[i].csv != second[i].csv) deterministic = false;
  }
  std::cout << "[criterion 11] " << (deterministic ? "PASS" : "FAIL")
            << "  determinism -- rerun reproduced all verdicts and metric CSVs\n";
  all_pass &= deterministic;

  std::cout << (all_pass ? "ACCEPTANCE: all criteria passed\n"
                         : "ACCEPTANCE: some criteria FAILED\n");
  return all_pass ? 0 : 1;
}
