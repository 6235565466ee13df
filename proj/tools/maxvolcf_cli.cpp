// Batch front end: ingestion -> factorization -> seed selection ->
// evaluation, with JSON/CSV reports and an oracle-backed verify mode.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxvolcf/elicitation.hpp"
#include "maxvolcf/evaluation.hpp"
#include "maxvolcf/factorization.hpp"
#include "maxvolcf/maxvol.hpp"
#include "maxvolcf/ratings.hpp"
#include "maxvolcf/verify.hpp"

namespace {

using namespace maxvolcf;
namespace fs = std::filesystem;

struct CommonOpts {
  std::string data_path;
  std::string delimiter = ",";
  bool header = false;
  std::string mode = "user";
  std::string selector = "rectangular";
  int f = 10;
  std::string L0 = "10";  // integer or "auto"
  std::string variant = "ratings";
  int fold_count = 5;
  std::uint64_t seed = 0;
  std::vector<int> k_list = {10};
  double threshold = 4.0;
  std::string cache_dir;
  bool refine_init = false;
};

fs::path cache_dir_of(const CommonOpts& o) {
  if (!o.cache_dir.empty()) return o.cache_dir;
  if (const char* env = std::getenv("MAXVOLCF_CACHE_DIR")) return env;
  return {};
}

RatingMatrix load_dataset(const CommonOpts& o) {
  std::ifstream in(o.data_path);
  if (!in) throw ArgumentError("cannot open dataset " + o.data_path);
  return parse_ratings(in, {o.delimiter.empty() ? ',' : o.delimiter[0], o.header});
}

void write_atomically(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
  }
  fs::rename(tmp, path);
}

bool parse_auto_L0(const std::string& s, Index& L0) {
  if (s == "auto") return true;
  L0 = std::stoll(s);
  return false;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_data) {
  if (needs_data)
    cmd->add_option("--data", o.data_path, "rating triplet file")->required();
  cmd->add_option("--delimiter", o.delimiter, "field delimiter (default ,)");
  cmd->add_flag("--header", o.header, "skip the first line");
  cmd->add_option("--mode", o.mode, "cold-start mode: user|item")
      ->check(CLI::IsMember({"user", "item"}));
  cmd->add_option("--selector", o.selector, "seed selector: square|rectangular")
      ->check(CLI::IsMember({"square", "rectangular"}));
  cmd->add_option("-f,--rank", o.f, "factorization rank");
  cmd->add_option("-L,--seed-size", o.L0, "seed set size (integer or 'auto')");
  cmd->add_option("--variant", o.variant, "coefficient variant: ratings|factors")
      ->check(CLI::IsMember({"ratings", "factors"}));
  cmd->add_option("--seed", o.seed, "RNG seed; all randomness flows from it");
  cmd->add_option("--cache-dir", o.cache_dir, "factor cache directory");
  cmd->add_flag("--refine-init", o.refine_init,
                "refine the LU initialization with square maxvol");
}

int cmd_select(const CommonOpts& o, const std::string& output) {
  RatingMatrix R = load_dataset(o);
  if (o.mode == "item") R = R.transpose();

  Index L0 = 0;
  bool auto_size = parse_auto_L0(o.L0, L0);
  if (o.selector == "square" && auto_size)
    throw ArgumentError("'auto' seed size requires the rectangular selector");
  if (o.selector == "square" && o.f != static_cast<int>(L0))
    throw ArgumentError("square selector requires -f equal to -L");

  auto t0 = std::chrono::steady_clock::now();
  Factorization F = cached_pure_svd(R, o.f, cache_dir_of(o));
  auto t1 = std::chrono::steady_clock::now();

  RectMaxvolOptions rect;
  rect.refine_with_square_maxvol = o.refine_init;
  std::vector<Index> k;
  VectorXd w;
  double log_vol = 0.0;
  double dominance_tol = -1.0;
  if (o.selector == "square") {
    auto res = square_maxvol(F.Q, lu_pivot_init(F.Q), 1e-2, 4 * o.f + 16);
    k = res.seed.indices;
    w = res.state.norms();
    dominance_tol = 1e-2;
    Eigen::PartialPivLU<MatrixXd> lu(res.seed.S);
    log_vol = 0.0;
    for (Index i = 0; i < res.seed.S.rows(); ++i)
      log_vol += std::log(std::abs(lu.matrixLU()(i, i)));
  } else {
    auto res = auto_size ? rect_maxvol_auto(F.Q, rect) : rect_maxvol(F.Q, L0, rect);
    k = res.seed.indices;
    w = res.state.norms();
    Eigen::JacobiSVD<MatrixXd> svd(res.seed.S);
    log_vol = svd.singularValues().array().log().sum();
  }
  auto t2 = std::chrono::steady_clock::now();

  std::vector<std::int64_t> external;
  for (Index i : k) external.push_back(R.col_ids()[static_cast<std::size_t>(i)]);
  std::vector<double> w_out(w.data(), w.data() + w.size());
  nlohmann::json rep = {
      {"schema_version", 1},
      {"selector", o.selector},
      {"mode", o.mode},
      {"f", o.f},
      {"L0", static_cast<Index>(k.size())},
      {"auto_size", auto_size},
      {"k", k},
      {"external_ids", external},
      {"w", w_out},
      {"log_rectvol", log_vol},
      {"timings_ms",
       {{"svd", std::chrono::duration<double, std::milli>(t1 - t0).count()},
        {"selection", std::chrono::duration<double, std::milli>(t2 - t1).count()}}},
  };
  if (dominance_tol >= 0.0) rep["dominance_tol"] = dominance_tol;
  write_atomically(output, rep.dump(2) + "\n");
  std::cout << "wrote " << output << " (" << k.size() << " indices)\n";
  return 0;
}

EvalConfig eval_config(const CommonOpts& o) {
  EvalConfig cfg;
  cfg.selector = o.selector == "square" ? Selector::Square : Selector::Rectangular;
  cfg.f = o.f;
  cfg.auto_size = parse_auto_L0(o.L0, cfg.L0);
  cfg.variant = o.variant == "ratings" ? Variant::ViaRatings : Variant::ViaFactors;
  cfg.k_list = o.k_list;
  cfg.mode = o.mode == "user" ? ColdStartMode::User : ColdStartMode::Item;
  cfg.relevance_threshold = o.threshold;
  cfg.rect.refine_with_square_maxvol = o.refine_init;
  if (cfg.selector == Selector::Square && !cfg.auto_size && cfg.L0 != cfg.f)
    throw ArgumentError("square selector requires -f equal to -L");
  if (cfg.selector == Selector::Square && cfg.auto_size)
    throw ArgumentError("'auto' seed size requires the rectangular selector");
  return cfg;
}

std::string report_csv(const EvalReport& rep, const EvalConfig& cfg) {
  std::ostringstream out;
  out.precision(12);
  out << "schema_version,selector,f,L0,k,metric,mean,sigma\n";
  auto line = [&](const std::string& metric, int k, double mean, double sigma) {
    out << 1 << ',' << to_string(cfg.selector) << ',' << cfg.f << ','
        << (cfg.auto_size ? -1 : cfg.L0) << ',' << k << ',' << metric << ',' << mean << ','
        << sigma << '\n';
  };
  for (const auto& [k, v] : rep.mean_precision) line("precision", k, v, rep.sigma_precision.at(k));
  for (const auto& [k, v] : rep.mean_recall) line("recall", k, v, rep.sigma_recall.at(k));
  return out.str();
}

int cmd_evaluate(const CommonOpts& o, const std::string& json_out, const std::string& csv_out) {
  RatingMatrix R = load_dataset(o);
  EvalConfig cfg = eval_config(o);
  Index axis = cfg.mode == ColdStartMode::Item ? R.cols() : R.rows();
  FoldSplit folds = split_folds(static_cast<int>(axis), o.fold_count, o.seed);
  EvalReport rep = evaluate_cold_start(R, folds, cfg);
  write_atomically(json_out, rep.to_json().dump(2) + "\n");
  write_atomically(csv_out, report_csv(rep, cfg));
  std::cout << "wrote " << json_out << " and " << csv_out << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::vector<Index>& seed_sizes,
              const std::vector<int>& rank_grid, const std::string& csv_out) {
  RatingMatrix R = load_dataset(o);
  EvalConfig base = eval_config(o);
  Index axis = base.mode == ColdStartMode::Item ? R.cols() : R.rows();
  FoldSplit folds = split_folds(static_cast<int>(axis), o.fold_count, o.seed);
  auto cells = sweep(R, folds, seed_sizes, rank_grid, base);
  write_atomically(csv_out, sweep_to_csv(cells));
  std::cout << "wrote " << csv_out << " (" << cells.size() << " cells)\n";
  return 0;
}

int cmd_verify(std::uint64_t seed, int instances) {
  auto checks = run_verification({.seed = seed, .instances = instances});
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail << ")\n";
    all &= c.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximal-volume seed-set selection for cold-start rating elicitation"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string output = "seed_set.json";
  std::string json_out = "report.json";
  std::string csv_out = "report.csv";
  std::vector<Index> seed_sizes;
  std::vector<int> rank_grid;
  int verify_instances = 50;

  auto* sel = app.add_subcommand("select", "select a seed set and write a JSON report");
  add_common(sel, opts, true);
  sel->add_option("-o,--output", output, "output JSON path");

  auto* ev = app.add_subcommand("evaluate", "fold-based cold-start evaluation");
  add_common(ev, opts, true);
  ev->add_option("--folds", opts.fold_count, "number of folds");
  ev->add_option("--at", opts.k_list, "k values for precision/recall");
  ev->add_option("--threshold", opts.threshold, "relevance threshold");
  ev->add_option("--json-out", json_out, "JSON report path");
  ev->add_option("--csv-out", csv_out, "CSV report path");

  auto* sw = app.add_subcommand("sweep", "evaluate a (seed size, rank) grid");
  add_common(sw, opts, true);
  sw->add_option("--folds", opts.fold_count, "number of folds");
  sw->add_option("--at", opts.k_list, "k values for precision/recall");
  sw->add_option("--threshold", opts.threshold, "relevance threshold");
  sw->add_option("--seed-sizes", seed_sizes, "seed set sizes")->required();
  sw->add_option("--rank-grid", rank_grid, "candidate ranks")->required();
  sw->add_option("--csv-out", csv_out, "CSV report path");

  auto* vf = app.add_subcommand("verify", "run the capped oracle-equivalence suite");
  vf->add_option("--seed", opts.seed, "RNG seed");
  vf->add_option("--instances", verify_instances, "instances per check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sel->parsed()) return cmd_select(opts, output);
    if (ev->parsed()) return cmd_evaluate(opts, json_out, csv_out);
    if (sw->parsed()) return cmd_sweep(opts, seed_sizes, rank_grid, csv_out);
    if (vf->parsed()) return cmd_verify(opts.seed, verify_instances);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
