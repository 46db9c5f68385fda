#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ceef/catalog.hpp"
#include "ceef/detect.hpp"
#include "ceef/emit.hpp"
#include "ceef/eval.hpp"
#include "ceef/formula.hpp"
#include "ceef/matrix.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string cache_dir;
  int threads = 0;
  int max_m = 12;
  double budget = ceef::default_op_budget;
};

int effective_threads(const CommonOpts& o) {
  if (o.threads > 0) return o.threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

fs::path resolve_cache_dir(const CommonOpts& o) {
  if (!o.cache_dir.empty()) return o.cache_dir;
  if (const char* env = std::getenv("CEEF_CACHE"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
    return fs::path(xdg) / "ceef";
  if (const char* home = std::getenv("HOME"); home && *home)
    return fs::path(home) / ".cache" / "ceef";
  return fs::path(".ceef-cache");
}

// Loads the catalog for one order from the cache, rebuilding (and re-caching)
// when the file is missing or does not validate.
ceef::Catalog get_catalog(int m, const CommonOpts& o) {
  fs::path dir = resolve_cache_dir(o);
  fs::path file = dir / ("catalog-m" + std::to_string(m) + ".json");
  std::error_code ec;
  if (fs::exists(file, ec)) {
    try {
      ceef::Catalog cat = ceef::load_catalog(file.string());
      if (cat.m == m) return cat;
      std::cerr << "warning: " << file.string() << " holds a different order; rebuilding\n";
    } catch (const std::exception& e) {
      std::cerr << "warning: ignoring unusable cache file " << file.string() << ": " << e.what()
                << "\n";
    }
  }
  ceef::CatalogOptions copts;
  copts.threads = effective_threads(o);
  copts.max_order = o.max_m;
  ceef::Catalog cat = ceef::build_catalog(m, copts);
  fs::create_directories(dir, ec);
  try {
    ceef::save_catalog(cat, file.string());
  } catch (const std::exception& e) {
    std::cerr << "warning: could not cache the catalog: " << e.what() << "\n";
  }
  return cat;
}

void write_output(const std::string& text, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_file);
  if (!out) throw std::runtime_error("cannot write " + out_file);
  out << text;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      int v = std::stoi(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

std::pair<int, int> parse_order_range(const std::string& s) {
  auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      int m = std::stoi(s);
      return {m, m};
    }
    int lo = std::stoi(s.substr(0, dots));
    int hi = std::stoi(s.substr(dots + 2));
    if (lo > hi) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::exception&) {
    throw std::invalid_argument("--m: expected an order or a range like 3..8, got '" + s + "'");
  }
}

void check_order(int m, const CommonOpts& o) {
  if (m < 3)
    throw std::invalid_argument("order must be at least 3 (the statistic is trivial below that)");
  if (m > o.max_m)
    throw std::invalid_argument("order " + std::to_string(m) + " exceeds the limit of " +
                                std::to_string(o.max_m) + "; pass --max-m to raise it");
}

int cmd_generate(int m, const std::string& format, const std::string& out_file,
                 const CommonOpts& o) {
  check_order(m, o);
  ceef::Catalog cat = get_catalog(m, o);
  ceef::Formula f = ceef::build_formula(cat);
  if (format == "latex")
    write_output(ceef::emit_latex(f), out_file);
  else if (format == "json")
    write_output(ceef::emit_json(f), out_file);
  else if (format == "text")
    write_output(ceef::emit_text(f, cat), out_file);
  else
    throw std::invalid_argument("--format must be latex, json, or text");
  return 0;
}

int cmd_catalog(int m, const std::string& format, const std::string& out_file,
                const CommonOpts& o) {
  check_order(m, o);
  ceef::Catalog cat = get_catalog(m, o);
  if (format == "text")
    write_output(ceef::catalog_text(cat), out_file);
  else if (format == "json")
    write_output(ceef::catalog_to_json(cat).dump(1) + "\n", out_file);
  else
    throw std::invalid_argument("--format must be text or json");
  return 0;
}

int cmd_eval(int m, const std::string& matrix_file, const CommonOpts& o) {
  check_order(m, o);
  ceef::MatrixData md;
  if (matrix_file == "-") {
    md = ceef::load_matrix(std::cin);
  } else {
    std::ifstream in(matrix_file);
    if (!in) throw std::runtime_error("cannot read " + matrix_file);
    md = ceef::load_matrix(in);
  }
  ceef::Formula f = ceef::build_formula(get_catalog(m, o));
  if (md.integer_mode) {
    ceef::Evaluator<long long> ev(md.exact, o.budget);
    std::cout << ceef::format_scalar(ev.formula_value(f)) << "\n";
  } else {
    ceef::Evaluator<double> ev(md.real, o.budget);
    std::cout << ceef::format_scalar(ev.formula_value(f)) << "\n";
  }
  return 0;
}

int cmd_validate(const std::string& range, int n, int trials, std::uint64_t seed,
                 const CommonOpts& o) {
  auto [lo, hi] = parse_order_range(range);
  check_order(lo, o);
  check_order(hi, o);
  if (n < 3) throw std::invalid_argument("--n must be at least 3");
  if (trials < 1) throw std::invalid_argument("--trials must be positive");

  bool all_ok = true;
  for (int m = lo; m <= hi; ++m) {
    ceef::Formula f = ceef::build_formula(get_catalog(m, o));
    double tuples = std::pow(n, m);
    if (tuples > o.budget) {
      std::cerr << "warning: skipping m=" << m << ": direct check needs about " << tuples
                << " tuples, over the budget of " << o.budget << "\n";
      continue;
    }
    double worst = 0;
    bool float_ok = true, int_ok = true, div_ok = true;
    for (int trial = 0; trial < trials; ++trial) {
      std::seed_seq seq{seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)};
      std::mt19937_64 rng(seq);
      ceef::Dense<double> a = ceef::random_hollow_symmetric(n, rng());
      double direct = ceef::brute_force_cm(a, m, o.budget);
      double closed = ceef::eval_formula(f, a, o.budget);
      double rel = std::abs(closed - direct) / std::max(1.0, std::abs(direct));
      worst = std::max(worst, rel);
      if (rel > 1e-8) float_ok = false;

      ceef::Dense<long long> g = ceef::random_binary_graph(n, 0.5, rng());
      long long gd = ceef::brute_force_cm(g, m, o.budget);
      long long gc = ceef::eval_formula(f, g, o.budget);
      if (gd != gc) int_ok = false;
      if (gd % (2LL * m) != 0) div_ok = false;
    }
    bool ok = float_ok && int_ok && div_ok;
    std::printf("m=%d trials=%d max_rel_err=%.3e float=%s integer=%s divisible=%s\n", m, trials,
                worst, float_ok ? "ok" : "FAILED", int_ok ? "ok" : "FAILED",
                div_ok ? "ok" : "FAILED");
    all_ok = all_ok && ok;
  }
  std::printf("%s\n", all_ok ? "all checks passed" : "validation FAILED");
  return all_ok ? 0 : 1;
}

int cmd_bench(int m, const std::string& sizes_str, std::uint64_t seed, const CommonOpts& o) {
  check_order(m, o);
  std::vector<int> sizes = parse_int_list(sizes_str, "--sizes");
  ceef::Formula f = ceef::build_formula(get_catalog(m, o));
  ceef::BenchReport rep = ceef::run_bench(f, sizes, seed, o.budget / 4);
  std::printf("# order %d\n", rep.m);
  std::printf("%8s %14s %18s %12s\n", "n", "closed_sec", "direct_sec", "speedup");
  for (const ceef::BenchRow& r : rep.rows) {
    char direct[48];
    std::snprintf(direct, sizeof direct, "%.4f%s", r.brute_seconds,
                  r.brute_measured ? "" : " (est)");
    std::printf("%8d %14.4f %18s %12.1f\n", r.n, r.formula_seconds, direct,
                r.brute_seconds / std::max(r.formula_seconds, 1e-9));
  }
  std::printf("growth exponent: %.2f\n", rep.growth_exponent);
  return 0;
}

int cmd_detect(ceef::DetectionConfig cfg, const std::string& orders_str,
               const std::string& out_file, const CommonOpts& o) {
  cfg.orders = parse_int_list(orders_str, "--orders");
  cfg.threads = effective_threads(o);
  ceef::validate_config(cfg);
  std::map<int, ceef::Formula> formulas;
  for (int m : cfg.orders) {
    check_order(m, o);
    if (!formulas.count(m)) formulas.emplace(m, ceef::build_formula(get_catalog(m, o)));
  }
  ceef::DetectionReport rep = ceef::run_experiment(cfg, formulas, std::max(o.budget, 2e10));
  std::cout << ceef::detect_text(rep);
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw std::runtime_error("cannot write " + out_file);
    out << ceef::detect_json(rep).dump(1) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-form evaluation of cycle-count statistics"};
  app.require_subcommand(1);
  CommonOpts common;
  app.add_option("--cache", common.cache_dir,
                 "catalog cache directory (default: $CEEF_CACHE, then ~/.cache/ceef)");
  app.add_option("--threads", common.threads, "worker threads (default: all cores)");
  app.add_option("--max-m", common.max_m, "largest order accepted")->capture_default_str();
  app.add_option("--budget", common.budget, "operation budget for heavy evaluations")
      ->capture_default_str();

  int gen_m = 0;
  std::string gen_format = "latex", gen_out;
  auto* gen = app.add_subcommand("generate", "emit the closed form for one order");
  gen->add_option("--m", gen_m, "cycle order")->required();
  gen->add_option("--format", gen_format, "latex, json, or text")->capture_default_str();
  gen->add_option("--out", gen_out, "write to a file instead of stdout");

  int cat_m = 0;
  std::string cat_format = "text", cat_out;
  auto* cat = app.add_subcommand("catalog", "emit the merged-graph catalog for one order");
  cat->add_option("--m", cat_m, "cycle order")->required();
  cat->add_option("--format", cat_format, "text or json")->capture_default_str();
  cat->add_option("--out", cat_out, "write to a file instead of stdout");

  int eval_m = 0;
  std::string eval_matrix;
  auto* ev = app.add_subcommand("eval", "evaluate the statistic on a matrix file");
  ev->add_option("--m", eval_m, "cycle order")->required();
  ev->add_option("--matrix", eval_matrix, "matrix file, or - for stdin")->required();

  std::string val_range;
  int val_n = 8, val_trials = 20;
  std::uint64_t val_seed = 1;
  auto* val = app.add_subcommand("validate", "check closed forms against direct summation");
  val->add_option("--m", val_range, "order or range, e.g. 3..8")->required();
  val->add_option("--n", val_n, "matrix dimension")->capture_default_str();
  val->add_option("--trials", val_trials, "random matrices per order")->capture_default_str();
  val->add_option("--seed", val_seed, "base seed")->capture_default_str();

  int bench_m = 0;
  std::string bench_sizes = "50,100,200";
  std::uint64_t bench_seed = 1;
  auto* ben = app.add_subcommand("bench", "time closed-form evaluation against direct summation");
  ben->add_option("--m", bench_m, "cycle order")->required();
  ben->add_option("--sizes", bench_sizes, "comma-separated dimensions")->capture_default_str();
  ben->add_option("--seed", bench_seed, "base seed")->capture_default_str();

  ceef::DetectionConfig dcfg;
  std::string det_orders = "3,4,5,6,7", det_out;
  auto* det = app.add_subcommand("detect", "signal detection experiment on spiked noise");
  det->add_option("--n", dcfg.n, "matrix dimension")->capture_default_str();
  det->add_option("--lambda1", dcfg.lambda1, "first spike strength")->capture_default_str();
  det->add_option("--lambda2", dcfg.lambda2, "second spike strength")->capture_default_str();
  det->add_option("--orders", det_orders, "comma-separated cycle orders")->capture_default_str();
  det->add_option("--reps", dcfg.reps, "instances per hypothesis")->capture_default_str();
  det->add_option("--seed", dcfg.seed, "base seed")->capture_default_str();
  det->add_option("--out", det_out, "also write a JSON report to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_m, gen_format, gen_out, common);
    if (cat->parsed()) return cmd_catalog(cat_m, cat_format, cat_out, common);
    if (ev->parsed()) return cmd_eval(eval_m, eval_matrix, common);
    if (val->parsed()) return cmd_validate(val_range, val_n, val_trials, val_seed, common);
    if (ben->parsed()) return cmd_bench(bench_m, bench_sizes, bench_seed, common);
    if (det->parsed()) return cmd_detect(dcfg, det_orders, det_out, common);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ceef::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
