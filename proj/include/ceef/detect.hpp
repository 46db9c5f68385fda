#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ceef/eval.hpp"
#include "ceef/matrix.hpp"

namespace ceef {

struct DetectionConfig {
  int n = 300;
  double lambda1 = 1.5;
  double lambda2 = 1.0;
  std::vector<int> orders = {3, 4, 5, 6, 7};
  int reps = 100;
  std::uint64_t seed = 1;
  int threads = 1;
};

inline void validate_config(const DetectionConfig& cfg) {
  if (cfg.reps < 2) throw std::invalid_argument("detect: reps must be at least 2");
  if (cfg.orders.empty()) throw std::invalid_argument("detect: no orders given");
  for (int m : cfg.orders)
    if (m < 3) throw std::invalid_argument("detect: orders must be at least 3");
  int max_m = *std::max_element(cfg.orders.begin(), cfg.orders.end());
  if (cfg.n <= max_m)
    throw std::invalid_argument("detect: n must exceed the largest order");
  if (cfg.lambda1 < 0 || cfg.lambda2 < 0)
    throw std::invalid_argument("detect: spike strengths must be non-negative");
}

namespace detail {

inline std::mt19937_64 instance_rng(std::uint64_t seed, int rep, int hypothesis) {
  std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(rep),
                    static_cast<std::uint64_t>(hypothesis)};
  return std::mt19937_64(seq);
}

}  // namespace detail

// Rank-two planted signal: two independent unit-normalized gaussian spikes
// with strengths lambda1 and lambda2, diagonal removed later by the caller.
inline Dense<double> make_signal(const DetectionConfig& cfg, std::mt19937_64& rng) {
  int n = cfg.n;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> xi1(static_cast<std::size_t>(n)), xi2(static_cast<std::size_t>(n));
  for (double& x : xi1) x = gauss(rng);
  for (double& x : xi2) x = gauss(rng);
  auto unit = [](std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s > 0)
      for (double& x : v) x /= s;
  };
  unit(xi1);
  unit(xi2);
  Dense<double> w(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = cfg.lambda1 * xi1[i] * xi1[j] + cfg.lambda2 * xi2[i] * xi2[j];
      w.at(i, j) = w.at(j, i) = v;
    }
  return w;
}

// One observation: hypothesis 0 is pure noise, hypothesis 1 adds the hollowed
// signal. Noise is symmetric with off-diagonal variance 1/n. The stream is
// seeded per (seed, rep, hypothesis), so any subset of instances can be
// regenerated independently and in any order.
inline Dense<double> generate_instance(const DetectionConfig& cfg, int hypothesis, int rep) {
  auto rng = detail::instance_rng(cfg.seed, rep, hypothesis);
  int n = cfg.n;
  Dense<double> a(n);
  if (hypothesis != 0) {
    Dense<double> w = make_signal(cfg, rng);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) a.at(i, j) = w.at(i, j);
  }
  std::normal_distribution<double> noise(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double z = noise(rng);
      a.at(i, j) += z;
      a.at(j, i) += z;
    }
  return a;
}

// Smallest achievable sum of the two error fractions over all midpoint
// thresholds between observed values, trying both decision directions. The
// empty-threshold baseline (always decide one way) scores 1.
inline double sum_error(const std::vector<double>& h0, const std::vector<double>& h1) {
  if (h0.empty() || h1.empty()) throw std::invalid_argument("sum_error: empty sample");
  std::vector<double> all = h0;
  all.insert(all.end(), h1.begin(), h1.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  double best = 1.0;
  auto frac = [](const std::vector<double>& v, auto pred) {
    std::size_t c = 0;
    for (double x : v)
      if (pred(x)) ++c;
    return static_cast<double>(c) / static_cast<double>(v.size());
  };
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    double thr = 0.5 * (all[i] + all[i + 1]);
    double high = frac(h0, [&](double x) { return x > thr; }) +
                  frac(h1, [&](double x) { return x <= thr; });
    double low = frac(h0, [&](double x) { return x < thr; }) +
                 frac(h1, [&](double x) { return x >= thr; });
    best = std::min({best, high, low});
  }
  return best;
}

struct DetectionReport {
  DetectionConfig config;
  std::vector<std::pair<int, double>> se_by_order;
};

// Runs reps paired instances per hypothesis, evaluates every requested order
// on each instance through one shared evaluator, and scores separability per
// order. Instances are independent jobs, so threads only change wall time.
inline DetectionReport run_experiment(const DetectionConfig& cfg,
                                      const std::map<int, Formula>& formulas,
                                      double op_budget = 20 * default_op_budget) {
  validate_config(cfg);
  for (int m : cfg.orders)
    if (!formulas.count(m))
      throw std::invalid_argument("detect: no formula supplied for order " + std::to_string(m));

  int jobs = cfg.reps * 2;
  std::vector<std::vector<double>> values(
      static_cast<std::size_t>(jobs),
      std::vector<double>(cfg.orders.size(), 0.0));

  auto run_job = [&](int job) {
    int rep = job / 2, hyp = job % 2;
    Dense<double> a = generate_instance(cfg, hyp, rep);
    Evaluator<double> ev(a, op_budget);
    for (std::size_t oi = 0; oi < cfg.orders.size(); ++oi)
      values[static_cast<std::size_t>(job)][oi] = ev.formula_value(formulas.at(cfg.orders[oi]));
  };

  int nthreads = std::max(1, cfg.threads);
  if (nthreads == 1) {
    for (int j = 0; j < jobs; ++j) run_job(j);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&] {
        for (;;) {
          int j = next.fetch_add(1);
          if (j >= jobs) return;
          run_job(j);
        }
      });
    for (auto& th : pool) th.join();
  }

  DetectionReport rep;
  rep.config = cfg;
  for (std::size_t oi = 0; oi < cfg.orders.size(); ++oi) {
    std::vector<double> h0, h1;
    for (int r = 0; r < cfg.reps; ++r) {
      h0.push_back(values[static_cast<std::size_t>(2 * r)][oi]);
      h1.push_back(values[static_cast<std::size_t>(2 * r + 1)][oi]);
    }
    rep.se_by_order.emplace_back(cfg.orders[oi], sum_error(h0, h1));
  }
  return rep;
}

inline std::string detect_text(const DetectionReport& r) {
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof buf, "# n=%d lambda1=%g lambda2=%g reps=%d seed=%llu\n",
                r.config.n, r.config.lambda1, r.config.lambda2, r.config.reps,
                static_cast<unsigned long long>(r.config.seed));
  out += buf;
  for (auto& [m, se] : r.se_by_order) {
    std::snprintf(buf, sizeof buf, "m=%d se=%.6f\n", m, se);
    out += buf;
  }
  return out;
}

inline nlohmann::ordered_json detect_json(const DetectionReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.config.n;
  j["lambda1"] = r.config.lambda1;
  j["lambda2"] = r.config.lambda2;
  j["reps"] = r.config.reps;
  j["seed"] = r.config.seed;
  j["results"] = nlohmann::ordered_json::array();
  for (auto& [m, se] : r.se_by_order) {
    nlohmann::ordered_json e;
    e["m"] = m;
    e["se"] = se;
    j["results"].push_back(std::move(e));
  }
  return j;
}

}  // namespace ceef
