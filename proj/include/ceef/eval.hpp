#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "ceef/formula.hpp"
#include "ceef/matrix.hpp"

namespace ceef {

inline constexpr double default_op_budget = 1e9;

struct BudgetError : std::runtime_error {
  double estimated_ops;
  BudgetError(const std::string& msg, double est) : std::runtime_error(msg), estimated_ops(est) {}
};

namespace detail {

template <class T>
T scalar_add(T a, T b) {
  if constexpr (std::is_integral_v<T>) {
    T r;
    if (__builtin_add_overflow(a, b, &r))
      throw std::overflow_error("integer evaluation overflowed 64 bits");
    return r;
  } else {
    return a + b;
  }
}

template <class T>
T scalar_mul(T a, T b) {
  if constexpr (std::is_integral_v<T>) {
    T r;
    if (__builtin_mul_overflow(a, b, &r))
      throw std::overflow_error("integer evaluation overflowed 64 bits");
    return r;
  } else {
    return a * b;
  }
}

// Compensated summation for floating point, overflow-checked for integers.
template <class T>
struct Accum {
  T sum{};
  T comp{};

  void add(T x) {
    if constexpr (std::is_integral_v<T>) {
      sum = scalar_add(sum, x);
    } else {
      T y = x - comp;
      T t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
  }
  T total() const { return sum; }
};

}  // namespace detail

// Evaluates expressions, terms, and whole formulas against one fixed matrix.
// Sub-expression results are cached by structural key, so shared pieces
// across terms (and across orders, if the caller keeps the instance) are
// computed once. All work is charged against an operation budget; exceeding
// it raises BudgetError instead of silently grinding.
template <class T>
class Evaluator {
 public:
  explicit Evaluator(const Dense<T>& a, double op_budget = default_op_budget)
      : a_(a), budget_(op_budget) {}

  double ops_used() const { return ops_used_; }

  const std::vector<T>& vec(const Expr& e) {
    std::string key = expr_key(e);
    auto it = vec_cache_.find(key);
    if (it != vec_cache_.end()) return it->second;
    std::vector<T> v = compute_vec(e);
    return vec_cache_.emplace(std::move(key), std::move(v)).first->second;
  }

  const Dense<T>& mat(const Expr& e) {
    if (e.op == Op::base_a) return a_;
    std::string key = expr_key(e);
    auto it = mat_cache_.find(key);
    if (it != mat_cache_.end()) return it->second;
    Dense<T> m = compute_mat(e);
    return mat_cache_.emplace(std::move(key), std::move(m)).first->second;
  }

  // 1' times a vector expression.
  T sea_value(const Expr& v) {
    detail::Accum<T> acc;
    for (T x : vec(v)) acc.add(x);
    return acc.total();
  }

  T ifs_value(const Term& t);

  T term_value(const Term& t) {
    return t.kind == TermKind::sea ? sea_value(t.sea_vector) : ifs_value(t);
  }

  T formula_value(const Formula& f) {
    detail::Accum<T> acc;
    for (const Term& t : f.terms) {
      T coef = static_cast<T>(t.coef);
      acc.add(detail::scalar_mul(coef, term_value(t)));
    }
    return acc.total();
  }

 private:
  void charge(double ops, const std::string& what) {
    ops_used_ += ops;
    if (ops_used_ > budget_)
      throw BudgetError("operation budget exceeded while evaluating " + what +
                            " (about " + std::to_string(ops_used_) +
                            " of " + std::to_string(budget_) + " allowed ops)",
                        ops_used_);
  }

  std::vector<T> apply_matrix(const Expr& m, const std::vector<T>& v) {
    int n = a_.n;
    std::vector<T> out(static_cast<std::size_t>(n), T{});
    if (m.op == Op::diag) {
      charge(static_cast<double>(n), "a diagonal product");
      const std::vector<T>& d = vec(m.args[0]);
      for (int i = 0; i < n; ++i) out[i] = detail::scalar_mul(d[i], v[i]);
      return out;
    }
    charge(2.0 * n * n, "a matrix-vector product");
    const Dense<T>& mm = mat(m);
    for (int i = 0; i < n; ++i) {
      detail::Accum<T> acc;
      const T* row = &mm.a[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) acc.add(detail::scalar_mul(row[j], v[j]));
      out[i] = acc.total();
    }
    return out;
  }

  std::vector<T> compute_vec(const Expr& e) {
    int n = a_.n;
    switch (e.op) {
      case Op::ones:
        return std::vector<T>(static_cast<std::size_t>(n), T{1});
      case Op::hadamard_v: {
        charge(static_cast<double>(n) * e.args.size(), "an entrywise vector product");
        std::vector<T> out(static_cast<std::size_t>(n), T{1});
        for (const Expr& a : e.args) {
          const std::vector<T>& v = vec(a);
          for (int i = 0; i < n; ++i) out[i] = detail::scalar_mul(out[i], v[i]);
        }
        return out;
      }
      case Op::matvec: {
        const Expr& m = e.args[0];
        // peel product chains one factor at a time so every suffix lands in
        // the cache as its own matvec
        if (m.op == Op::matmul) {
          std::vector<Expr> rest(m.args.begin() + 1, m.args.end());
          Expr suffix = matvec(matmul(std::move(rest)), e.args[1]);
          return apply_matrix(m.args[0], vec(suffix));
        }
        return apply_matrix(m, vec(e.args[1]));
      }
      default:
        throw std::logic_error("evaluate: not a vector expression");
    }
  }

  Dense<T> compute_mat(const Expr& e) {
    int n = a_.n;
    switch (e.op) {
      case Op::base_a:
        return a_;
      case Op::diag: {
        charge(static_cast<double>(n) * n, "a diagonal matrix");
        const std::vector<T>& d = vec(e.args[0]);
        Dense<T> out(n);
        for (int i = 0; i < n; ++i) out.at(i, i) = d[i];
        return out;
      }
      case Op::hadamard: {
        charge(static_cast<double>(n) * n * e.args.size(), "an entrywise matrix product");
        Dense<T> out(n);
        for (T& x : out.a) x = T{1};
        for (const Expr& a : e.args) {
          const Dense<T>& m = mat(a);
          for (std::size_t i = 0; i < out.a.size(); ++i)
            out.a[i] = detail::scalar_mul(out.a[i], m.a[i]);
        }
        return out;
      }
      case Op::matmul: {
        // peel the last factor so every prefix lands in the cache; power
        // chains of different lengths then share all their partial products
        const Expr* lhs_expr;
        Expr prefix;
        if (e.args.size() > 2) {
          prefix = matmul(std::vector<Expr>(e.args.begin(), e.args.end() - 1));
          lhs_expr = &prefix;
        } else {
          lhs_expr = &e.args[0];
        }
        charge(2.0 * n * n * n, "a matrix-matrix product");
        const Dense<T>& lhs = mat(*lhs_expr);
        const Dense<T>& rhs = mat(e.args.back());
        Dense<T> out(n);
        for (int i = 0; i < n; ++i) {
          const T* lrow = &lhs.a[static_cast<std::size_t>(i) * n];
          T* orow = &out.a[static_cast<std::size_t>(i) * n];
          for (int kk = 0; kk < n; ++kk) {
            T x = lrow[kk];
            if (x == T{}) continue;
            const T* rrow = &rhs.a[static_cast<std::size_t>(kk) * n];
            for (int j = 0; j < n; ++j)
              orow[j] = detail::scalar_add(orow[j], detail::scalar_mul(x, rrow[j]));
          }
        }
        return out;
      }
      default:
        throw std::logic_error("evaluate: not a matrix expression");
    }
  }

  const Dense<T>& a_;
  double budget_;
  double ops_used_ = 0;
  std::map<std::string, std::vector<T>> vec_cache_;
  std::map<std::string, Dense<T>> mat_cache_;
};

template <class T>
T Evaluator<T>::ifs_value(const Term& t) {
  int n = a_.n;
  int layers = t.layers;
  double est = 1;
  for (int i = 0; i < layers; ++i) est *= n;
  charge(est, "a depth-" + std::to_string(layers) + " layered sum");

  // factors grouped by their later position; at level q every factor's row
  // index is already fixed, so the q loop walks contiguous rows
  struct LevelFactor {
    int p;
    const T* data;  // matrix base, row stride n
  };
  std::vector<std::vector<LevelFactor>> at_level(static_cast<std::size_t>(layers) + 1);
  for (const IfsFactor& f : t.factors)
    at_level[static_cast<std::size_t>(f.q)].push_back({f.p, mat(f.label).a.data()});

  std::vector<int> idx(static_cast<std::size_t>(layers) + 1, -1);
  std::vector<const T*> last_rows(at_level[static_cast<std::size_t>(layers)].size());
  detail::Accum<T> acc;

  auto descend = [&](auto&& self, int level, T partial) -> void {
    if (level == layers) {
      const auto& facs = at_level[static_cast<std::size_t>(level)];
      for (std::size_t r = 0; r < facs.size(); ++r)
        last_rows[r] = facs[r].data + static_cast<std::size_t>(idx[facs[r].p]) * n;
      detail::Accum<T> inner;
      for (int i = 0; i < n; ++i) {
        T prod = partial;
        for (const T* r : last_rows) prod = detail::scalar_mul(prod, r[i]);
        inner.add(prod);
      }
      acc.add(inner.total());
      return;
    }
    const auto& facs = at_level[static_cast<std::size_t>(level)];
    for (int i = 0; i < n; ++i) {
      T p = partial;
      for (const LevelFactor& f : facs)
        p = detail::scalar_mul(p, f.data[static_cast<std::size_t>(idx[f.p]) * n + i]);
      if (p == T{}) continue;
      idx[level] = i;
      self(self, level + 1, p);
    }
  };
  descend(descend, 1, T{1});
  return acc.total();
}

// Direct evaluation straight from the definition: a sum over ordered tuples
// of distinct indices of the product of entries along the closed walk.
template <class T>
T brute_force_cm(const Dense<T>& a, int m, double op_budget = default_op_budget) {
  if (m < 3) throw std::invalid_argument("brute force: order must be at least 3");
  int n = a.n;
  double est = 1;
  for (int i = 0; i < m; ++i) est *= n;
  if (est > op_budget)
    throw BudgetError("brute force refused: about " + std::to_string(est) +
                          " tuples for n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                          " exceeds the budget of " + std::to_string(op_budget) +
                          " (raise the budget to force it)",
                      est);
  if (n < m) return T{};

  std::vector<int> tuple(static_cast<std::size_t>(m));
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  detail::Accum<T> acc;
  auto descend = [&](auto&& self, int depth, T partial) -> void {
    if (depth == m) {
      acc.add(detail::scalar_mul(partial, a.at(tuple[m - 1], tuple[0])));
      return;
    }
    int prev = tuple[depth - 1];
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      T p = detail::scalar_mul(partial, a.at(prev, i));
      if (p == T{}) continue;
      tuple[depth] = i;
      used[i] = 1;
      self(self, depth + 1, p);
      used[i] = 0;
    }
  };
  for (int i = 0; i < n; ++i) {
    tuple[0] = i;
    used[i] = 1;
    descend(descend, 1, T{1});
    used[i] = 0;
  }
  return acc.total();
}

template <class T>
T eval_formula(const Formula& f, const Dense<T>& a, double op_budget = default_op_budget) {
  Evaluator<T> ev(a, op_budget);
  return ev.formula_value(f);
}

struct BenchRow {
  int n = 0;
  double formula_seconds = 0;
  double formula_value = 0;
  bool brute_measured = false;
  double brute_seconds = 0;  // measured or extrapolated
  double brute_value = 0;    // only when measured
};

struct BenchReport {
  int m = 0;
  std::vector<BenchRow> rows;
  double growth_exponent = 0;  // least-squares slope of log time vs log size
};

inline BenchReport run_bench(const Formula& f, const std::vector<int>& sizes,
                             std::uint64_t seed, double brute_budget = 2e8) {
  if (sizes.size() < 2) throw std::invalid_argument("bench: need at least two sizes");
  BenchReport rep;
  rep.m = f.m;
  using clock = std::chrono::steady_clock;

  double brute_rate = 0;  // tuples per second, calibrated on the largest affordable run
  for (int n : sizes) {
    if (n < 2) throw std::invalid_argument("bench: sizes must be at least 2");
    BenchRow row;
    row.n = n;
    Dense<double> a = random_hollow_symmetric(n, seed + static_cast<std::uint64_t>(n));

    double need = 0;
    for (const Term& t : f.terms)
      if (t.kind == TermKind::ifs) need += std::pow(n, t.layers);
    double eval_budget = std::max(default_op_budget, 4 * (need + 1e8));

    auto t0 = clock::now();
    row.formula_value = eval_formula(f, a, eval_budget);
    row.formula_seconds = std::chrono::duration<double>(clock::now() - t0).count();

    double tuples = std::pow(n, f.m);
    if (tuples <= brute_budget) {
      auto t1 = clock::now();
      row.brute_value = brute_force_cm(a, f.m, brute_budget * 2);
      row.brute_seconds = std::chrono::duration<double>(clock::now() - t1).count();
      row.brute_measured = true;
      if (row.brute_seconds > 0.01) brute_rate = tuples / row.brute_seconds;
    } else {
      if (brute_rate == 0) {
        int nc = std::max(2, static_cast<int>(std::floor(std::pow(brute_budget / 4, 1.0 / f.m))));
        Dense<double> cal = random_hollow_symmetric(nc, seed + 1);
        auto t1 = clock::now();
        brute_force_cm(cal, f.m, brute_budget);
        double sec = std::chrono::duration<double>(clock::now() - t1).count();
        brute_rate = std::pow(nc, f.m) / std::max(sec, 1e-9);
      }
      row.brute_seconds = tuples / brute_rate;
    }
    rep.rows.push_back(row);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const BenchRow& r : rep.rows) {
    if (r.formula_seconds <= 0) continue;
    double x = std::log(static_cast<double>(r.n)), y = std::log(r.formula_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt >= 2) rep.growth_exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return rep;
}

}  // namespace ceef
