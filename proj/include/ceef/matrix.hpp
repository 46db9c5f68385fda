#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ceef {

template <class T>
struct Dense {
  int n = 0;
  std::vector<T> a;

  Dense() = default;
  explicit Dense(int size) : n(size), a(static_cast<std::size_t>(size) * size, T{}) {}

  T& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  const T& at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

  friend bool operator==(const Dense& x, const Dense& y) { return x.n == y.n && x.a == y.a; }
};

// The statistic ignores the diagonal and requires symmetry; loading enforces
// the former by zeroing and the latter by rejecting.
template <class T>
void require_symmetric_hollow(Dense<T>& m) {
  for (int i = 0; i < m.n; ++i) {
    m.at(i, i) = T{};
    for (int j = i + 1; j < m.n; ++j)
      if (m.at(i, j) != m.at(j, i))
        throw std::invalid_argument("matrix: entry (" + std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + ") is not symmetric");
  }
}

// Input format: first line is the dimension, optionally followed by the word
// "integer" to request exact arithmetic; then n rows of n numbers.
struct MatrixData {
  bool integer_mode = false;
  Dense<double> real;
  Dense<long long> exact;

  int n() const { return integer_mode ? exact.n : real.n; }
};

inline MatrixData load_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("matrix: empty input");
  std::istringstream hs(header);
  int n = 0;
  if (!(hs >> n) || n < 1) throw std::invalid_argument("matrix: bad dimension line");
  std::string mode;
  MatrixData md;
  if (hs >> mode) {
    if (mode != "integer")
      throw std::invalid_argument("matrix: unrecognized header flag '" + mode + "'");
    md.integer_mode = true;
  }
  std::string tail;
  if (hs >> tail) throw std::invalid_argument("matrix: trailing tokens on dimension line");

  if (md.integer_mode) {
    md.exact = Dense<long long>(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!(in >> md.exact.at(i, j)))
          throw std::invalid_argument("matrix: expected " + std::to_string(n * n) +
                                      " integer entries");
    require_symmetric_hollow(md.exact);
  } else {
    md.real = Dense<double>(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!(in >> md.real.at(i, j)))
          throw std::invalid_argument("matrix: expected " + std::to_string(n * n) + " entries");
    require_symmetric_hollow(md.real);
  }
  double extra;
  if (in >> extra) throw std::invalid_argument("matrix: trailing entries after the last row");
  return md;
}

inline std::string format_scalar(double x) {
  std::ostringstream os;
  os << std::setprecision(15) << x;
  return os.str();
}

inline std::string format_scalar(long long x) { return std::to_string(x); }

// Deterministic generators used by tests, validation, and benchmarks.

inline Dense<double> random_hollow_symmetric(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dense<double> m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m.at(i, j) = m.at(j, i) = u(rng);
  return m;
}

inline Dense<long long> random_binary_graph(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dense<long long> m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m.at(i, j) = m.at(j, i) = (u(rng) < p) ? 1 : 0;
  return m;
}

template <class T>
Dense<T> complete_graph(int n) {
  Dense<T> m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.at(i, j) = (i == j) ? T{0} : T{1};
  return m;
}

template <class T>
Dense<T> permuted(const Dense<T>& m, const std::vector<int>& perm) {
  Dense<T> out(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out.at(i, j) = m.at(perm[i], perm[j]);
  return out;
}

}  // namespace ceef
