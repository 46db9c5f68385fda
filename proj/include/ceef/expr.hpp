#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ceef {

// Symbolic expressions over a single square matrix A and the all-ones vector.
//
// Matrix-valued ops:  base_a, hadamard, matmul, diag
// Vector-valued ops:  ones, matvec, hadamard_v
//
// Structural invariants (maintained by the factory functions, restored by
// normalize()):
//   - hadamard / hadamard_v nodes are flat (no nested node of the same op)
//     and their children are sorted; hadamard_v never contains ones
//   - matmul nodes are flat, contain no identity factor, and keep order
//   - single-child hadamard / matmul / hadamard_v collapse to the child
//   - matvec on the identity matrix collapses to its vector argument
enum class Op : std::uint8_t {
  base_a,
  hadamard,
  matmul,
  diag,
  ones,
  matvec,
  hadamard_v,
};

struct Expr {
  Op op = Op::base_a;
  std::vector<Expr> args;

  bool is_vector() const {
    return op == Op::ones || op == Op::matvec || op == Op::hadamard_v;
  }
  bool is_matrix() const { return !is_vector(); }

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.op == b.op && a.args == b.args;
  }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
};

inline std::size_t tree_size(const Expr& e) {
  std::size_t s = 1;
  for (const Expr& a : e.args) s += tree_size(a);
  return s;
}

// Compact structural key; also the memoization key used by the evaluator.
inline void append_key(const Expr& e, std::string& out) {
  switch (e.op) {
    case Op::base_a: out += 'A'; return;
    case Op::ones: out += '1'; return;
    case Op::hadamard: out += "(h"; break;
    case Op::matmul: out += "(m"; break;
    case Op::diag: out += "(d"; break;
    case Op::matvec: out += "(v"; break;
    case Op::hadamard_v: out += "(w"; break;
  }
  for (const Expr& a : e.args) append_key(a, out);
  out += ')';
}

inline std::string expr_key(const Expr& e) {
  std::string out;
  append_key(e, out);
  return out;
}

// Order used wherever children must be arranged deterministically:
// smaller trees first, ties broken by the structural key.
inline bool expr_less(const Expr& a, const Expr& b) {
  std::size_t sa = tree_size(a), sb = tree_size(b);
  if (sa != sb) return sa < sb;
  return expr_key(a) < expr_key(b);
}

inline Expr base_a() { return Expr{Op::base_a, {}}; }
inline Expr ones() { return Expr{Op::ones, {}}; }

inline bool is_identity(const Expr& e) {
  return e.op == Op::diag && e.args.size() == 1 && e.args[0].op == Op::ones;
}

inline Expr diag(Expr v) {
  if (!v.is_vector()) throw std::invalid_argument("diag: argument must be vector-valued");
  return Expr{Op::diag, {std::move(v)}};
}

inline Expr identity() { return diag(ones()); }

inline Expr hadamard(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  for (Expr& f : factors) {
    if (!f.is_matrix()) throw std::invalid_argument("hadamard: factors must be matrix-valued");
    if (f.op == Op::hadamard) {
      for (Expr& g : f.args) flat.push_back(std::move(g));
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (flat.empty()) throw std::invalid_argument("hadamard: no factors");
  if (flat.size() == 1) return std::move(flat[0]);
  std::sort(flat.begin(), flat.end(), expr_less);
  return Expr{Op::hadamard, std::move(flat)};
}

inline Expr matmul(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  for (Expr& f : factors) {
    if (!f.is_matrix()) throw std::invalid_argument("matmul: factors must be matrix-valued");
    if (f.op == Op::matmul) {
      for (Expr& g : f.args) flat.push_back(std::move(g));
    } else if (!is_identity(f)) {
      flat.push_back(std::move(f));
    }
  }
  if (flat.empty()) return identity();
  if (flat.size() == 1) return std::move(flat[0]);
  return Expr{Op::matmul, std::move(flat)};
}

inline Expr matvec(Expr m, Expr v) {
  if (!m.is_matrix() || !v.is_vector())
    throw std::invalid_argument("matvec: needs a matrix and a vector");
  if (is_identity(m)) return v;
  return Expr{Op::matvec, {std::move(m), std::move(v)}};
}

inline Expr hadamard_v(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  for (Expr& f : factors) {
    if (!f.is_vector()) throw std::invalid_argument("hadamard_v: factors must be vector-valued");
    if (f.op == Op::hadamard_v) {
      for (Expr& g : f.args) flat.push_back(std::move(g));
    } else if (f.op != Op::ones) {
      flat.push_back(std::move(f));
    }
  }
  if (flat.empty()) return ones();
  if (flat.size() == 1) return std::move(flat[0]);
  std::sort(flat.begin(), flat.end(), expr_less);
  return Expr{Op::hadamard_v, std::move(flat)};
}

// Rebuilds the tree through the factories, restoring every invariant.
inline Expr normalize(const Expr& e) {
  std::vector<Expr> kids;
  kids.reserve(e.args.size());
  for (const Expr& a : e.args) kids.push_back(normalize(a));
  switch (e.op) {
    case Op::base_a: return base_a();
    case Op::ones: return ones();
    case Op::hadamard: return hadamard(std::move(kids));
    case Op::matmul: return matmul(std::move(kids));
    case Op::diag: return diag(std::move(kids[0]));
    case Op::matvec: return matvec(std::move(kids[0]), std::move(kids[1]));
    case Op::hadamard_v: return hadamard_v(std::move(kids));
  }
  throw std::logic_error("normalize: bad op");
}

// Transpose of a matrix-valued expression. A is symmetric and diag matrices
// are symmetric, so transposition only reverses matmul chains; the result is
// renormalized so transposes never appear as explicit nodes.
inline Expr transpose(const Expr& m) {
  if (!m.is_matrix()) throw std::invalid_argument("transpose: matrix expression expected");
  switch (m.op) {
    case Op::base_a:
    case Op::diag:
      return m;
    case Op::hadamard: {
      std::vector<Expr> kids;
      kids.reserve(m.args.size());
      for (const Expr& a : m.args) kids.push_back(transpose(a));
      return hadamard(std::move(kids));
    }
    case Op::matmul: {
      std::vector<Expr> kids;
      kids.reserve(m.args.size());
      for (auto it = m.args.rbegin(); it != m.args.rend(); ++it)
        kids.push_back(transpose(*it));
      return matmul(std::move(kids));
    }
    default:
      throw std::logic_error("transpose: bad op");
  }
}

inline bool is_symmetric_expr(const Expr& m) { return transpose(m) == m; }

}  // namespace ceef
