#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ceef/catalog.hpp"
#include "ceef/formula.hpp"

namespace ceef {

namespace detail {

// The two text flavors share all structure; only the tokens differ.
struct Tokens {
  std::string ones, ones_t, circ, cdot, diag_open, tr_open, sup_open, sup_close;
};

inline const Tokens& latex_tokens() {
  static const Tokens t{"{\\bf 1}_n", "{\\bf 1}_n'", " \\circ ", " \\cdot ",
                        "\\mathrm{d}(", "\\mathrm{tr}(", "^{", "}"};
  return t;
}

inline const Tokens& text_tokens() {
  static const Tokens t{"1n", "1n'", " o ", " . ", "d(", "tr(", "^", ""};
  return t;
}

inline std::string matrix_str(const Expr& m, const Tokens& tk);

// True when every product factor is the same expression, so the whole product
// prints as one power and needs no extra parentheses.
inline bool single_run(const Expr& m) {
  for (const Expr& a : m.args)
    if (!(a == m.args[0])) return false;
  return true;
}

inline std::string vector_str(const Expr& v, const Tokens& tk) {
  switch (v.op) {
    case Op::ones:
      return tk.ones;
    case Op::matvec: {
      const Expr& m = v.args[0];
      int power = 1;
      const Expr* inner = &v.args[1];
      while (inner->op == Op::matvec && inner->args[0] == m) {
        ++power;
        inner = &inner->args[1];
      }
      std::string ms = matrix_str(m, tk);
      bool atomic = m.op == Op::base_a || m.op == Op::diag;
      if (power > 1) {
        if (!atomic) ms = "(" + ms + ")";
        ms += tk.sup_open + std::to_string(power) + tk.sup_close;
      } else if (!atomic && !(m.op == Op::matmul && single_run(m))) {
        ms = "(" + ms + ")";
      }
      std::string vs = vector_str(*inner, tk);
      if (inner->op != Op::ones) vs = "(" + vs + ")";
      return ms + tk.cdot + vs;
    }
    case Op::hadamard_v: {
      std::string out;
      for (std::size_t i = 0; i < v.args.size(); ++i) {
        if (i) out += tk.circ;
        out += "(" + vector_str(v.args[i], tk) + ")";
      }
      return out;
    }
    default:
      throw std::logic_error("vector_str: not a vector expression");
  }
}

inline std::string matrix_str(const Expr& m, const Tokens& tk) {
  switch (m.op) {
    case Op::base_a:
      return "A";
    case Op::diag:
      return tk.diag_open + vector_str(m.args[0], tk) + ")";
    case Op::hadamard: {
      std::string out;
      for (std::size_t i = 0; i < m.args.size(); ++i) {
        if (i) out += tk.circ;
        const Expr& a = m.args[i];
        std::string s = matrix_str(a, tk);
        out += (a.op == Op::matmul && !single_run(a)) ? "(" + s + ")" : s;
      }
      return out;
    }
    case Op::matmul: {
      // equal consecutive factors collapse into a power
      std::string out;
      std::size_t i = 0;
      while (i < m.args.size()) {
        std::size_t j = i + 1;
        while (j < m.args.size() && m.args[j] == m.args[i]) ++j;
        const Expr& a = m.args[i];
        std::string s = matrix_str(a, tk);
        if (a.op == Op::hadamard) s = "(" + s + ")";
        if (j - i > 1) s += tk.sup_open + std::to_string(j - i) + tk.sup_close;
        if (i) out += tk.cdot;
        out += s;
        i = j;
      }
      return out;
    }
    default:
      throw std::logic_error("matrix_str: not a matrix expression");
  }
}

// Plain power of A, or 0 if the expression is anything else.
inline int power_of_a(const Expr& e) {
  if (e.op == Op::base_a) return 1;
  if (e.op != Op::matmul) return 0;
  for (const Expr& a : e.args)
    if (a.op != Op::base_a) return 0;
  return static_cast<int>(e.args.size());
}

// 1'(A^p o A^q)1 sums the entrywise product of two powers of a symmetric
// matrix, which is tr(A^(p+q)); recognize that shape for display.
inline int trace_power(const Expr& sea) {
  if (sea.op != Op::matvec || sea.args[1].op != Op::ones) return 0;
  const Expr& h = sea.args[0];
  if (h.op != Op::hadamard || h.args.size() != 2) return 0;
  int p = power_of_a(h.args[0]);
  int q = power_of_a(h.args[1]);
  return (p > 0 && q > 0) ? p + q : 0;
}

inline std::string term_body(const Term& t, const Tokens& tk, bool latex) {
  if (t.kind == TermKind::sea) {
    if (int p = trace_power(t.sea_vector); p > 0)
      return tk.tr_open + "A" + tk.sup_open + std::to_string(p) + tk.sup_close + ")";
    std::string v = vector_str(t.sea_vector, tk);
    if (t.sea_vector.op == Op::hadamard_v) v = "(" + v + ")";
    return tk.ones_t + tk.cdot + v;
  }
  std::string out = latex ? "\\sum_{" : "sum_{";
  for (int i = 1; i <= t.layers; ++i) {
    if (latex)
      out += "i_{" + std::to_string(i) + "}";
    else
      out += (i > 1 ? " i" : "i") + std::to_string(i);
  }
  out += '}';
  for (const IfsFactor& f : t.factors) {
    out += ' ';
    std::string s = matrix_str(f.label, tk);
    if (f.label.op != Op::base_a) s = "(" + s + ")";
    if (latex)
      out += s + "_{i_{" + std::to_string(f.p) + "} i_{" + std::to_string(f.q) + "}}";
    else
      out += s + "_{i" + std::to_string(f.p) + ",i" + std::to_string(f.q) + "}";
  }
  return out;
}

inline std::string signed_coef(std::int64_t c) {
  return (c >= 0 ? "+" : "") + std::to_string(c);
}

}  // namespace detail

inline std::string latex_expr(const Expr& e) {
  return e.is_vector() ? detail::vector_str(e, detail::latex_tokens())
                       : detail::matrix_str(e, detail::latex_tokens());
}

inline std::string text_expr(const Expr& e) {
  return e.is_vector() ? detail::vector_str(e, detail::text_tokens())
                       : detail::matrix_str(e, detail::text_tokens());
}

inline std::string emit_latex(const Formula& f) {
  std::string out;
  for (const Term& t : f.terms)
    out += detail::signed_coef(t.coef) + " " +
           detail::term_body(t, detail::latex_tokens(), true) + "\n";
  return out;
}

// 1-based edge list in dictionary order; every entry c [a,b] is an edge
// between vertices a and b with multiplicity c.
inline std::string graph_string(const MultiGraph& g) {
  std::string out = "{";
  bool first = true;
  for (int a = 0; a < g.k; ++a)
    for (int b = a + 1; b < g.k; ++b) {
      if (g.weight(a, b) == 0) continue;
      if (!first) out += "; ";
      first = false;
      out += std::to_string(g.weight(a, b)) + " [" + std::to_string(a + 1) + "," +
             std::to_string(b + 1) + "]";
    }
  return out + "}";
}

inline std::string emit_text(const Formula& f, const Catalog& cat) {
  std::map<std::pair<int, int>, const GraphClass*> by_kt;
  for (const GraphClass& c : cat.classes) by_kt[{c.k, c.t}] = &c;
  std::string out;
  out += "# order " + std::to_string(f.m) + ", " + std::to_string(f.terms.size()) + " terms\n";
  out += "# each c [a,b] in a graph is an edge between vertices a and b with multiplicity c\n";
  for (const Term& t : f.terms) {
    auto it = by_kt.find({t.k, t.t});
    if (it == by_kt.end()) throw std::invalid_argument("emit_text: catalog does not match formula");
    out += detail::signed_coef(t.coef) + " " +
           detail::term_body(t, detail::text_tokens(), false) + "    [k=" +
           std::to_string(t.k) + " t=" + std::to_string(t.t) + " graph=" +
           graph_string(it->second->graph) + "]\n";
  }
  return out;
}

inline std::string catalog_text(const Catalog& cat) {
  std::string out;
  out += "# order " + std::to_string(cat.m) + ", " + std::to_string(cat.classes.size()) +
         " classes\n";
  out += "# each c [a,b] in a graph is an edge between vertices a and b with multiplicity c\n";
  for (const GraphClass& c : cat.classes)
    out += "k=" + std::to_string(c.k) + " t=" + std::to_string(c.t) + " d=" +
           std::to_string(c.d) + " h=" + std::to_string(c.h) + " a=" + std::to_string(c.a) +
           " graph=" + graph_string(c.graph) + "\n";
  return out;
}

inline nlohmann::ordered_json ast_to_json(const Expr& e) {
  nlohmann::ordered_json j;
  switch (e.op) {
    case Op::base_a: j["op"] = "A"; break;
    case Op::ones: j["op"] = "ones"; break;
    case Op::hadamard:
    case Op::hadamard_v: j["op"] = "hadamard"; break;
    case Op::matmul: j["op"] = "matmul"; break;
    case Op::diag: j["op"] = "diag"; break;
    case Op::matvec: j["op"] = "matvec"; break;
  }
  j["args"] = nlohmann::ordered_json::array();
  for (const Expr& a : e.args) j["args"].push_back(ast_to_json(a));
  return j;
}

inline Expr ast_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw std::invalid_argument(path + ": expected an object");
  std::string op = j.value("op", std::string());
  if (op.empty()) throw std::invalid_argument(path + ": missing op");
  std::vector<Expr> args;
  if (j.contains("args")) {
    if (!j["args"].is_array()) throw std::invalid_argument(path + ".args: expected an array");
    int i = 0;
    for (const auto& a : j["args"])
      args.push_back(ast_from_json(a, path + ".args[" + std::to_string(i++) + "]"));
  }
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw std::invalid_argument(path + ": op '" + op + "' has wrong arity");
  };
  try {
    if (op == "A") { arity(0, 0); return base_a(); }
    if (op == "ones") { arity(0, 0); return ones(); }
    if (op == "diag") { arity(1, 1); return diag(std::move(args[0])); }
    if (op == "matvec") { arity(2, 2); return matvec(std::move(args[0]), std::move(args[1])); }
    if (op == "matmul") { arity(1, 64); return matmul(std::move(args)); }
    if (op == "hadamard") {
      arity(1, 64);
      bool vec = args[0].is_vector();
      for (const Expr& a : args)
        if (a.is_vector() != vec)
          throw std::invalid_argument(path + ": hadamard mixes matrix and vector arguments");
      return vec ? hadamard_v(std::move(args)) : hadamard(std::move(args));
    }
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    throw std::invalid_argument(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
  }
  throw std::invalid_argument(path + ": unknown op '" + op + "'");
}

inline nlohmann::ordered_json formula_to_json(const Formula& f) {
  nlohmann::ordered_json j;
  j["m"] = f.m;
  j["terms"] = nlohmann::ordered_json::array();
  for (const Term& t : f.terms) {
    nlohmann::ordered_json jt;
    jt["coef"] = t.coef;
    jt["kind"] = t.kind == TermKind::sea ? "sea" : "ifs";
    jt["k"] = t.k;
    jt["t"] = t.t;
    if (t.kind == TermKind::sea) {
      jt["expr"] = ast_to_json(t.sea_vector);
    } else {
      jt["layers"] = t.layers;
      jt["factors"] = nlohmann::ordered_json::array();
      for (const IfsFactor& fc : t.factors) {
        nlohmann::ordered_json jf;
        jf["p"] = fc.p;
        jf["q"] = fc.q;
        jf["expr"] = ast_to_json(fc.label);
        jf["oriented"] = fc.oriented;
        jt["factors"].push_back(std::move(jf));
      }
    }
    j["terms"].push_back(std::move(jt));
  }
  return j;
}

inline std::string emit_json(const Formula& f) { return formula_to_json(f).dump(1) + "\n"; }

inline Formula formula_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("formula data: expected an object");
  Formula f;
  f.m = j.value("m", 0);
  if (f.m < 3) throw std::invalid_argument("formula data: bad or missing m");
  if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
    throw std::invalid_argument("formula data: terms must be a non-empty array");
  int ti = 0;
  for (const auto& jt : j["terms"]) {
    std::string path = "terms[" + std::to_string(ti++) + "]";
    Term t;
    if (!jt.contains("coef") || !jt["coef"].is_number_integer())
      throw std::invalid_argument(path + ": missing integer coef");
    t.coef = jt["coef"].get<std::int64_t>();
    if (t.coef == 0) throw std::invalid_argument(path + ": zero coefficient");
    t.k = jt.value("k", 0);
    t.t = jt.value("t", 0);
    if (t.k < 2 || t.t < 1) throw std::invalid_argument(path + ": bad class indices");
    std::string kind = jt.value("kind", std::string());
    if (kind == "sea") {
      t.kind = TermKind::sea;
      if (!jt.contains("expr")) throw std::invalid_argument(path + ": sea term without expr");
      t.sea_vector = ast_from_json(jt["expr"], path + ".expr");
      if (!t.sea_vector.is_vector())
        throw std::invalid_argument(path + ".expr: sea expression must be vector-valued");
    } else if (kind == "ifs") {
      t.kind = TermKind::ifs;
      t.layers = jt.value("layers", 0);
      if (t.layers < 4) throw std::invalid_argument(path + ": ifs term needs layers >= 4");
      if (!jt.contains("factors") || !jt["factors"].is_array() || jt["factors"].empty())
        throw std::invalid_argument(path + ": ifs term needs a non-empty factors array");
      int fi = 0;
      for (const auto& jf : jt["factors"]) {
        std::string fpath = path + ".factors[" + std::to_string(fi++) + "]";
        IfsFactor fc;
        fc.p = jf.value("p", 0);
        fc.q = jf.value("q", 0);
        if (fc.p < 1 || fc.q <= fc.p || fc.q > t.layers)
          throw std::invalid_argument(fpath + ": factor positions must satisfy 1 <= p < q <= layers");
        if (!jf.contains("expr")) throw std::invalid_argument(fpath + ": missing expr");
        fc.label = ast_from_json(jf["expr"], fpath + ".expr");
        if (!fc.label.is_matrix())
          throw std::invalid_argument(fpath + ".expr: factor must be matrix-valued");
        fc.oriented = jf.value("oriented", !is_symmetric_expr(fc.label));
        t.factors.push_back(std::move(fc));
      }
    } else {
      throw std::invalid_argument(path + ": kind must be \"sea\" or \"ifs\"");
    }
    f.terms.push_back(std::move(t));
  }
  return f;
}

inline Formula parse_formula(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("formula data: ") + e.what());
  }
  return formula_from_json(j);
}

}  // namespace ceef
