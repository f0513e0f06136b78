#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chain.hpp"
#include "model_io.hpp"

namespace anyonic {

enum class Layout { Simple, Generalized };

// Simple labels are (a, c, f); Generalized labels are (c2, a, g, c1, f).
// The vertex index mu is always 0 in the multiplicity-free setting and is
// only materialized in the text format.
using Labels = std::vector<Charge>;

struct TargetState {
  Layout layout = Layout::Simple;
  std::map<std::pair<Labels, Labels>, cplx> entries;

  cplx at(const Labels& ket, const Labels& bra) const {
    auto it = entries.find({ket, bra});
    return it == entries.end() ? cplx(0) : it->second;
  }

  double trace() const {
    double t = 0;
    for (const auto& [k, v] : entries)
      if (k.first == k.second) t += v.real();
    return t;
  }
};

inline int label_size(Layout l) { return l == Layout::Simple ? 3 : 5; }

inline Charge total_of(Layout l, const Labels& x) { return x[label_size(l) - 1]; }

inline Charge a_of(Layout l, const Labels& x) { return l == Layout::Simple ? x[0] : x[1]; }

inline bool labels_admissible(const AnyonModel& m, Layout l, const Labels& x) {
  if (static_cast<int>(x.size()) != label_size(l)) return false;
  for (Charge c : x)
    if (c < 0 || c >= m.rank()) return false;
  if (l == Layout::Simple) return m.Nabc(x[0], x[1], x[2]) != 0;
  return m.Nabc(x[0], x[1], x[2]) && m.Nabc(x[2], x[3], x[4]);
}

inline std::vector<Leaf> layout_leaves(const AnyonModel& m, const TargetState& s) {
  const int n = s.layout == Layout::Simple ? 2 : 3;
  std::vector<std::set<Charge>> sets(n);
  for (const auto& [k, v] : s.entries) {
    for (const Labels* x : {&k.first, &k.second}) {
      if (s.layout == Layout::Simple) {
        sets[0].insert((*x)[0]);
        sets[1].insert((*x)[1]);
      } else {
        sets[0].insert((*x)[0]);
        sets[1].insert((*x)[1]);
        sets[2].insert((*x)[3]);
      }
    }
  }
  (void)m;
  std::vector<Leaf> leaves;
  if (s.layout == Layout::Simple) {
    leaves.push_back({{sets[0].begin(), sets[0].end()}, Tag::Between});
    leaves.push_back({{sets[1].begin(), sets[1].end()}, Tag::Below});
  } else {
    leaves.push_back({{sets[0].begin(), sets[0].end()}, Tag::Above});
    leaves.push_back({{sets[1].begin(), sets[1].end()}, Tag::Between});
    leaves.push_back({{sets[2].begin(), sets[2].end()}, Tag::Below});
  }
  for (auto& l : leaves)
    if (l.charges.empty()) l.charges.push_back(0);
  return leaves;
}

inline std::vector<int> labels_to_chain(Layout l, const Labels& x) {
  if (l == Layout::Simple) return {x[0], x[1], x[0], x[2]};
  return {x[0], x[1], x[3], x[0], x[2], x[4]};
}

inline Labels chain_to_labels(Layout l, const std::vector<int>& s) {
  if (l == Layout::Simple) return {s[0], s[1], s[3]};
  return {s[0], s[1], s[4], s[2], s[5]};
}

// Chain representation over the given leaves (defaults to the support of s).
inline std::pair<ChainBasis, MatrixXc> to_chain(const AnyonModel& m, const TargetState& s,
                                                const std::vector<Leaf>* leaves = nullptr) {
  ChainBasis b(m, leaves ? *leaves : layout_leaves(m, s));
  MatrixXc r = MatrixXc::Zero(b.size(), b.size());
  for (const auto& [k, v] : s.entries) {
    int i = b.find(labels_to_chain(s.layout, k.first));
    int j = b.find(labels_to_chain(s.layout, k.second));
    if (i < 0 || j < 0) throw Error(ErrorKind::NotAState, "entry outside the chain basis");
    r(i, j) = v;
  }
  return {b, r};
}

inline TargetState from_chain(Layout l, const ChainBasis& b, const MatrixXc& r, double drop = 1e-15) {
  TargetState s;
  s.layout = l;
  for (int i = 0; i < b.size(); ++i)
    for (int j = 0; j < b.size(); ++j)
      if (std::abs(r(i, j)) > drop) s.entries[{chain_to_labels(l, b.state(i)), chain_to_labels(l, b.state(j))}] = r(i, j);
  return s;
}

// Enumerated basis used for Hermiticity and positivity checks: every label
// that occurs in the state.
inline std::vector<Labels> support(const TargetState& s) {
  std::set<Labels> set;
  for (const auto& [k, v] : s.entries) {
    set.insert(k.first);
    set.insert(k.second);
  }
  return {set.begin(), set.end()};
}

inline MatrixXc dense(const TargetState& s, const std::vector<Labels>& basis) {
  MatrixXc r = MatrixXc::Zero(basis.size(), basis.size());
  std::map<Labels, int> idx;
  for (size_t i = 0; i < basis.size(); ++i) idx[basis[i]] = static_cast<int>(i);
  for (const auto& [k, v] : s.entries) r(idx.at(k.first), idx.at(k.second)) = v;
  return r;
}

inline double min_eigenvalue(const MatrixXc& h) {
  if (h.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (h + h.adjoint()));
  return es.eigenvalues().minCoeff();
}

// Throws NotAState unless the state is admissible, Hermitian, trace one and
// positive semidefinite.
inline void validate(const AnyonModel& m, const TargetState& s, double tol = kTol) {
  for (const auto& [k, v] : s.entries) {
    if (!labels_admissible(m, s.layout, k.first) || !labels_admissible(m, s.layout, k.second))
      throw Error(ErrorKind::NotAState, "inadmissible basis label");
    if (total_of(s.layout, k.first) != total_of(s.layout, k.second))
      throw Error(ErrorKind::NotAState, "bra and ket carry different overall charge");
    if (std::abs(v - std::conj(s.at(k.second, k.first))) > tol)
      throw Error(ErrorKind::NotAState, "state is not Hermitian");
  }
  if (std::abs(s.trace() - 1.0) > tol) throw Error(ErrorKind::NotAState, "trace is not 1");
  MatrixXc d = dense(s, support(s));
  if (min_eigenvalue(d) < -tol) throw Error(ErrorKind::NotAState, "state is not positive semidefinite");
}

inline double max_abs_diff(const TargetState& a, const TargetState& b) {
  double e = 0;
  for (const auto& [k, v] : a.entries) e = std::max(e, std::abs(v - b.at(k.first, k.second)));
  for (const auto& [k, v] : b.entries) e = std::max(e, std::abs(v - a.at(k.first, k.second)));
  return e;
}

inline TargetState scaled(const TargetState& s, double f) {
  TargetState r = s;
  for (auto& [k, v] : r.entries) v *= f;
  return r;
}

// Generalized view of a Simple state with C2 = vacuum.
inline TargetState embed_generalized(const TargetState& s) {
  if (s.layout == Layout::Generalized) return s;
  TargetState r;
  r.layout = Layout::Generalized;
  for (const auto& [k, v] : s.entries) {
    Labels a{0, k.first[0], k.first[0], k.first[1], k.first[2]};
    Labels b{0, k.second[0], k.second[0], k.second[1], k.second[2]};
    r.entries[{a, b}] = v;
  }
  return r;
}

// Inverse of embed_generalized; requires every entry to have c2 = vacuum.
inline TargetState reduce_simple(const TargetState& s) {
  if (s.layout == Layout::Simple) return s;
  TargetState r;
  r.layout = Layout::Simple;
  for (const auto& [k, v] : s.entries) {
    if (k.first[0] != 0 || k.second[0] != 0)
      throw Error(ErrorKind::InvalidParameter, "state has a nontrivial C2 component");
    r.entries[{{k.first[1], k.first[3], k.first[4]}, {k.second[1], k.second[3], k.second[4]}}] = v;
  }
  return r;
}

// Text format, one entry per line:
//
//   layout = simple
//   a c f 0 | a' c' f 0 = re+im i
//
// Generalized labels are "c2 a g c1 f 0". Values are written with 17
// significant digits.
inline std::string write_state(const AnyonModel& m, const TargetState& s) {
  std::ostringstream out;
  out << "layout = " << (s.layout == Layout::Simple ? "simple" : "generalized") << "\n";
  for (const auto& [k, v] : s.entries) {
    for (Charge c : k.first) out << m.name(c) << ' ';
    out << "0 |";
    for (Charge c : k.second) out << ' ' << m.name(c);
    out << " 0 = " << format_complex(v) << "\n";
  }
  return out.str();
}

inline TargetState parse_state(const AnyonModel& m, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  TargetState s;
  bool have_layout = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "expected '=' on state line " + std::to_string(lineno));
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key == "layout") {
      if (value == "simple") s.layout = Layout::Simple;
      else if (value == "generalized") s.layout = Layout::Generalized;
      else throw Error(ErrorKind::ParseError, "unknown layout " + value);
      have_layout = true;
      continue;
    }
    if (!have_layout) throw Error(ErrorKind::ParseError, "layout must come first");
    auto bar = key.find('|');
    if (bar == std::string::npos) throw Error(ErrorKind::ParseError, "expected '|' on state line " + std::to_string(lineno));
    auto parse_labels = [&](const std::string& part) {
      auto toks = detail::split_ws(part);
      const size_t want = static_cast<size_t>(label_size(s.layout)) + 1;
      if (toks.size() != want) throw Error(ErrorKind::ParseError, "wrong label count on state line " + std::to_string(lineno));
      if (toks.back() != "0") throw Error(ErrorKind::MultiplicityUnsupported, "vertex index must be 0");
      Labels x;
      for (size_t k = 0; k + 1 < toks.size(); ++k) x.push_back(m.charge(toks[k]));
      return x;
    };
    Labels ket = parse_labels(key.substr(0, bar));
    Labels bra = parse_labels(key.substr(bar + 1));
    s.entries[{ket, bra}] = parse_complex(value);
  }
  if (!have_layout) throw Error(ErrorKind::ParseError, "missing layout");
  return s;
}

inline TargetState load_state_file(const AnyonModel& m, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, "cannot open state file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_state(m, ss.str());
}

}  // namespace anyonic
