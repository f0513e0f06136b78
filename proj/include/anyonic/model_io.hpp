#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "model.hpp"

namespace anyonic {

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline double parse_real(const std::string& s, const std::string& ctx) {
  if (s.empty()) throw Error(ErrorKind::ParseError, "empty number in " + ctx);
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "bad number '" + s + "' in " + ctx);
  }
  if (pos != s.size()) throw Error(ErrorKind::ParseError, "bad number '" + s + "' in " + ctx);
  return v;
}

inline long parse_int(const std::string& s, const std::string& ctx) {
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "bad integer '" + s + "' in " + ctx);
  }
  if (pos != s.size()) throw Error(ErrorKind::ParseError, "bad integer '" + s + "' in " + ctx);
  return v;
}

}  // namespace detail

// Accepts "re", "re+im i", "im i" and "exp(i*p/q*pi)" (optionally negated).
inline cplx parse_complex(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw Error(ErrorKind::ParseError, "empty complex literal");

  double sign = 1;
  std::string body = s;
  if (body[0] == '-' && body.rfind("-exp(", 0) == 0) {
    sign = -1;
    body = body.substr(1);
  }
  if (body.rfind("exp(", 0) == 0) {
    if (body.back() != ')' || body.rfind("exp(i*", 0) != 0)
      throw Error(ErrorKind::ParseError, "bad exponential literal '" + text + "'");
    std::string inner = body.substr(6, body.size() - 7);
    const std::string tail = "pi";
    if (inner.size() < tail.size() || inner.substr(inner.size() - 2) != tail)
      throw Error(ErrorKind::ParseError, "exponent must end in pi: '" + text + "'");
    inner = inner.substr(0, inner.size() - 2);
    double frac = 1;
    if (!inner.empty()) {
      if (inner.back() != '*') throw Error(ErrorKind::ParseError, "bad exponent '" + text + "'");
      inner.pop_back();
      size_t slash = inner.find('/');
      if (slash == std::string::npos) {
        frac = static_cast<double>(detail::parse_int(inner, text));
      } else {
        long p = detail::parse_int(inner.substr(0, slash), text);
        long q = detail::parse_int(inner.substr(slash + 1), text);
        if (q == 0) throw Error(ErrorKind::ParseError, "zero denominator in '" + text + "'");
        frac = static_cast<double>(p) / static_cast<double>(q);
      }
    }
    return sign * expi(frac * kPi);
  }

  if (s.back() != 'i') return detail::parse_real(s, text);
  std::string head = s.substr(0, s.size() - 1);
  size_t split = std::string::npos;
  for (size_t k = head.size(); k-- > 1;) {
    if ((head[k] == '+' || head[k] == '-') && head[k - 1] != 'e' && head[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  std::string re = split == std::string::npos ? "" : head.substr(0, split);
  std::string im = split == std::string::npos ? head : head.substr(split);
  double imv;
  if (im.empty() || im == "+") imv = 1;
  else if (im == "-") imv = -1;
  else imv = detail::parse_real(im, text);
  double rev = re.empty() ? 0.0 : detail::parse_real(re, text);
  return {rev, imv};
}

inline std::string format_complex(cplx z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  return buf;
}

// Model text format:
//
//   [charges]
//   name = ising
//   names = I sigma psi
//   vacuum = I
//   duals = I sigma psi        (optional, defaults to self-dual)
//   [fusion]
//   sigma sigma = I psi
//   [F]
//   sigma sigma sigma sigma psi psi = -0.70710678118654757
//   [R]
//   sigma sigma I = exp(i*-1/8*pi)
//
// '#' starts a comment. Fusion with the vacuum is implicit. Each unordered
// fusion pair may be given once in either order.
inline AnyonModel parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string line, section;
  ModelData data;
  std::vector<std::string> names, duals;
  std::string vacuum;
  struct Pending {
    std::vector<std::string> lhs;
    std::string rhs;
    int line;
  };
  std::vector<Pending> fusion, fsym, rsym;
  int lineno = 0;
  auto where = [&](int l) { return "line " + std::to_string(l); };

  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::ParseError, "bad section header at " + where(lineno));
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "charges" && section != "fusion" && section != "F" && section != "R")
        throw Error(ErrorKind::ParseError, "unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "expected '=' at " + where(lineno));
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw Error(ErrorKind::ParseError, "entry outside a section at " + where(lineno));
    if (section == "charges") {
      if (key == "name") data.name = value;
      else if (key == "names") names = detail::split_ws(value);
      else if (key == "vacuum") vacuum = value;
      else if (key == "duals") duals = detail::split_ws(value);
      else throw Error(ErrorKind::ParseError, "unknown key '" + key + "' at " + where(lineno));
    } else {
      Pending p{detail::split_ws(key), value, lineno};
      if (section == "fusion") fusion.push_back(p);
      else if (section == "F") fsym.push_back(p);
      else rsym.push_back(p);
    }
  }

  if (names.empty()) throw Error(ErrorKind::ParseError, "no charges listed");
  if (vacuum.empty()) vacuum = names.front();
  auto vit = std::find(names.begin(), names.end(), vacuum);
  if (vit == names.end()) throw Error(ErrorKind::UnknownCharge, "vacuum " + vacuum);
  const std::vector<std::string> listed = names;
  std::rotate(names.begin(), vit, vit + 1);
  data.charges = names;
  std::map<std::string, int> idx;
  for (size_t k = 0; k < names.size(); ++k) idx[names[k]] = static_cast<int>(k);
  auto lookup = [&](const std::string& n) {
    auto it = idx.find(n);
    if (it == idx.end()) throw Error(ErrorKind::UnknownCharge, n);
    return it->second;
  };

  data.dual.assign(names.size(), 0);
  if (duals.empty()) {
    for (size_t k = 0; k < names.size(); ++k) data.dual[k] = static_cast<int>(k);
  } else {
    if (duals.size() != names.size()) throw Error(ErrorKind::ParseError, "duals list has wrong length");
    for (size_t k = 0; k < listed.size(); ++k) data.dual[lookup(listed[k])] = lookup(duals[k]);
  }

  std::set<std::pair<int, int>> seen;
  for (const auto& p : fusion) {
    if (p.lhs.size() != 2) throw Error(ErrorKind::ParseError, "fusion entry needs two charges at " + where(p.line));
    int a = lookup(p.lhs[0]), b = lookup(p.lhs[1]);
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
      throw Error(ErrorKind::ParseError, "duplicate fusion entry at " + where(p.line));
    std::vector<int> cs;
    for (const auto& c : detail::split_ws(p.rhs)) cs.push_back(lookup(c));
    if (cs.empty()) throw Error(ErrorKind::ParseError, "empty fusion product at " + where(p.line));
    data.fusion[{a, b}] = cs;
    data.fusion[{b, a}] = cs;
  }
  for (const auto& p : fsym) {
    if (p.lhs.size() != 6) throw Error(ErrorKind::ParseError, "F entry needs six labels at " + where(p.line));
    std::array<int, 6> k{};
    for (int j = 0; j < 6; ++j) k[j] = lookup(p.lhs[j]);
    data.f_symbols[k] = parse_complex(p.rhs);
  }
  for (const auto& p : rsym) {
    if (p.lhs.size() != 3) throw Error(ErrorKind::ParseError, "R entry needs three labels at " + where(p.line));
    std::array<int, 3> k{lookup(p.lhs[0]), lookup(p.lhs[1]), lookup(p.lhs[2])};
    data.r_symbols[k] = parse_complex(p.rhs);
  }
  return AnyonModel::build(data);
}

inline AnyonModel load_model_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, "cannot open model file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_model(ss.str());
}

// Writes every non-unit admissible symbol, so parse_model(write_model(m))
// reproduces m.
inline std::string write_model(const AnyonModel& m) {
  std::ostringstream out;
  const int r = m.rank();
  out << "[charges]\n";
  if (!m.model_name().empty()) out << "name = " << m.model_name() << "\n";
  out << "names =";
  for (int a = 0; a < r; ++a) out << ' ' << m.name(a);
  out << "\nvacuum = " << m.name(0) << "\nduals =";
  for (int a = 0; a < r; ++a) out << ' ' << m.name(m.dual(a));
  out << "\n\n[fusion]\n";
  for (int a = 1; a < r; ++a)
    for (int b = a; b < r; ++b) {
      out << m.name(a) << ' ' << m.name(b) << " =";
      for (int c : m.fuse(a, b)) out << ' ' << m.name(c);
      out << "\n";
    }
  out << "\n[F]\n";
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        for (int d = 0; d < r; ++d)
          for (int e = 0; e < r; ++e)
            for (int f = 0; f < r; ++f) {
              if (!m.f_admissible(a, b, c, d, e, f)) continue;
              cplx v = m.F(a, b, c, d, e, f);
              if (v == cplx(1.0)) continue;
              out << m.name(a) << ' ' << m.name(b) << ' ' << m.name(c) << ' ' << m.name(d) << ' '
                  << m.name(e) << ' ' << m.name(f) << " = " << format_complex(v) << "\n";
            }
  out << "\n[R]\n";
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c : m.fuse(a, b)) {
        cplx v = m.R(a, b, c);
        if (v == cplx(1.0)) continue;
        out << m.name(a) << ' ' << m.name(b) << ' ' << m.name(c) << " = " << format_complex(v) << "\n";
      }
  return out.str();
}

}  // namespace anyonic
