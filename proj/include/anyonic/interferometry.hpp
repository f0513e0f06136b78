#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "config.hpp"
#include "oracle.hpp"
#include "state.hpp"

namespace anyonic {

// (h1, h2, e1, e2): the charges linked by the probe loop for the ket/bra
// route pairs lower/upper, upper/lower, lower/lower and upper/upper.
using LoopLabels = std::array<Charge, 4>;

// p^s_{h1 h2 e1 e2, B}. twist_shift = m_l - m_u for the pure-braid variant and
// 0 otherwise; it rotates the two interference terms by theta_b^{-+shift}.
inline cplx loop_probe_factor(const AnyonModel& m, const BeamSplitters& bs, const ProbeSpec& probe, Outcome s,
                              const LoopLabels& l, long twist_shift = 0) {
  const cplx X = bs.interference() * bs.visibility;
  const double tt = std::norm(bs.t1), rr = std::norm(bs.r1);
  const double e1w = s == Outcome::Horizontal ? tt * std::norm(bs.r2) : tt * std::norm(bs.t2);
  const double e2w = s == Outcome::Horizontal ? rr * std::norm(bs.t2) : rr * std::norm(bs.r2);
  const double sg = s == Outcome::Horizontal ? 1.0 : -1.0;
  cplx p = 0;
  for (auto [b, pr] : probe.distribution) {
    if (pr == 0) continue;
    const cplx th = twist_shift == 0 ? cplx(1) : ipow(m.theta(b), -twist_shift);
    p += pr * (e1w * m.M()(l[2], b) + sg * X * th * m.M()(l[0], b) +
               sg * std::conj(X) * std::conj(th) * std::conj(m.M()(l[1], b)) + e2w * m.M()(l[3], b));
  }
  return p;
}

// p^s_{a a' e, B}; e must satisfy N^a_{a' e} = 1.
inline cplx probe_factor(const AnyonModel& m, const BeamSplitters& bs, const ProbeSpec& probe, Outcome s, Charge a,
                         Charge ap, Charge e) {
  m.check_index(a);
  m.check_index(ap);
  m.check_index(e);
  if (!m.Nabc(ap, e, a)) throw Error(ErrorKind::InadmissibleChannel, "a is not in a' x e");
  return loop_probe_factor(m, bs, probe, s, {a, ap, e, 0});
}

inline cplx generalized_probe_factor(const AnyonModel& m, const BeamSplitters& bs, const ProbeSpec& probe, Outcome s,
                                     Charge h1, Charge h2, Charge e1, Charge e2) {
  for (Charge c : {h1, h2, e1, e2}) m.check_index(c);
  // the e1 and e2 lines attach to the h1 and h2 lines respectively
  if (!m.Nabc(h1, m.dual(h1), 0) || !m.fuse(h1, e1).size() || !m.fuse(h2, e2).size())
    throw Error(ErrorKind::InadmissibleChannel, "inadmissible loop labels");
  return loop_probe_factor(m, bs, probe, s, {h1, h2, e1, e2});
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// W_N(n; p, q) = C(N, n) p^n q^(N-n), with 0^0 = 1.
inline cplx binomial_weight(int N, int n, cplx p, cplx q) {
  return binomial(N, n) * ipow(p, n) * ipow(q, N - n);
}

// ---------------------------------------------------------------------------
// Loop-label decomposition of a density matrix.

struct Component {
  LoopLabels labels{};
  MatrixXc part;
};

struct Decomposition {
  Layout layout = Layout::Simple;
  ChainBasis basis;
  std::vector<Component> comps;

  MatrixXc sum() const {
    MatrixXc r = MatrixXc::Zero(basis.size(), basis.size());
    for (const auto& c : comps) r += c.part;
    return r;
  }
};

inline double max_abs(const MatrixXc& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

// Cached single-probe loops on a fixed chain basis: for each probe charge x
// the product embedding, the passage matrices and the trace map are built
// once. Same result as probe_loop, which stays as the unoptimized reference.
class LoopEvaluator {
 public:
  LoopEvaluator(const AnyonModel& m, const ChainBasis& basis) : m_(&m), basis_(basis), cache_(m.rank()) {}

  const ChainBasis& basis() const { return basis_; }

  MatrixXc apply(Charge x, const MatrixXc& rho, Arm ket, Arm bra) const {
    const Entry& e = entry(x);
    MatrixXc r = e.embed * rho * e.embed.adjoint();
    for (int i = 0; i < r.rows(); ++i)
      for (int j = 0; j < r.cols(); ++j)
        if (e.total[i] != e.total[j]) r(i, j) = 0;
    r = run_passage(e.passage, r, ket, bra);
    MatrixXc out = MatrixXc::Zero(basis_.size(), basis_.size());
    for (const auto& [i, pi] : e.keep)
      for (const auto& [j, pj] : e.keep)
        if (e.key[i] == e.key[j] && r(i, j) != cplx(0)) out(pi, pj) += r(i, j);
    return out;
  }

 private:
  struct Entry {
    bool built = false;
    SpMat embed;
    std::vector<int> total;
    Passage passage;
    std::vector<std::pair<int, int>> keep;  // (state after passage, traced state)
    std::vector<std::array<int, 3>> key;    // last leaf, total, last intermediate before it
  };

  const Entry& entry(Charge x) const {
    Entry& e = cache_[x];
    if (e.built) return e;
    const AnyonModel& m = *m_;
    // embedding: probe x to the left of the chain, fused left-nested
    std::vector<Leaf> leaves{Leaf{{x}, Tag::Between}};
    leaves.insert(leaves.end(), basis_.leaves().begin(), basis_.leaves().end());
    ChainBasis cb(m, leaves);
    const int n = basis_.n_leaves(), nc = n + 1;
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int i = 0; i < cb.size(); ++i) {
      const auto& s = cb.state(i);
      std::vector<int> sr(2 * n), y(n);
      for (int k = 0; k < n; ++k) {
        sr[k] = s[1 + k];
        y[k] = s[nc + 1 + k];
      }
      std::vector<int> q(n);
      std::function<void(int, cplx)> rec = [&](int k, cplx c) {
        if (k == n) {
          for (int j = 0; j < n; ++j) sr[n + j] = q[j];
          int r = basis_.find(sr);
          if (r >= 0)
            trip.emplace_back(i, r, c * std::sqrt(m.d(cb.total(i)) / (m.d(x) * m.d(basis_.total(r)))));
          return;
        }
        if (k == 0) {
          q[0] = sr[0];
          if (m.Nabc(x, q[0], y[0])) rec(1, c);
          return;
        }
        for (int qk : m.fuse(q[k - 1], sr[k])) {
          if (!m.Nabc(x, qk, y[k])) continue;
          cplx f = std::conj(m.F(x, q[k - 1], sr[k], y[k], y[k - 1], qk));
          if (f == cplx(0)) continue;
          q[k] = qk;
          rec(k + 1, c * f);
        }
      };
      rec(0, 1.0);
      e.total.push_back(cb.total(i));
    }
    e.embed = to_sparse(cb.size(), basis_.size(), trip);
    e.passage = build_passage(m, cb, 0);
    const ChainBasis& fin = e.passage.bases.back();
    e.key.resize(fin.size());
    for (int i = 0; i < fin.size(); ++i) {
      const auto& s = fin.state(i);
      e.key[i] = {s[nc - 1], s[2 * nc - 1], s[2 * nc - 2]};
      std::vector<int> t(s.begin(), s.begin() + nc - 1);
      t.insert(t.end(), s.begin() + nc, s.begin() + 2 * nc - 1);
      int pi = basis_.find(t);
      if (pi >= 0) e.keep.emplace_back(i, pi);
    }
    e.built = true;
    return e;
  }

  const AnyonModel* m_;
  ChainBasis basis_;
  mutable std::vector<Entry> cache_;
};

// Projection of rho onto the component where the probe loop for the route pair
// (ket, bra) links charge h. Built from single-probe loops of every charge x
// weighted by S_{0h} S*_{hx} d_x (conjugated for the upper/lower pair, whose
// loop value is M*).
inline MatrixXc loop_projection(const AnyonModel& m, const LoopEvaluator& ev, const MatrixXc& rho, Charge h, Arm ket,
                                Arm bra) {
  MatrixXc r = MatrixXc::Zero(rho.rows(), rho.cols());
  const bool conj_pair = ket == Arm::Upper && bra == Arm::Lower;
  for (int x = 0; x < m.rank(); ++x) {
    cplx w = m.S()(0, h) * (conj_pair ? m.S()(h, x) : std::conj(m.S()(h, x))) * m.d(x);
    if (std::abs(w) < 1e-15) continue;
    r += w * ev.apply(x, rho, ket, bra);
  }
  return r;
}

inline MatrixXc loop_projection(const AnyonModel& m, const ChainBasis& basis, const MatrixXc& rho, Charge h, Arm ket,
                                Arm bra) {
  return loop_projection(m, LoopEvaluator(m, basis), rho, h, ket, bra);
}

// Splits rho on a tagged chain into components with definite (h1, h2, e1, e2).
inline Decomposition decompose_loops(const AnyonModel& m, Layout layout, const ChainBasis& basis, const MatrixXc& rho,
                                     double prune = 1e-13) {
  const double scale = std::max(max_abs(rho), 1e-300);
  struct Work {
    LoopLabels labels;
    MatrixXc part;
  };
  LoopEvaluator ev(m, basis);
  std::vector<Work> cur{{{0, 0, 0, 0}, rho}};
  const std::array<std::pair<Arm, Arm>, 4> routes = {
      std::pair{Arm::Lower, Arm::Upper}, std::pair{Arm::Upper, Arm::Lower}, std::pair{Arm::Lower, Arm::Lower},
      std::pair{Arm::Upper, Arm::Upper}};
  // e1 and e2 first: those split off the bulk of the weight cheaply
  for (int slot : {2, 3, 0, 1}) {
    std::vector<Work> next;
    for (const auto& w : cur) {
      for (int h = 0; h < m.rank(); ++h) {
        MatrixXc p = loop_projection(m, ev, w.part, h, routes[slot].first, routes[slot].second);
        if (max_abs(p) < prune * scale) continue;
        Work n = w;
        n.labels[slot] = h;
        n.part = std::move(p);
        next.push_back(std::move(n));
      }
    }
    cur = std::move(next);
  }
  Decomposition d;
  d.layout = layout;
  d.basis = basis;
  for (auto& w : cur) d.comps.push_back({w.labels, std::move(w.part)});
  return d;
}

// Crossed F move [F^{ac}_{a'c'}] between the f channel (a c -> f <- a' c')
// and the e channel (a' e -> a, c -> e c'), as an orthonormal basis of the
// f space: row f of column e. Normalization is fixed per column and
// unitarity is asserted.
struct CrossedF {
  std::vector<Charge> fs, es;
  MatrixXc u;
};

inline CrossedF crossed_f(const AnyonModel& m, Charge a, Charge c, Charge ap, Charge cp) {
  CrossedF x;
  for (int f = 0; f < m.rank(); ++f)
    if (m.Nabc(a, c, f) && m.Nabc(ap, cp, f)) x.fs.push_back(f);
  for (int e = 0; e < m.rank(); ++e)
    if (m.Nabc(ap, e, a) && m.Nabc(m.dual(e), cp, c)) x.es.push_back(e);
  if (x.fs.size() != x.es.size()) throw Error(ErrorKind::InconsistentData, "crossed F is not square");
  const int n = static_cast<int>(x.fs.size());
  x.u = MatrixXc::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const Charge e = x.es[j];
    for (int i = 0; i < n; ++i) {
      const Charge f = x.fs[i];
      x.u(i, j) = std::sqrt(m.d(f)) * m.F(a, m.dual(e), cp, f, ap, c);
    }
    double nrm = x.u.col(j).norm();
    if (nrm < 1e-300) throw Error(ErrorKind::InconsistentData, "degenerate crossed F column");
    x.u.col(j) /= nrm;
  }
  if (n && (x.u.adjoint() * x.u - MatrixXc::Identity(n, n)).cwiseAbs().maxCoeff() > kTol)
    throw Error(ErrorKind::InconsistentData, "crossed F is not unitary");
  return x;
}

// Component split of a Simple state through crossed F moves, without any
// diagram evaluation: labels (a, a', e, 0).
inline Decomposition decompose_simple(const AnyonModel& m, const TargetState& s) {
  if (s.layout != Layout::Simple) throw Error(ErrorKind::InvalidParameter, "expected a Simple state");
  auto [basis, rho] = to_chain(m, s);
  Decomposition d;
  d.layout = Layout::Simple;
  d.basis = basis;
  std::set<std::array<Charge, 4>> blocks;
  for (const auto& [k, v] : s.entries) blocks.insert({k.first[0], k.first[1], k.second[0], k.second[1]});
  for (const auto& blk : blocks) {
    const auto [a, c, ap, cp] = blk;
    CrossedF x = crossed_f(m, a, c, ap, cp);
    const int n = static_cast<int>(x.fs.size());
    VectorXc v(n);
    std::vector<int> row(n), col(n);
    for (int i = 0; i < n; ++i) {
      const Charge f = x.fs[i];
      row[i] = basis.find({a, c, a, f});
      col[i] = basis.find({ap, cp, ap, f});
      v(i) = (row[i] >= 0 && col[i] >= 0) ? rho(row[i], col[i]) / std::sqrt(m.d(f)) : cplx(0);
    }
    if (v.cwiseAbs().maxCoeff() == 0) continue;
    for (int j = 0; j < n; ++j) {
      VectorXc ve = x.u.col(j) * (x.u.col(j).adjoint() * v)(0);
      if (ve.cwiseAbs().maxCoeff() < 1e-300) continue;
      Component comp;
      comp.labels = {a, ap, x.es[j], 0};
      comp.part = MatrixXc::Zero(basis.size(), basis.size());
      for (int i = 0; i < n; ++i)
        if (row[i] >= 0 && col[i] >= 0) comp.part(row[i], col[i]) = ve(i) * std::sqrt(m.d(x.fs[i]));
      d.comps.push_back(std::move(comp));
    }
  }
  return d;
}

inline Decomposition decompose(const AnyonModel& m, const TargetState& s) {
  if (s.layout == Layout::Simple) return decompose_simple(m, s);
  auto [basis, rho] = to_chain(m, s);
  return decompose_loops(m, s.layout, basis, rho);
}

// ---------------------------------------------------------------------------
// Probe statistics on a decomposition.

struct ProbeModel {
  const AnyonModel* model;
  BeamSplitters bs;
  ProbeSpec probe;
  long twist_shift = 0;

  cplx p(Outcome s, const LoopLabels& l) const { return loop_probe_factor(*model, bs, probe, s, l, twist_shift); }
};

inline MatrixXc weighted_sum(const Decomposition& d, const ProbeModel& pm, int N, int n) {
  MatrixXc r = MatrixXc::Zero(d.basis.size(), d.basis.size());
  for (const auto& c : d.comps) {
    cplx w = binomial_weight(N, n, pm.p(Outcome::Horizontal, c.labels), pm.p(Outcome::Vertical, c.labels));
    if (w != cplx(0)) r += w * c.part;
  }
  return r;
}

// Pr_N(n) for n = 0..N.
inline std::vector<double> distribution(const Decomposition& d, const ProbeModel& pm, int N) {
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
  std::vector<double> out(N + 1, 0.0);
  std::vector<std::pair<cplx, cplx>> ps;
  std::vector<cplx> tr;
  for (const auto& c : d.comps) {
    cplx t = c.part.trace();
    if (std::abs(t) < 1e-300) continue;
    ps.push_back({pm.p(Outcome::Horizontal, c.labels), pm.p(Outcome::Vertical, c.labels)});
    tr.push_back(t);
  }
  for (int n = 0; n <= N; ++n) {
    cplx acc = 0;
    for (size_t k = 0; k < ps.size(); ++k) acc += binomial_weight(N, n, ps[k].first, ps[k].second) * tr[k];
    out[n] = acc.real();
  }
  return out;
}

inline std::pair<double, TargetState> conditioned(const Decomposition& d, const ProbeModel& pm, int N, int n) {
  if (n < 0 || n > N) throw Error(ErrorKind::InvalidParameter, "count out of range");
  MatrixXc r = weighted_sum(d, pm, N, n);
  double pr = r.trace().real();
  if (pr < kMinProbability) throw Error(ErrorKind::ZeroProbabilityOutcome, "Pr = " + std::to_string(pr));
  return {pr, from_chain(d.layout, d.basis, r / pr)};
}

// ---------------------------------------------------------------------------
// Exact single-probe channel on a chain. For Generalized targets the h1 and
// h2 loops cross, so no joint label decomposition exists and finite-N
// statistics compose this channel instead of multiplying p-factors.
class ProbeChannel {
 public:
  // twist_shift rotates the two cross-arm terms as in loop_probe_factor.
  ProbeChannel(const AnyonModel& m, const ChainBasis& basis, const BeamSplitters& bs, const ProbeSpec& probe,
               long twist_shift = 0)
      : m_(&m), ev_(m, basis), bs_(bs), probe_(probe), shift_(twist_shift) {}

  const ChainBasis& basis() const { return ev_.basis(); }

  // One probe: the unnormalized states for the horizontal and vertical detections.
  std::pair<MatrixXc, MatrixXc> apply(const MatrixXc& rho) const {
    const int n = rho.rows();
    std::pair<MatrixXc, MatrixXc> out{MatrixXc::Zero(n, n), MatrixXc::Zero(n, n)};
    const Arm arms[2] = {Arm::Lower, Arm::Upper};
    for (auto [b, pr] : probe_.distribution) {
      if (pr == 0) continue;
      const cplx th = shift_ == 0 ? cplx(1) : ipow(m_->theta(b), -shift_);
      for (Arm ka : arms)
        for (Arm ba : arms) {
          cplx v = 1;
          if (ka != ba) v = bs_.visibility * (ka == Arm::Lower ? th : std::conj(th));
          const cplx wh = v * bs_.amplitude(ka, Outcome::Horizontal) * std::conj(bs_.amplitude(ba, Outcome::Horizontal));
          const cplx wv = v * bs_.amplitude(ka, Outcome::Vertical) * std::conj(bs_.amplitude(ba, Outcome::Vertical));
          MatrixXc t = ev_.apply(b, rho, ka, ba);
          out.first += pr * wh * t;
          out.second += pr * wv * t;
        }
    }
    return out;
  }

 private:
  const AnyonModel* m_;
  LoopEvaluator ev_;
  BeamSplitters bs_;
  ProbeSpec probe_;
  long shift_;
};

// Unnormalized outcome-count states after N probes: entry n is the sum over
// all outcome strings with n horizontal detections.
inline std::vector<MatrixXc> channel_counts(const ProbeChannel& ch, const MatrixXc& rho, int N) {
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
  std::vector<MatrixXc> cur{rho};
  for (int k = 1; k <= N; ++k) {
    std::vector<MatrixXc> next(k + 1, MatrixXc::Zero(rho.rows(), rho.cols()));
    for (int n = 0; n < k; ++n) {
      auto [h, v] = ch.apply(cur[n]);
      next[n + 1] += h;
      next[n] += v;
    }
    cur = std::move(next);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Distinguishability classes.

enum class ClassOrigin { Singleton, NullAmplitude, Generic, FineTuned };

inline const char* class_origin_name(ClassOrigin o) {
  switch (o) {
    case ClassOrigin::Singleton: return "singleton";
    case ClassOrigin::NullAmplitude: return "null_amplitude";
    case ClassOrigin::Generic: return "generic";
    case ClassOrigin::FineTuned: return "fine_tuned";
  }
  return "?";
}

struct ChargeClass {
  std::vector<Charge> charges;
  double p = 0;
  ClassOrigin origin = ClassOrigin::Singleton;
};

// Groups charges by p^->_{aa00} (tolerance tol). A group is flagged
// NullAmplitude when a splitter amplitude vanishes, Generic when its members
// share M_{aB} (and, for the pure braid, the same twisted factor), and
// FineTuned otherwise.
inline std::vector<ChargeClass> classes_from(const AnyonModel& m, const ProbeModel& pm, double tol = kTol) {
  const int r = m.rank();
  std::vector<double> p(r);
  for (int a = 0; a < r; ++a) p[a] = pm.p(Outcome::Horizontal, {a, a, 0, 0}).real();
  const BeamSplitters& bs = pm.bs;
  const bool null_amp =
      std::abs(bs.t1) < 1e-12 || std::abs(bs.r1) < 1e-12 || std::abs(bs.t2) < 1e-12 || std::abs(bs.r2) < 1e-12;
  std::vector<int> order(r);
  for (int a = 0; a < r; ++a) order[a] = a;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return p[x] < p[y]; });
  std::vector<ChargeClass> out;
  for (int k = 0; k < r; ++k) {
    const int a = order[k];
    if (!out.empty() && std::abs(p[a] - p[out.back().charges.back()]) <= tol) out.back().charges.push_back(a);
    else out.push_back({{a}, p[a], ClassOrigin::Singleton});
  }
  auto mexp = [&](int a) {
    cplx v = 0;
    for (auto [b, pr] : pm.probe.distribution) v += pr * ipow(m.theta(b), -pm.twist_shift) * m.M()(a, b);
    return v;
  };
  for (auto& c : out) {
    std::sort(c.charges.begin(), c.charges.end());
    if (c.charges.size() < 2) continue;
    if (null_amp) {
      c.origin = ClassOrigin::NullAmplitude;
      continue;
    }
    bool same = true;
    for (Charge a : c.charges) same = same && std::abs(mexp(a) - mexp(c.charges[0])) <= tol;
    c.origin = same ? ClassOrigin::Generic : ClassOrigin::FineTuned;
  }
  return out;
}

inline std::vector<ChargeClass> distinguishability_classes(const AnyonModel& m, const BeamSplitters& bs,
                                                           const ProbeSpec& probe) {
  bs.validate();
  probe.validate(m);
  return classes_from(m, ProbeModel{&m, bs, probe, 0});
}

struct OutcomeReport {
  std::string label;
  std::vector<Charge> charges;  // the class, for asymptotic reports
  int count = -1;               // n, for finite-N reports
  double probability = 0;
  TargetState post_state;
};

// Asymptotic outcomes: for each class the surviving components are those with
// h1, h2 in the class and p^-> = 1 - p^^ = p_k.
//
// With drift_probes set, components whose factors are lambda p_k and
// lambda (1 - p_k) for a unit phase lambda are kept as well, weighted by
// lambda^N. These are C2-C1 lines crossed identically by both arms: a
// single-type probe only rotates them. Their h labels need not lie in the
// class (they are shifted by e); they sit in the count window of p_k and
// carry no trace, so class probabilities are unchanged.
inline std::vector<OutcomeReport> asymptotic_from(const AnyonModel& m, const Decomposition& d, const ProbeModel& pm,
                                                  std::optional<long> drift_probes = std::nullopt,
                                                  double tol = 1e-9) {
  auto classes = classes_from(m, pm);
  std::vector<OutcomeReport> out;
  for (const auto& cls : classes) {
    std::set<Charge> in(cls.charges.begin(), cls.charges.end());
    MatrixXc r = MatrixXc::Zero(d.basis.size(), d.basis.size());
    for (const auto& c : d.comps) {
      cplx ph = pm.p(Outcome::Horizontal, c.labels), pv = pm.p(Outcome::Vertical, c.labels);
      const cplx lambda = ph + pv;
      const bool member = in.count(c.labels[0]) && in.count(c.labels[1]);
      if (member && std::abs(ph - cls.p) <= tol && std::abs(pv - (1.0 - cls.p)) <= tol) {
        r += c.part;
      } else if (drift_probes && std::abs(lambda - 1.0) > tol && std::abs(std::abs(lambda) - 1.0) <= tol &&
                 std::abs(ph - lambda * cls.p) <= tol && std::abs(pv - lambda * (1.0 - cls.p)) <= tol) {
        r += ipow(lambda, *drift_probes) * c.part;
      }
    }
    double pr = r.trace().real();
    if (pr < kMinProbability) continue;
    OutcomeReport o;
    o.charges = cls.charges;
    for (Charge a : cls.charges) o.label += (o.label.empty() ? "" : "+") + m.name(a);
    o.probability = pr;
    o.post_state = from_chain(d.layout, d.basis, r / pr);
    out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Public untwisted operations.

inline ProbeModel make_probe_model(const AnyonModel& m, const BeamSplitters& bs, const ProbeSpec& probe) {
  bs.validate();
  probe.validate(m);
  return ProbeModel{&m, bs, probe, 0};
}

inline std::pair<double, TargetState> single_probe_update(const AnyonModel& m, const TargetState& target,
                                                          const BeamSplitters& bs, const ProbeSpec& probe, Outcome s) {
  if (target.layout != Layout::Simple) throw Error(ErrorKind::InvalidParameter, "single_probe_update needs a Simple target");
  ProbeModel pm = make_probe_model(m, bs, probe);
  Decomposition d = decompose_simple(m, target);
  return conditioned(d, pm, 1, s == Outcome::Horizontal ? 1 : 0);
}

inline double single_probe_probability(const AnyonModel& m, const TargetState& target, const BeamSplitters& bs,
                                       const ProbeSpec& probe, Outcome s) {
  ProbeModel pm = make_probe_model(m, bs, probe);
  double pr = 0;
  for (const auto& [k, v] : target.entries)
    if (k.first == k.second) pr += v.real() * pm.p(s, {a_of(target.layout, k.first), a_of(target.layout, k.first), 0, 0}).real();
  return pr;
}

inline std::vector<double> multi_probe_distribution(const AnyonModel& m, const TargetState& target,
                                                    const BeamSplitters& bs, const ProbeSpec& probe, int N) {
  ProbeModel pm = make_probe_model(m, bs, probe);
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
  // diagonal form: only e = 0 components carry trace
  std::vector<double> out(N + 1, 0.0);
  for (const auto& [k, v] : target.entries) {
    if (k.first != k.second) continue;
    Charge a = a_of(target.layout, k.first);
    cplx ph = pm.p(Outcome::Horizontal, {a, a, 0, 0}), pv = pm.p(Outcome::Vertical, {a, a, 0, 0});
    for (int n = 0; n <= N; ++n) out[n] += (v * binomial_weight(N, n, ph, pv)).real();
  }
  return out;
}

inline TargetState multi_probe_update(const AnyonModel& m, const TargetState& target, const BeamSplitters& bs,
                                      const ProbeSpec& probe, int N, int n) {
  ProbeModel pm = make_probe_model(m, bs, probe);
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
  if (n < 0 || n > N) throw Error(ErrorKind::InvalidParameter, "count out of range");
  if (target.layout == Layout::Simple) return conditioned(decompose_simple(m, target), pm, N, n).second;
  auto [basis, rho] = to_chain(m, target);
  MatrixXc r = channel_counts(ProbeChannel(m, basis, bs, probe), rho, N)[n];
  double pr = r.trace().real();
  if (pr < kMinProbability) throw Error(ErrorKind::ZeroProbabilityOutcome, "Pr = " + std::to_string(pr));
  return from_chain(target.layout, basis, r / pr);
}

inline std::vector<OutcomeReport> asymptotic_outcomes(const AnyonModel& m, const TargetState& target,
                                                      const BeamSplitters& bs, const ProbeSpec& probe) {
  if (target.layout != Layout::Simple) throw Error(ErrorKind::InvalidParameter, "asymptotic_outcomes needs a Simple target");
  ProbeModel pm = make_probe_model(m, bs, probe);
  return asymptotic_from(m, decompose_simple(m, target), pm);
}

inline std::vector<OutcomeReport> generalized_asymptotic(const AnyonModel& m, const TargetState& target,
                                                         const BeamSplitters& bs, const ProbeSpec& probe,
                                                         std::optional<long> drift_probes = std::nullopt) {
  if (target.layout != Layout::Generalized)
    throw Error(ErrorKind::InvalidParameter, "generalized_asymptotic needs a Generalized target");
  ProbeModel pm = make_probe_model(m, bs, probe);
  return asymptotic_from(m, decompose(m, target), pm, drift_probes);
}

// B_0 = {a : M_{aB} = 1}.
inline std::vector<Charge> trivial_monodromy_set(const AnyonModel& m, const ProbeSpec& probe, double tol = kTol) {
  auto mb = monodromy_expectation(m, probe);
  std::vector<Charge> out;
  for (int a = 0; a < m.rank(); ++a)
    if (std::abs(mb[a] - 1.0) <= tol) out.push_back(a);
  return out;
}

// Fixed state of class kappa evaluated as four omega loops on the chain:
// omega_{C_k} on the ket/bra pairs lower/upper and upper/lower, and omega_{B_0}
// on lower/lower and upper/upper. Works for both layouts.
inline TargetState omega_form_fixed_state(const AnyonModel& m, const TargetState& target,
                                          const std::vector<Charge>& cls, const ProbeSpec& probe) {
  probe.validate(m);
  auto [basis, rho] = to_chain(m, target);
  auto b0 = trivial_monodromy_set(m, probe);
  LoopEvaluator ev(m, basis);
  auto omega = [&](const MatrixXc& r, const std::vector<Charge>& set, Arm ket, Arm bra) {
    MatrixXc acc = MatrixXc::Zero(r.rows(), r.cols());
    for (Charge h : set) acc += loop_projection(m, ev, r, h, ket, bra);
    return acc;
  };
  MatrixXc r = omega(rho, cls, Arm::Lower, Arm::Upper);
  r = omega(r, cls, Arm::Upper, Arm::Lower);
  r = omega(r, b0, Arm::Lower, Arm::Lower);
  r = omega(r, b0, Arm::Upper, Arm::Upper);
  double pr = r.trace().real();
  if (pr < kMinProbability) throw Error(ErrorKind::ZeroProbabilityOutcome, "class has zero weight");
  return from_chain(target.layout, basis, r / pr);
}

}  // namespace anyonic
