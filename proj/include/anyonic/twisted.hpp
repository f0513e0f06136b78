#pragma once

#include <map>
#include <optional>
#include <vector>

#include "interferometry.hpp"

namespace anyonic {

// Twisted interferometry. The tau^m loop around the probes on one arm is
// absorbed into the target as a vacuum pair straddling that arm: x sits on the
// target side of the arm and xbar on the far side, weighted by [tau^m]_x d_x.
// Probes then pass the enlarged chain untwisted and the pairs are closed at the
// end. Lower arm: (x Between, xbar Below) after the last Between leaf. Upper
// arm: (z Above, zbar Between) after the last Above leaf, or at the front.

struct TwistedExpansion {
  struct Term {
    Charge x = 0, y = 0;  // lower-arm loop charge on ket and bra
    Charge z = 0, w = 0;  // upper-arm loop charge on ket and bra
    std::vector<int> ket, bra;  // twisted chain states
    cplx weight;
  };

  Layout layout = Layout::Simple;
  TwistSpec twist;
  ChainBasis basis;    // original chain
  ChainBasis twisted;  // with the loop pairs inserted
  SpMat close;         // sum over loop charges of the pair isometries
  MatrixXc rho;        // twisted density
  int lower_leaf = -1, upper_leaf = -1;

  std::vector<Term> terms(double drop = 1e-15) const {
    std::vector<Term> out;
    for (int j = 0; j < twisted.size(); ++j)
      for (int i = 0; i < twisted.size(); ++i) {
        if (std::abs(rho(i, j)) <= drop) continue;
        Term t;
        t.ket = twisted.state(i);
        t.bra = twisted.state(j);
        if (lower_leaf >= 0) {
          t.x = t.ket[lower_leaf];
          t.y = t.bra[lower_leaf];
        }
        if (upper_leaf >= 0) {
          t.z = t.ket[upper_leaf];
          t.w = t.bra[upper_leaf];
        }
        t.weight = rho(i, j);
        out.push_back(std::move(t));
      }
    return out;
  }

  // Close the loops on a twisted-chain matrix.
  MatrixXc closed(const MatrixXc& r) const { return MatrixXc(close.adjoint() * r * close); }
};

inline std::vector<std::pair<Charge, cplx>> tau_weights(const AnyonModel& m, long power) {
  auto t = m.tau_coefficients(power);
  std::vector<std::pair<Charge, cplx>> out;
  for (int x = 0; x < m.rank(); ++x)
    if (std::abs(t[x]) > 1e-14) out.push_back({x, t[x] * m.d(x)});
  return out;
}

// Pair insertion over a set of loop charges at once: returns the union basis,
// the weighted sum of isometries and the unweighted one.
inline std::tuple<ChainBasis, SpMat, SpMat> insert_loop(const AnyonModel& m, const ChainBasis& in, int k,
                                                        const std::vector<std::pair<Charge, cplx>>& weights,
                                                        Tag tag_x, Tag tag_xbar) {
  std::vector<Leaf> leaves = in.leaves();
  Leaf lx{{}, tag_x}, lxb{{}, tag_xbar};
  for (auto [x, w] : weights) {
    lx.charges.push_back(x);
    lxb.charges.push_back(m.dual(x));
  }
  std::sort(lxb.charges.begin(), lxb.charges.end());
  leaves.insert(leaves.begin() + k, lxb);
  leaves.insert(leaves.begin() + k, lx);
  ChainBasis out(m, leaves);
  std::vector<Eigen::Triplet<cplx>> tw, tv;
  for (auto [x, w] : weights) {
    auto [b, v] = insert_pair(m, in, k, x, tag_x, tag_xbar);
    for (int c = 0; c < v.outerSize(); ++c)
      for (SpMat::InnerIterator it(v, c); it; ++it) {
        int row = out.find(b.state(static_cast<int>(it.row())));
        tw.emplace_back(row, c, w * it.value());
        tv.emplace_back(row, c, it.value());
      }
  }
  return {out, to_sparse(out.size(), in.size(), tw), to_sparse(out.size(), in.size(), tv)};
}

inline TwistedExpansion tau_absorption(const AnyonModel& m, const TargetState& target, const TwistSpec& twist) {
  auto [basis, rho] = to_chain(m, target);
  TwistedExpansion ex;
  ex.layout = target.layout;
  ex.twist = twist;
  ex.basis = basis;
  ChainBasis cur = basis;
  SpMat W(basis.size(), basis.size()), V(basis.size(), basis.size());
  W.setIdentity();
  V.setIdentity();
  int last_between = -1, last_above = -1;
  for (int k = 0; k < basis.n_leaves(); ++k) {
    if (basis.leaves()[k].tag == Tag::Between) last_between = k;
    if (basis.leaves()[k].tag == Tag::Above) last_above = k;
  }
  if (twist.m_lower != 0) {
    const int k = last_between + 1;
    auto [nb, w, v] = insert_loop(m, cur, k, tau_weights(m, twist.m_lower), Tag::Between, Tag::Below);
    W = (w * W).eval();
    V = (v * V).eval();
    cur = nb;
    ex.lower_leaf = k;
  }
  if (twist.m_upper != 0) {
    const int k = last_above + 1;
    auto [nb, w, v] = insert_loop(m, cur, k, tau_weights(m, twist.m_upper), Tag::Above, Tag::Between);
    W = (w * W).eval();
    V = (v * V).eval();
    cur = nb;
    ex.upper_leaf = k;
    if (ex.lower_leaf >= 0) ex.lower_leaf += 2;
  }
  ex.twisted = cur;
  ex.close = V;
  ex.rho = sandwich(W, rho, W);
  return ex;
}

inline TargetState reconstruct(const TwistedExpansion& ex) { return from_chain(ex.layout, ex.basis, ex.closed(ex.rho)); }

inline long twist_shift(const TwistSpec& t) {
  return t.variant == TwistVariant::PureBraid ? t.m_lower - t.m_upper : 0;
}

inline cplx twisted_probe_factor(const AnyonModel& m, const BeamSplitters& bs, const ProbeSpec& probe, Outcome s,
                                 Charge h1, Charge h2, Charge e1, Charge e2, const TwistSpec& twist) {
  generalized_probe_factor(m, bs, probe, s, h1, h2, e1, e2);  // label checks
  return loop_probe_factor(m, bs, probe, s, {h1, h2, e1, e2}, twist_shift(twist));
}

// Everything a twisted run needs: the absorbed expansion, its loop
// decomposition, and each component closed back onto the original chain.
struct TwistedRun {
  TwistedExpansion ex;
  ProbeModel pm;
  Decomposition dec;
  std::vector<std::array<cplx, 2>> factor;  // (p^->, p^up) per component
  std::vector<bool> mixed;                  // rediagonalized, labels no longer definite
  std::vector<MatrixXc> closed;
  std::vector<cplx> closed_trace;
};

// With loop pairs on the chain the cross-route projections need not commute
// with the same-arm ones, so some labelled components are not eigenvectors of
// the probe channel. Those are replaced by channel eigenvectors.
inline void rediagonalize(TwistedRun& run, double tol = 1e-10) {
  const AnyonModel& m = *run.pm.model;
  ProbeChannel ch(m, run.ex.twisted, run.pm.bs, run.pm.probe, run.pm.twist_shift);
  auto& comps = run.dec.comps;
  const int n = run.ex.twisted.size();
  const double scale = std::max(max_abs(run.ex.rho), 1e-300);
  run.factor.clear();
  run.mixed.assign(comps.size(), false);
  std::vector<int> bad;
  for (size_t k = 0; k < comps.size(); ++k) {
    const auto& l = comps[k].labels;
    run.factor.push_back({run.pm.p(Outcome::Horizontal, l), run.pm.p(Outcome::Vertical, l)});
    auto [h, v] = ch.apply(comps[k].part);
    if (max_abs(h - run.factor[k][0] * comps[k].part) > tol * scale ||
        max_abs(v - run.factor[k][1] * comps[k].part) > tol * scale)
      bad.push_back(static_cast<int>(k));
  }
  if (bad.empty()) return;
  // The remainder of the bad components is spread over the channel
  // eigenvectors in its Krylov space.
  std::set<int> is_bad(bad.begin(), bad.end());
  std::vector<Component> keep;
  std::vector<std::array<cplx, 2>> kf;
  MatrixXc rest = MatrixXc::Zero(n, n);
  for (size_t k = 0; k < comps.size(); ++k) {
    if (is_bad.count(static_cast<int>(k))) {
      rest += comps[k].part;
    } else {
      keep.push_back(std::move(comps[k]));
      kf.push_back(run.factor[k]);
    }
  }
  const LoopLabels mixed_labels = comps[bad[0]].labels;
  auto vec = [&](const MatrixXc& x) { return VectorXc(Eigen::Map<const VectorXc>(x.data(), n * n)); };
  auto mat = [&](const VectorXc& x) { return MatrixXc(Eigen::Map<const MatrixXc>(x.data(), n, n)); };
  const cplx lambda(0.5772, 0.1337);
  std::vector<VectorXc> K, HK, VK;
  VectorXc next = vec(rest);
  while (static_cast<int>(K.size()) < n * n) {
    for (const auto& k : K) next -= k.dot(next) * k;
    for (const auto& k : K) next -= k.dot(next) * k;
    const double nrm = next.norm();
    if (nrm <= tol * scale) break;
    K.push_back(next / nrm);
    auto [h, v] = ch.apply(mat(K.back()));
    HK.push_back(vec(h));
    VK.push_back(vec(v));
    next = HK.back() + lambda * VK.back();
  }
  const int d = static_cast<int>(K.size());
  MatrixXc Km(n * n, d), Hm(n * n, d), Vm(n * n, d);
  for (int j = 0; j < d; ++j) {
    Km.col(j) = K[j];
    Hm.col(j) = HK[j];
    Vm.col(j) = VK[j];
  }
  MatrixXc A = Km.adjoint() * Hm, B = Km.adjoint() * Vm;
  if (max_abs(Km * A - Hm) > tol * scale || max_abs(Km * B - Vm) > tol * scale)
    throw Error(ErrorKind::InconsistentData, "probe channel does not close on the component span");
  Eigen::ComplexEigenSolver<MatrixXc> es(A + lambda * B);
  MatrixXc U = es.eigenvectors();
  MatrixXc Ui = U.inverse();
  MatrixXc a = Ui * A * U, bb = Ui * B * U;
  VectorXc c = Ui * (Km.adjoint() * vec(rest));
  MatrixXc Q = Km * U;
  std::vector<bool> km(keep.size(), false);
  for (int i = 0; i < d; ++i) {
    VectorXc q = Q.col(i) * c(i);
    if (q.cwiseAbs().maxCoeff() < 1e-14 * scale) continue;
    for (int j = 0; j < d; ++j)
      if (j != i && (std::abs(a(j, i)) + std::abs(bb(j, i))) * std::abs(c(i)) > tol * scale)
        throw Error(ErrorKind::InconsistentData, "probe channel is not diagonalizable on the component span");
    keep.push_back({mixed_labels, mat(q)});
    kf.push_back({a(i, i), bb(i, i)});
    km.push_back(true);
  }
  comps = std::move(keep);
  run.factor = std::move(kf);
  run.mixed = std::move(km);
}

// Whether component k survives in the fixed state of a class.
inline bool fixed_in_class(const TwistedRun& run, size_t k, const ChargeClass& cls, double tol = 1e-9) {
  if (!run.mixed[k]) {
    const auto& l = run.dec.comps[k].labels;
    if (std::find(cls.charges.begin(), cls.charges.end(), l[0]) == cls.charges.end()) return false;
    if (std::find(cls.charges.begin(), cls.charges.end(), l[1]) == cls.charges.end()) return false;
  }
  return std::abs(run.factor[k][0] - cls.p) <= tol && std::abs(run.factor[k][1] - (1.0 - cls.p)) <= tol;
}

inline TwistedRun twisted_run(const AnyonModel& m, const TargetState& target, const BeamSplitters& bs,
                              const ProbeSpec& probe, const TwistSpec& twist) {
  TwistedRun run{tau_absorption(m, target, twist), make_probe_model(m, bs, probe), {}, {}, {}, {}, {}};
  run.pm.twist_shift = twist_shift(twist);
  if (twist.trivial() && target.layout == Layout::Simple) run.dec = decompose_simple(m, target);
  else run.dec = decompose_loops(m, target.layout, run.ex.twisted, run.ex.rho);
  if (target.layout == Layout::Simple) rediagonalize(run);
  else {
    for (const auto& c : run.dec.comps)
      run.factor.push_back({run.pm.p(Outcome::Horizontal, c.labels), run.pm.p(Outcome::Vertical, c.labels)});
    run.mixed.assign(run.dec.comps.size(), false);
  }
  for (const auto& c : run.dec.comps) {
    run.closed.push_back(run.ex.closed(c.part));
    run.closed_trace.push_back(run.closed.back().trace());
  }
  return run;
}

inline std::vector<double> twisted_distribution(const TwistedRun& run, int N) {
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
  std::vector<double> out(N + 1, 0.0);
  for (size_t k = 0; k < run.dec.comps.size(); ++k) {
    if (std::abs(run.closed_trace[k]) < 1e-300) continue;
    const auto [ph, pv] = run.factor[k];
    for (int n = 0; n <= N; ++n) out[n] += (binomial_weight(N, n, ph, pv) * run.closed_trace[k]).real();
  }
  return out;
}

inline std::vector<double> twisted_distribution(const AnyonModel& m, const TargetState& target, const BeamSplitters& bs,
                                                const ProbeSpec& probe, const TwistSpec& twist, int N) {
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
  return twisted_distribution(twisted_run(m, target, bs, probe, twist), N);
}

// Unnormalized post states for every count n = 0..N, on the original chain.
inline std::vector<MatrixXc> twisted_counts(const TwistedRun& run, int N) {
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
  std::vector<MatrixXc> out;
  if (run.ex.layout == Layout::Generalized) {
    // no joint loop-label decomposition here; compose the exact channel on the twisted chain
    ProbeChannel ch(*run.pm.model, run.ex.twisted, run.pm.bs, run.pm.probe, run.pm.twist_shift);
    for (const auto& r : channel_counts(ch, run.ex.rho, N)) out.push_back(run.ex.closed(r));
    return out;
  }
  for (int n = 0; n <= N; ++n) {
    MatrixXc r = MatrixXc::Zero(run.ex.basis.size(), run.ex.basis.size());
    for (size_t k = 0; k < run.dec.comps.size(); ++k) {
      r += binomial_weight(N, n, run.factor[k][0], run.factor[k][1]) * run.closed[k];
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::pair<double, TargetState> twisted_update(const TwistedRun& run, int N, int n) {
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
  if (n < 0 || n > N) throw Error(ErrorKind::InvalidParameter, "count out of range");
  MatrixXc r = twisted_counts(run, N)[n];
  double pr = r.trace().real();
  if (pr < kMinProbability) throw Error(ErrorKind::ZeroProbabilityOutcome, "Pr = " + std::to_string(pr));
  return {pr, from_chain(run.ex.layout, run.ex.basis, r / pr)};
}

inline std::vector<OutcomeReport> twisted_asymptotic(const TwistedRun& run, double tol = 1e-9) {
  const AnyonModel& m = *run.pm.model;
  auto classes = classes_from(m, run.pm);
  std::vector<OutcomeReport> out;
  for (const auto& cls : classes) {
    MatrixXc r = MatrixXc::Zero(run.ex.basis.size(), run.ex.basis.size());
    for (size_t k = 0; k < run.dec.comps.size(); ++k)
      if (fixed_in_class(run, k, cls, tol)) r += run.closed[k];
    double pr = r.trace().real();
    if (pr < kMinProbability) continue;
    OutcomeReport o;
    o.charges = cls.charges;
    for (Charge a : cls.charges) o.label += (o.label.empty() ? "" : "+") + m.name(a);
    o.probability = pr;
    o.post_state = from_chain(run.ex.layout, run.ex.basis, r / pr);
    out.push_back(std::move(o));
  }
  return out;
}

inline std::vector<OutcomeReport> twisted_asymptotic(const AnyonModel& m, const TargetState& target,
                                                     const BeamSplitters& bs, const ProbeSpec& probe,
                                                     const TwistSpec& twist) {
  return twisted_asymptotic(twisted_run(m, target, bs, probe, twist));
}

// Fixed state of a class as four omega loops on the twisted chain (the tau
// loops are already absorbed into it), closed and renormalized.
inline TargetState omega_tau_form(const AnyonModel& m, const TargetState& target, const std::vector<Charge>& cls,
                                  const ProbeSpec& probe, const TwistSpec& twist) {
  probe.validate(m);
  TwistedExpansion ex = tau_absorption(m, target, twist);
  auto b0 = trivial_monodromy_set(m, probe);
  LoopEvaluator ev(m, ex.twisted);
  auto omega = [&](const MatrixXc& r, const std::vector<Charge>& set, Arm ket, Arm bra) {
    MatrixXc acc = MatrixXc::Zero(r.rows(), r.cols());
    for (Charge h : set) acc += loop_projection(m, ev, r, h, ket, bra);
    return acc;
  };
  MatrixXc r = omega(ex.rho, b0, Arm::Lower, Arm::Lower);
  r = omega(r, b0, Arm::Upper, Arm::Upper);
  r = omega(r, cls, Arm::Lower, Arm::Upper);
  r = omega(r, cls, Arm::Upper, Arm::Lower);
  MatrixXc c = ex.closed(r);
  double pr = c.trace().real();
  if (pr < kMinProbability) throw Error(ErrorKind::ZeroProbabilityOutcome, "class has zero weight");
  return from_chain(target.layout, ex.basis, c / pr);
}

}  // namespace anyonic
