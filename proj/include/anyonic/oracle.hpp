#pragma once

#include <string>
#include <vector>

#include "chain.hpp"
#include "config.hpp"
#include "state.hpp"

namespace anyonic {

// Chirality of a probe on the given arm passing a leaf with the given tag:
// the lower arm runs below A and C2 and above C1, the upper arm runs above A
// and C1 and below C2.
inline int passage_sign(Arm arm, Tag tag) {
  if (tag == Tag::Above) return +1;
  if (tag == Tag::Below) return -1;
  return arm == Arm::Lower ? +1 : -1;
}

// A sequence of basis changes along a fixed list of leaf layouts, with both
// chiralities precomputed so ket and bra can take different routes.
struct Passage {
  std::vector<ChainBasis> bases;  // bases[0] is the input basis
  std::vector<SpMat> plus, minus;
  std::vector<Tag> tags;          // tag of the leaf being passed at each step
};

// Moving the leaf at position pos to the end of the chain.
inline Passage build_passage(const AnyonModel& m, const ChainBasis& in, int pos) {
  Passage p;
  p.bases.push_back(in);
  for (int i = pos; i + 1 < in.n_leaves(); ++i) {
    const ChainBasis& cur = p.bases.back();
    p.tags.push_back(cur.leaves()[i + 1].tag);
    auto [b1, up] = exchange(m, cur, i, +1);
    auto [b2, dn] = exchange(m, cur, i, -1);
    p.plus.push_back(up);
    p.minus.push_back(dn);
    p.bases.push_back(b1);
  }
  return p;
}

inline MatrixXc run_passage(const Passage& p, const MatrixXc& rho, Arm ket, Arm bra) {
  MatrixXc r = rho;
  for (size_t k = 0; k < p.plus.size(); ++k) {
    const SpMat& a = passage_sign(ket, p.tags[k]) > 0 ? p.plus[k] : p.minus[k];
    const SpMat& b = passage_sign(bra, p.tags[k]) > 0 ? p.plus[k] : p.minus[k];
    r = sandwich(a, r, b);
  }
  return r;
}

// Unentangled probes b_N ... b_1 (left to right): identity on their fusion
// space, weighted by d_g / prod d_b.
inline std::pair<ChainBasis, MatrixXc> probe_block(const AnyonModel& m, const std::vector<Charge>& charges) {
  std::vector<Leaf> leaves;
  double w = 1;
  for (Charge b : charges) {
    leaves.push_back({{b}, Tag::Between});
    w /= m.d(b);
  }
  ChainBasis basis(m, leaves);
  MatrixXc r = MatrixXc::Zero(basis.size(), basis.size());
  for (int i = 0; i < basis.size(); ++i) r(i, i) = w * m.d(basis.total(i));
  return {basis, r};
}

// One probe of charge x, ket on arm k and bra on arm b, traced out after it
// has passed every leaf. The loop this leaves on the target is the
// superoperator used to project onto labelled components.
inline std::pair<ChainBasis, MatrixXc> probe_loop(const AnyonModel& m, const ChainBasis& basis, const MatrixXc& rho,
                                                  Charge x, Arm ket, Arm bra) {
  auto [pb, pr] = probe_block(m, {x});
  auto [cb, cr] = tensor(m, pb, pr, basis, rho);
  Passage p = build_passage(m, cb, 0);
  MatrixXc r = run_passage(p, cr, ket, bra);
  auto [tb, tr] = trace_last(m, p.bases.back(), r);
  return {tb, tr};
}

// ---------------------------------------------------------------------------
// Operators on n leaves.

// Loop of charge x around all leaves: a vacuum pair (xbar, x) is created at the
// front, x is carried around every leaf and the pair is annihilated. The
// result is d_x <pair| monodromy |pair>.
inline MatrixXc loop_operator(const AnyonModel& m, const ChainBasis& basis, Charge x) {
  auto [pb, v] = insert_pair(m, basis, 0, m.dual(x), Tag::Between, Tag::Between);
  const int n = pb.n_leaves();
  ChainBasis cur = pb;
  SpMat op = v;
  for (int i = 1; i + 1 < n; ++i) {
    auto [nb, g] = exchange(m, cur, i, +1);
    op = (g * op).eval();
    cur = nb;
  }
  for (int i = n - 2; i >= 1; --i) {
    auto [nb, g] = exchange(m, cur, i, +1);
    op = (g * op).eval();
    cur = nb;
  }
  SpMat vt = v.adjoint();
  return m.d(x) * MatrixXc(vt * op);
}

// Projector onto total charge a, built from the omega_a loop
// sum_x S_{0a} S*_{ax} (x loop).
inline MatrixXc projector_matrix(const AnyonModel& m, const ChainBasis& basis, Charge a) {
  m.check_index(a);
  MatrixXc p = MatrixXc::Zero(basis.size(), basis.size());
  for (int x = 0; x < m.rank(); ++x) {
    cplx w = m.S()(0, a) * std::conj(m.S()(a, x));
    if (std::abs(w) < 1e-15) continue;
    p += w * loop_operator(m, basis, x);
  }
  return p;
}

inline MatrixXc twist_operator_matrix(const AnyonModel& m, const ChainBasis& basis, long power) {
  MatrixXc t = MatrixXc::Zero(basis.size(), basis.size());
  for (int a = 0; a < m.rank(); ++a) t += ipow(m.theta(a), power) * projector_matrix(m, basis, a);
  return t;
}

inline MatrixXc pure_braid_matrix(const AnyonModel& m, const ChainBasis& basis, long power) {
  MatrixXc t = twist_operator_matrix(m, basis, power);
  for (int i = 0; i < basis.size(); ++i) {
    cplx f = 1;
    for (int k = 0; k < basis.n_leaves(); ++k) f *= ipow(m.theta(basis.leaf(i, k)), -power);
    t.row(i) *= f;
  }
  return t;
}

// Full counterclockwise rotation of the leaves in [first, last), as the braid
// word (s_first ... s_{last-2})^k applied power times (inverse for negative).
inline SpMat full_twist_word(const AnyonModel& m, const ChainBasis& basis, int first, int last, long power,
                             ChainBasis* out_basis = nullptr) {
  SpMat op(basis.size(), basis.size());
  op.setIdentity();
  ChainBasis cur = basis;
  const int k = last - first;
  const int sign = power >= 0 ? 1 : -1;
  const long reps = std::abs(power) * k;
  if (k >= 2) {
    for (long r = 0; r < reps; ++r)
      for (int i = first; i + 1 < last; ++i) {
        auto [nb, g] = exchange(m, cur, i, sign);
        op = (g * op).eval();
        cur = nb;
      }
  }
  if (out_basis) *out_basis = cur;
  return op;
}

// Value of a loop of charge b around a line of charge a, from the explicit
// double braid: chain (bbar, b, a), b carried around a.
inline cplx loop_removal_value(const AnyonModel& m, Charge b, Charge a) {
  m.check_index(a);
  m.check_index(b);
  ChainBasis basis(m, {Leaf{{a}, Tag::Between}});
  MatrixXc l = loop_operator(m, basis, b);
  return l(0, 0);
}

// ---------------------------------------------------------------------------
// Brute-force interferometer.

struct OracleOutcome {
  double probability = 0;
  TargetState post_state;
};

inline constexpr long kDefaultOracleBudget = 4096;

// Exact joint distribution of outcome strings ('>' horizontal, '^' vertical,
// first probe first) from a literal sum over the 4^N ket/bra routes of the
// probes. Twists act directly on the probe worldlines on each arm before they
// reach the targets: Theta^m (or the pure braid) on the bundle of probes
// taking that arm.
inline std::map<std::string, OracleOutcome> enumerate_probe_paths(const AnyonModel& m, const TargetState& target,
                                                                  const BeamSplitters& bs, const ProbeSpec& probe,
                                                                  int n_probes, const TwistSpec& twist = {},
                                                                  long budget = kDefaultOracleBudget) {
  if (n_probes < 1) throw Error(ErrorKind::InvalidParameter, "need at least one probe");
  if (n_probes > 6 || (1L << (2 * n_probes)) > budget)
    throw Error(ErrorKind::OracleTooLarge, "4^" + std::to_string(n_probes) + " route pairs exceed the budget");
  bs.validate();
  if (bs.visibility != 1.0) throw Error(ErrorKind::InvalidParameter, "the oracle models coherent devices only");
  probe.validate(m);
  const int N = n_probes;
  const int routes = 1 << N;
  auto [tb, tr] = to_chain(m, target);
  const Layout layout = target.layout;

  std::vector<std::pair<Charge, double>> dist(probe.distribution.begin(), probe.distribution.end());
  std::vector<int> choice(N, 0);
  std::map<std::string, MatrixXc> acc;
  ChainBasis final_basis = tb;

  while (true) {
    // charges[p] is the charge at chain position p, i.e. b_{N-p}
    std::vector<Charge> charges(N);
    double weight = 1;
    for (int j = 0; j < N; ++j) {
      charges[N - 1 - j] = dist[choice[j]].first;
      weight *= dist[choice[j]].second;
    }
    if (weight > 0) {
      auto [pb, pr] = probe_block(m, charges);
      auto [cb, cr] = tensor(m, pb, pr, tb, tr);

      // stage 2: twist operators for every route of the ket (or bra)
      std::vector<SpMat> W(routes);
      for (int route = 0; route < routes; ++route) {
        // bit j of route set means probe b_{j+1} takes the upper arm
        std::vector<Arm> arm_at(N);
        for (int p = 0; p < N; ++p) arm_at[p] = (route >> (N - 1 - p)) & 1 ? Arm::Upper : Arm::Lower;
        std::vector<Charge> ch = charges;
        SpMat op(cb.size(), cb.size());
        op.setIdentity();
        ChainBasis cur = cb;
        std::vector<int> swaps;
        bool moved = true;
        while (moved) {
          moved = false;
          for (int p = 0; p + 1 < N; ++p) {
            if (arm_at[p] == Arm::Lower && arm_at[p + 1] == Arm::Upper) {
              auto [nb, g] = exchange(m, cur, p, +1);
              op = (g * op).eval();
              cur = nb;
              std::swap(arm_at[p], arm_at[p + 1]);
              std::swap(ch[p], ch[p + 1]);
              swaps.push_back(p);
              moved = true;
            }
          }
        }
        int n_upper = 0;
        while (n_upper < N && arm_at[n_upper] == Arm::Upper) ++n_upper;
        cplx phase = 1;
        auto twist_block = [&](int first, int last, long power) {
          if (power == 0 || last <= first) return;
          ChainBasis nb;
          SpMat g = full_twist_word(m, cur, first, last, power, &nb);
          op = (g * op).eval();
          cur = nb;
          if (twist.variant == TwistVariant::TwistOperator)
            for (int p = first; p < last; ++p) phase *= ipow(m.theta(ch[p]), power);
        };
        twist_block(0, n_upper, twist.m_upper);
        twist_block(n_upper, N, twist.m_lower);
        for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) {
          auto [nb, g] = exchange(m, cur, *it, -1);
          op = (g * op).eval();
          cur = nb;
        }
        W[route] = phase * op;
      }

      // stage 3: probes b_1, b_2, ... pass the targets and are traced out
      std::vector<Passage> passages;
      std::vector<ChainBasis> after;
      ChainBasis cur = cb;
      for (int j = 1; j <= N; ++j) {
        passages.push_back(build_passage(m, cur, N - j));
        cur = trace_last(m, passages.back().bases.back(), MatrixXc::Zero(passages.back().bases.back().size(),
                                                                        passages.back().bases.back().size()))
                  .first;
      }
      final_basis = cur;

      std::vector<MatrixXc> left(routes);
      for (int route = 0; route < routes; ++route) left[route] = W[route] * cr;
      for (int kr = 0; kr < routes; ++kr)
        for (int br = 0; br < routes; ++br) {
          MatrixXc z = (W[br] * left[kr].adjoint()).adjoint();
          for (int j = 1; j <= N; ++j) {
            Arm ka = (kr >> (j - 1)) & 1 ? Arm::Upper : Arm::Lower;
            Arm ba = (br >> (j - 1)) & 1 ? Arm::Upper : Arm::Lower;
            z = run_passage(passages[j - 1], z, ka, ba);
            auto t = trace_last(m, passages[j - 1].bases.back(), z);
            z = std::move(t.second);
          }
          for (int s = 0; s < routes; ++s) {
            std::string key;
            cplx amp = weight;
            for (int j = 1; j <= N; ++j) {
              Outcome o = (s >> (j - 1)) & 1 ? Outcome::Vertical : Outcome::Horizontal;
              key += outcome_char(o);
              Arm ka = (kr >> (j - 1)) & 1 ? Arm::Upper : Arm::Lower;
              Arm ba = (br >> (j - 1)) & 1 ? Arm::Upper : Arm::Lower;
              amp *= bs.amplitude(ka, o) * std::conj(bs.amplitude(ba, o));
            }
            if (amp == cplx(0)) continue;
            auto it = acc.find(key);
            if (it == acc.end()) acc.emplace(key, amp * z);
            else it->second += amp * z;
          }
        }
    }
    int j = 0;
    while (j < N && ++choice[j] == static_cast<int>(dist.size())) choice[j++] = 0;
    if (j == N) break;
  }

  std::map<std::string, OracleOutcome> out;
  for (auto& [key, r] : acc) {
    OracleOutcome o;
    o.probability = r.trace().real();
    if (o.probability > kMinProbability) o.post_state = from_chain(layout, final_basis, r / o.probability);
    else o.post_state.layout = layout;
    out[key] = o;
  }
  return out;
}

}  // namespace anyonic
