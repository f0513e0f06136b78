#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "interferometry.hpp"
#include "models.hpp"
#include "twisted.hpp"

namespace anyonic::ising {

using Qubit = Eigen::Matrix2cd;
using PureQubit = Eigen::Vector2cd;

// Charge indices shared by every model built with models::ising_family.
inline constexpr Charge kVacuum = 0, kSigma = 1, kPsi = 2;

inline void validate_qubit(const Qubit& rho, double tol = kTol) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorKind::NotAState, "qubit density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > tol) throw Error(ErrorKind::NotAState, "qubit density matrix does not have unit trace");
  Eigen::SelfAdjointEigenSolver<Qubit> es(rho);
  if (es.eigenvalues().minCoeff() < -tol) throw Error(ErrorKind::NotAState, "qubit density matrix is not PSD");
}

inline Qubit pure(const PureQubit& psi) { return psi * psi.adjoint(); }

// |0> = |I,I;I>, |1> = |psi,psi;I>
inline TargetState encode_qubit(const Qubit& rho) {
  validate_qubit(rho);
  const Charge q[2] = {kVacuum, kPsi};
  TargetState s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (rho(i, j) != cplx(0)) s.entries[{{q[i], q[i], kVacuum}, {q[j], q[j], kVacuum}}] = rho(i, j);
  return s;
}

inline Qubit decode_qubit(const TargetState& s, double tol = 1e-10) {
  if (s.layout != Layout::Simple) throw Error(ErrorKind::NotAState, "qubit states use the Simple layout");
  Qubit rho = Qubit::Zero();
  auto slot = [](const Labels& x) {
    if (x == Labels{kVacuum, kVacuum, kVacuum}) return 0;
    if (x == Labels{kPsi, kPsi, kVacuum}) return 1;
    return -1;
  };
  for (const auto& [k, v] : s.entries) {
    int i = slot(k.first), j = slot(k.second);
    if (i < 0 || j < 0) {
      if (std::abs(v) > tol) throw Error(ErrorKind::NotAState, "state has weight outside the qubit subspace");
      continue;
    }
    rho(i, j) = v;
  }
  return rho;
}

struct QubitOutcome {
  std::string label;
  double probability = 0;
  Qubit rho;
};

inline std::vector<QubitOutcome> decode_reports(const std::vector<OutcomeReport>& reports) {
  std::vector<QubitOutcome> out;
  for (const auto& r : reports) out.push_back({r.label, r.probability, decode_qubit(r.post_state)});
  return out;
}

// Twisted interferometer with sigma probes and m twists on the lower arm.
inline std::vector<QubitOutcome> twisted_protocol(const AnyonModel& m, const Qubit& rho, long twists,
                                                  const BeamSplitters& bs = tuned_splitters(0),
                                                  TwistVariant variant = TwistVariant::TwistOperator) {
  auto reports = twisted_asymptotic(m, encode_qubit(rho), bs, ProbeSpec::single(kSigma), TwistSpec{twists, 0, variant});
  return decode_reports(reports);
}

inline std::vector<QubitOutcome> magic_state_protocol(const AnyonModel& m, const Qubit& rho, long twists,
                                                      const BeamSplitters& bs = tuned_splitters(0)) {
  if (twists % 2 != 0) throw Error(ErrorKind::OddTwist, "magic_state_protocol needs an even twist count");
  return twisted_protocol(m, rho, twists, bs);
}

inline std::vector<QubitOutcome> magic_state_protocol(const Qubit& rho, long twists) {
  return magic_state_protocol(models::ising(), rho, twists);
}

inline std::vector<QubitOutcome> m_odd_protocol(const AnyonModel& m, const Qubit& rho, long twists,
                                                const BeamSplitters& bs = tuned_splitters(0)) {
  if (twists % 2 == 0) throw Error(ErrorKind::EvenTwist, "m_odd_protocol needs an odd twist count");
  return twisted_protocol(m, rho, twists, bs);
}

inline std::vector<QubitOutcome> m_odd_protocol(const Qubit& rho, long twists) {
  return m_odd_protocol(models::ising(), rho, twists);
}

struct PhaseGateSpec {
  double phi = 0;
  BeamSplitters splitters = tuned_splitters(0);

  static PhaseGateSpec tuned(double phi) { return {phi, tuned_splitters(phi)}; }

  void validate(double tol = 1e-12) const {
    splitters.validate();
    for (cplx a : {splitters.t1, splitters.r1, splitters.t2, splitters.r2})
      if (std::abs(std::abs(a) - M_SQRT1_2) > tol)
        throw Error(ErrorKind::UntunedSplitters, "splitter amplitudes must all have modulus 1/sqrt(2)");
    if (std::abs(splitters.interference() - expi(phi) / 4.0) > tol)
      throw Error(ErrorKind::UntunedSplitters, "splitter phase does not match phi");
  }
};

inline std::vector<QubitOutcome> fake_twist_single_probe(const AnyonModel& m, const Qubit& rho, const PhaseGateSpec& spec) {
  spec.validate();
  TargetState s = encode_qubit(rho);
  std::vector<QubitOutcome> out;
  for (Outcome o : {Outcome::Horizontal, Outcome::Vertical}) {
    if (single_probe_probability(m, s, spec.splitters, ProbeSpec::single(kSigma), o) < kMinProbability) continue;
    auto [pr, post] = single_probe_update(m, s, spec.splitters, ProbeSpec::single(kSigma), o);
    out.push_back({std::string(1, outcome_char(o)), pr, decode_qubit(post)});
  }
  return out;
}

inline std::vector<QubitOutcome> fake_twist_single_probe(const Qubit& rho, const PhaseGateSpec& spec) {
  return fake_twist_single_probe(models::ising(), rho, spec);
}

// A^s_a for a in {I, psi}; p^s_{aa'e,sigma} = A^s_a conj(A^s_a').
struct ProductAmplitudes {
  std::array<std::array<cplx, 2>, 2> amp;  // [outcome][0 = I, 1 = psi]

  cplx operator()(Outcome s, Charge a) const { return amp[s == Outcome::Horizontal ? 0 : 1][a == kPsi ? 1 : 0]; }
};

inline ProductAmplitudes product_form_amplitudes(const BeamSplitters& bs) {
  ProductAmplitudes A;
  for (Outcome s : {Outcome::Horizontal, Outcome::Vertical}) {
    cplx lower = bs.amplitude(Arm::Lower, s), upper = bs.amplitude(Arm::Upper, s);
    int k = s == Outcome::Horizontal ? 0 : 1;
    A.amp[k][0] = lower + upper;
    A.amp[k][1] = -lower + upper;
  }
  return A;
}

inline ProductAmplitudes product_form_amplitudes(const PhaseGateSpec& spec) {
  spec.validate();
  return product_form_amplitudes(spec.splitters);
}

struct PartialResult {
  PureQubit state;
  double probability = 0;
};

inline PartialResult partial_interferometry(const PureQubit& psi, const BeamSplitters& bs, int N, int n) {
  bs.validate();
  if (std::abs(psi.squaredNorm() - 1.0) > kTol) throw Error(ErrorKind::NotAState, "pure state is not normalized");
  if (N < 0 || n < 0 || n > N) throw Error(ErrorKind::InvalidParameter, "count out of range");
  auto A = product_form_amplitudes(bs);
  PureQubit v;
  v(0) = ipow(A(Outcome::Horizontal, kVacuum), n) * ipow(A(Outcome::Vertical, kVacuum), N - n) * psi(0);
  v(1) = ipow(A(Outcome::Horizontal, kPsi), n) * ipow(A(Outcome::Vertical, kPsi), N - n) * psi(1);
  double w = v.squaredNorm();
  if (w < 1e-300) throw Error(ErrorKind::ZeroProbabilityOutcome, "count has zero probability");
  PartialResult r;
  r.probability = binomial(N, n) * w;
  if (r.probability < kMinProbability) throw Error(ErrorKind::ZeroProbabilityOutcome, "Pr = " + std::to_string(r.probability));
  r.state = v / std::sqrt(w);
  return r;
}

// Count-averaged density matrix after N probes.
inline Qubit partial_ensemble(const PureQubit& psi, const BeamSplitters& bs, int N) {
  Qubit out = Qubit::Zero();
  for (int n = 0; n <= N; ++n) {
    try {
      auto r = partial_interferometry(psi, bs, N, n);
      out += r.probability * pure(r.state);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroProbabilityOutcome) throw;
    }
  }
  return out;
}

struct ProductFormCheck {
  bool ok = true;
  std::vector<std::string> reasons;
};

// |M_ab| = |M_a'b| = 1, a = a' x e (a single fusion channel), M_eb = +-1.
inline ProductFormCheck product_form_check(const AnyonModel& m, Charge a, Charge ap, Charge e, Charge b,
                                           double tol = kTol) {
  for (Charge x : {a, ap, e, b}) m.check_index(x);
  ProductFormCheck r;
  auto fail = [&](std::string why) {
    r.ok = false;
    r.reasons.push_back(std::move(why));
  };
  if (std::abs(std::abs(m.M()(a, b)) - 1.0) > tol) fail("|M_ab| != 1");
  if (std::abs(std::abs(m.M()(ap, b)) - 1.0) > tol) fail("|M_a'b| != 1");
  auto prod = m.fuse(ap, e);
  if (prod.size() != 1 || prod[0] != a) fail("a is not the unique fusion product of a' and e");
  cplx meb = m.M()(e, b);
  if (std::abs(meb - 1.0) > tol && std::abs(meb + 1.0) > tol) fail("M_eb != +-1");
  return r;
}

// The 24 single-qubit Cliffords modulo phase, each fixed to a canonical phase.
inline const std::vector<Eigen::Matrix2cd>& clifford_group() {
  static const std::vector<Eigen::Matrix2cd> group = [] {
    Eigen::Matrix2cd H, S;
    H << M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2;
    S << 1, 0, 0, kI;
    auto canon = [](Eigen::Matrix2cd u) {
      for (int k = 0; k < 4; ++k)
        if (std::abs(u(k)) > 1e-9) return Eigen::Matrix2cd(u * (std::abs(u(k)) / u(k)));
      return u;
    };
    std::vector<Eigen::Matrix2cd> out{Eigen::Matrix2cd::Identity()};
    for (size_t i = 0; i < out.size(); ++i)
      for (const auto& g : {H, S}) {
        Eigen::Matrix2cd c = canon(g * out[i]);
        bool seen = false;
        for (const auto& x : out) seen = seen || (x - c).cwiseAbs().maxCoeff() < 1e-9;
        if (!seen) out.push_back(c);
      }
    return out;
  }();
  return group;
}

inline PureQubit magic_state() { return PureQubit(std::cos(kPi / 8), -kI * std::sin(kPi / 8)); }

struct FidelityResult {
  double fidelity = 0;
  int frame = 0;
  Eigen::Matrix2cd clifford;
};

// max over Cliffords C of <B| C rho C^dagger |B>
inline FidelityResult magic_state_fidelity(const Qubit& rho) {
  validate_qubit(rho);
  const auto& g = clifford_group();
  PureQubit b = magic_state();
  FidelityResult best{-1, 0, g[0]};
  for (size_t k = 0; k < g.size(); ++k) {
    double f = (b.adjoint() * g[k] * rho * g[k].adjoint() * b)(0).real();
    if (f > best.fidelity + 1e-15) best = {f, static_cast<int>(k), g[k]};
  }
  return best;
}

}  // namespace anyonic::ising
