#pragma once

#include <cmath>
#include <map>

#include "model.hpp"

namespace anyonic {

// Detector outcome: Horizontal is the paper's right arrow, Vertical the up arrow.
enum class Outcome { Horizontal, Vertical };
enum class Arm { Lower, Upper };
enum class TwistVariant { TwistOperator, PureBraid };

inline char outcome_char(Outcome s) { return s == Outcome::Horizontal ? '>' : '^'; }

struct BeamSplitters {
  cplx t1{M_SQRT1_2}, r1{M_SQRT1_2}, t2{M_SQRT1_2}, r2{M_SQRT1_2};
  double theta_I = 0, theta_II = 0;
  // Suppression of both interference terms; 1 is a perfectly coherent device.
  double visibility = 1;

  void validate(double tol = 1e-12) const {
    if (std::abs(std::norm(t1) + std::norm(r1) - 1.0) > tol || std::abs(std::norm(t2) + std::norm(r2) - 1.0) > tol)
      throw Error(ErrorKind::InvalidParameter, "beam splitter amplitudes are not normalized");
    if (!(visibility > 0 && visibility <= 1)) throw Error(ErrorKind::InvalidParameter, "visibility must lie in (0, 1]");
  }

  // t1 r1* r2* t2* exp(i(theta_I - theta_II))
  cplx interference() const {
    return t1 * std::conj(r1) * std::conj(r2) * std::conj(t2) * expi(theta_I - theta_II);
  }

  // Amplitude for a probe that took the given arm to reach detector s.
  cplx amplitude(Arm arm, Outcome s) const {
    if (arm == Arm::Lower)
      return (s == Outcome::Horizontal ? t1 * std::conj(r2) : -t1 * std::conj(t2)) * expi(theta_I);
    return (s == Outcome::Horizontal ? r1 * t2 : r1 * r2) * expi(theta_II);
  }
};

// Balanced splitters with t1 r1* r2* t2* exp(i(theta_I - theta_II)) = exp(i phi)/4.
inline BeamSplitters tuned_splitters(double phi) {
  BeamSplitters s;
  s.theta_I = phi;
  return s;
}

struct ProbeSpec {
  std::map<Charge, double> distribution;

  static ProbeSpec single(Charge b) { return ProbeSpec{{{b, 1.0}}}; }

  void validate(const AnyonModel& m, double tol = 1e-12) const {
    double sum = 0;
    for (auto [b, p] : distribution) {
      m.check_index(b);
      if (p < 0) throw Error(ErrorKind::InvalidDistribution, "negative probe probability");
      sum += p;
    }
    if (distribution.empty() || std::abs(sum - 1.0) > tol)
      throw Error(ErrorKind::InvalidDistribution, "probe probabilities do not sum to 1");
  }
};

struct TwistSpec {
  long m_lower = 0;
  long m_upper = 0;
  TwistVariant variant = TwistVariant::TwistOperator;

  bool trivial() const { return m_lower == 0 && m_upper == 0; }
};

// M_{aB} = sum_b Pr(b) M_{ab} for every charge a.
inline std::vector<cplx> monodromy_expectation(const AnyonModel& m, const ProbeSpec& probe) {
  probe.validate(m);
  std::vector<cplx> out(m.rank(), 0.0);
  for (int a = 0; a < m.rank(); ++a)
    for (auto [b, p] : probe.distribution) out[a] += p * m.M()(a, b);
  return out;
}

}  // namespace anyonic
