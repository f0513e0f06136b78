#pragma once

#include <algorithm>
#include <random>

#include <anyonic/anyonic.hpp>

namespace testing {

using namespace anyonic;

// Random PSD state with trace 1, block-diagonal in the total charge.
inline TargetState random_state(const AnyonModel& m, Layout lay, std::mt19937& g, const std::vector<Charge>& as,
                                const std::vector<Charge>& c1s, const std::vector<Charge>& c2s = {0}) {
  std::normal_distribution<double> nd;
  std::map<Charge, std::vector<Labels>> by_total;
  for (Charge a : as)
    for (Charge c : c1s) {
      if (lay == Layout::Simple) {
        for (Charge f : m.fuse(a, c)) by_total[f].push_back({a, c, f});
        continue;
      }
      for (Charge c2 : c2s)
        for (Charge h : m.fuse(c2, a))
          for (Charge f : m.fuse(h, c)) by_total[f].push_back({c2, a, h, c, f});
    }
  TargetState s;
  s.layout = lay;
  double tr = 0;
  for (const auto& [f, ls] : by_total) {
    const int n = static_cast<int>(ls.size());
    MatrixXc a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = cplx(nd(g), nd(g));
    MatrixXc r = a * a.adjoint();
    tr += r.trace().real();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s.entries[{ls[i], ls[j]}] = r(i, j);
  }
  for (auto& [k, v] : s.entries) v /= tr;
  return s;
}

inline BeamSplitters random_splitters(std::mt19937& g) {
  std::uniform_real_distribution<double> u(0.15, 0.85), ph(-kPi, kPi);
  BeamSplitters bs;
  double a = std::sqrt(u(g)), b = std::sqrt(u(g));
  bs.t1 = std::polar(a, ph(g));
  bs.r1 = std::polar(std::sqrt(1 - a * a), ph(g));
  bs.t2 = std::polar(b, ph(g));
  bs.r2 = std::polar(std::sqrt(1 - b * b), ph(g));
  bs.theta_I = ph(g);
  bs.theta_II = ph(g);
  return bs;
}

inline Eigen::Matrix2cd random_qubit(std::mt19937& g) {
  std::normal_distribution<double> nd;
  Eigen::Matrix2cd a;
  for (int k = 0; k < 4; ++k) a(k) = cplx(nd(g), nd(g));
  Eigen::Matrix2cd r = a * a.adjoint();
  return r / r.trace();
}

// Oracle outcome strings grouped by the number of horizontal detections.
struct CountAggregate {
  std::vector<double> probability;
  std::vector<TargetState> post;  // unnormalized
};

inline CountAggregate by_count(const std::map<std::string, OracleOutcome>& orc, Layout lay, int N) {
  CountAggregate c{std::vector<double>(N + 1, 0.0), std::vector<TargetState>(N + 1)};
  for (auto& t : c.post) t.layout = lay;
  for (const auto& [key, o] : orc) {
    int n = static_cast<int>(std::count(key.begin(), key.end(), '>'));
    c.probability[n] += o.probability;
    for (const auto& [k, v] : o.post_state.entries) c.post[n].entries[k] += v * o.probability;
  }
  return c;
}

inline double min_eig(const TargetState& s) {
  auto basis = support(s);
  return min_eigenvalue(dense(s, basis));
}

inline bool hermitian(const TargetState& s, double tol = 1e-10) {
  for (const auto& [k, v] : s.entries)
    if (std::abs(v - std::conj(s.at(k.second, k.first))) > tol) return false;
  return true;
}

// Fixed component of a class on the twisted chain, before the loop pairs close.
inline MatrixXc twisted_frame_fixed(const TwistedRun& run, const ChargeClass& cls, double tol = 1e-9) {
  MatrixXc r = MatrixXc::Zero(run.ex.twisted.size(), run.ex.twisted.size());
  for (size_t k = 0; k < run.dec.comps.size(); ++k)
    if (fixed_in_class(run, k, cls, tol)) r += run.dec.comps[k].part;
  return r;
}

// Continues a twisted run on its fixed component with a further batch of N
// probes at the class count, through the exact channel, and closes the loops.
inline TargetState continue_fixed(const TwistedRun& run, const ChargeClass& cls, int N) {
  ProbeChannel ch(*run.pm.model, run.ex.twisted, run.pm.bs, run.pm.probe, run.pm.twist_shift);
  const int n = static_cast<int>(std::lround(N * cls.p));
  MatrixXc r = run.ex.closed(channel_counts(ch, twisted_frame_fixed(run, cls), N)[n]);
  return from_chain(run.ex.layout, run.ex.basis, r / r.trace().real());
}

}  // namespace testing
