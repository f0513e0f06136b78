// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

#include "support.hpp"

using namespace anyonic;
using testing::random_qubit;
using testing::random_splitters;
using testing::random_state;

namespace {

constexpr double kTable = 1e-12;
constexpr double kTau = 1e-12;
constexpr double kTunedFactor = 1e-12;
constexpr double kProjection = 1e-10;
constexpr double kMagicProb = 1e-10;
constexpr double kMagicFidelity = 1e-9;
constexpr double kOddProb = 1e-10;
constexpr double kReduction = 1e-12;
constexpr double kOracle = 1e-9;
constexpr double kFixed = 1e-9;
constexpr double kVacuumLine = 1e-12;
constexpr double kSigmaTarget = 1e-10;
constexpr double kComposition = 1e-12;
constexpr double kDecayRatio = 1e-6;
constexpr double kUnitary = 1e-12;
constexpr double kTSquared = 1e-15;

constexpr double kBudgetTable = 1.0;
constexpr double kBudgetMagic = 5.0;
constexpr double kBudgetOracle = 60.0;

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Tracks the worst value of one measured quantity against its bound.
struct Worst {
  std::string what;
  double bound;
  double value = 0;
  void see(double x) {
    if (!(x <= value)) value = x;  // NaN sticks
  }
  bool ok() const { return value <= bound; }
  std::string str() const {
    char b[128];
    std::snprintf(b, sizeof b, "%s %.3g (bound %.0e)", what.c_str(), value, bound);
    return b;
  }
};

Verdict combine(std::initializer_list<const Worst*> ws, const std::string& extra = "", bool extra_ok = true) {
  Verdict v;
  v.pass = extra_ok;
  for (const Worst* w : ws) {
    v.pass = v.pass && w->ok();
    v.detail += (v.detail.empty() ? "" : "; ") + w->str();
  }
  if (!extra.empty()) v.detail += (v.detail.empty() ? "" : "; ") + extra;
  return v;
}

TargetState qubit_state(const Eigen::Matrix2cd& rho) { return ising::encode_qubit(rho); }

ising::Qubit plus() { return ising::pure(ising::PureQubit(M_SQRT1_2, M_SQRT1_2)); }

double fidelity(const ising::PureQubit& v, const ising::Qubit& rho) { return (v.adjoint() * rho * v)(0).real(); }

std::vector<Charge> all_charges(const AnyonModel& m) {
  std::vector<Charge> out;
  for (Charge a = 0; a < m.rank(); ++a) out.push_back(a);
  return out;
}

Verdict ising_table() {
  Worst w{"max entry error", kTable};
  AnyonModel m = models::ising();
  const double r2 = std::sqrt(2.0);
  MatrixXc S(3, 3), M(3, 3);
  S << 1, r2, 1, r2, 0, -r2, 1, -r2, 1;
  S /= 2.0;
  M << 1, 1, 1, 1, 0, -1, 1, -1, 1;
  w.see(max_abs(m.S() - S));
  w.see(max_abs(m.M() - M));
  w.see(std::abs(m.d(1) - r2));
  w.see(std::abs(m.theta(1) - expi(kPi / 8)));
  w.see(std::abs(m.theta(2) + 1.0));
  return combine({&w});
}

Verdict tau_closed_forms() {
  Worst w{"max error", kTau};
  AnyonModel m = models::ising();
  const cplx th = m.theta(1);
  const double h = std::sqrt(2.0) / 2;
  for (long k = 1; k <= 16; ++k) {
    MatrixXc T = MatrixXc::Zero(3, 3);
    for (int a = 0; a < 3; ++a) T(a, a) = ipow(m.theta(a), k);
    MatrixXc got = m.S() * T * m.S().adjoint();
    const cplx t = ipow(th, k);
    MatrixXc want(3, 3);
    if (k % 2) want << t / 2.0, h, -t / 2.0, h, 0, h, -t / 2.0, h, t / 2.0;
    else want << (1.0 + t) / 2.0, 0, (1.0 - t) / 2.0, 0, 1, 0, (1.0 - t) / 2.0, 0, (1.0 + t) / 2.0;
    w.see(max_abs(got - want));
    auto coeffs = m.tau_coefficients(k);
    for (int x = 0; x < 3; ++x) w.see(std::abs(coeffs[x] - got(0, x)));
    const double a = k * kPi / 16;
    w.see(std::abs((1.0 + t) / 2.0 - expi(a) * std::cos(a)));
    w.see(std::abs((1.0 - t) / 2.0 + kI * expi(a) * std::sin(a)));
  }
  return combine({&w});
}

Verdict tuned_probe(std::mt19937& g) {
  Worst f{"probe factor error", kTunedFactor}, p{"projection error", kProjection};
  AnyonModel m = models::ising();
  BeamSplitters bs = tuned_splitters(0);
  auto sigma = ProbeSpec::single(ising::kSigma);
  f.see(std::abs(std::abs(bs.t1) - M_SQRT1_2) + std::abs(bs.interference() - 0.25));
  f.see(std::abs(probe_factor(m, bs, sigma, Outcome::Horizontal, 0, 0, 0) - 1.0));
  f.see(std::abs(probe_factor(m, bs, sigma, Outcome::Horizontal, 2, 2, 0)));
  for (int trial = 0; trial < 20; ++trial) {
    ising::Qubit r = random_qubit(g);
    TargetState s = qubit_state(r);
    for (Outcome o : {Outcome::Horizontal, Outcome::Vertical}) {
      const int k = o == Outcome::Horizontal ? 0 : 1;
      double pr = single_probe_probability(m, s, bs, sigma, o);
      p.see(std::abs(pr - r(k, k).real()));
      ising::Qubit post = ising::decode_qubit(single_probe_update(m, s, bs, sigma, o).second);
      ising::Qubit want = ising::Qubit::Zero();
      want(k, k) = 1;
      p.see((post - want).cwiseAbs().maxCoeff());
    }
  }
  return combine({&f, &p});
}

Verdict magic_state() {
  Worst p{"probability error", kMagicProb}, f{"fidelity deficit", kMagicFidelity};
  const ising::PureQubit B = ising::magic_state();
  Eigen::Matrix2cd X;
  X << 0, 1, 1, 0;
  const ising::PureQubit XB = X * B;
  auto check = [&](const std::vector<ising::QubitOutcome>& out) {
    if (out.size() != 2) {
      p.see(1);
      return;
    }
    double fb = 0, fx = 0;
    for (const auto& o : out) {
      p.see(std::abs(o.probability - 0.5));
      fb = std::max(fb, fidelity(B, o.rho));
      fx = std::max(fx, fidelity(XB, o.rho));
    }
    f.see(1 - fb);
    f.see(1 - fx);
  };
  check(ising::magic_state_protocol(plus(), 2));
  check(ising::fake_twist_single_probe(plus(), ising::PhaseGateSpec::tuned(kPi / 4)));
  return combine({&p, &f});
}

Verdict odd_protocol(std::mt19937& g) {
  Worst p{"probability error", kOddProb}, s{"post state error", kOddProb};
  for (long mm : {1L, 3L, 5L, 7L, -1L}) {
    ising::Qubit r = random_qubit(g);
    ising::Qubit neg = r;
    neg(0, 1) = -r(0, 1);
    neg(1, 0) = -r(1, 0);
    auto out = ising::m_odd_protocol(r, mm);
    if (out.size() != 3) {
      p.see(1);
      continue;
    }
    for (const auto& o : out) {
      const bool sig = o.label == "sigma";
      p.see(std::abs(o.probability - (sig ? 0.5 : 0.25)));
      s.see((o.rho - (sig ? r : neg)).cwiseAbs().maxCoeff());
    }
  }
  return combine({&p, &s});
}

Verdict reduction(std::mt19937& g) {
  Worst w{"max difference", kReduction};
  const AnyonModel models_[2] = {models::ising(), models::fibonacci()};
  for (int trial = 0; trial < 100; ++trial) {
    const AnyonModel& m = models_[trial % 2];
    auto probe = ProbeSpec::single(1);
    BeamSplitters bs = random_splitters(g);
    TargetState s = random_state(m, Layout::Simple, g, all_charges(m), {1});
    TwistSpec t{0, 0, trial % 4 < 2 ? TwistVariant::TwistOperator : TwistVariant::PureBraid};
    TwistedRun run = twisted_run(m, s, bs, probe, t);
    const int N = 1 + trial % 4;
    auto a = twisted_distribution(run, N);
    auto b = multi_probe_distribution(m, s, bs, probe, N);
    for (int n = 0; n <= N; ++n) {
      w.see(std::abs(a[n] - b[n]));
      if (b[n] > 1e-9) w.see(max_abs_diff(twisted_update(run, N, n).second, multi_probe_update(m, s, bs, probe, N, n)));
    }
    auto x = twisted_asymptotic(run);
    auto y = asymptotic_outcomes(m, s, bs, probe);
    if (x.size() != y.size()) {
      w.see(1);
      continue;
    }
    for (size_t k = 0; k < x.size(); ++k) {
      if (x[k].charges != y[k].charges) w.see(1);
      w.see(std::abs(x[k].probability - y[k].probability));
      w.see(max_abs_diff(x[k].post_state, y[k].post_state));
    }
  }
  return combine({&w});
}

// Per-string probabilities and post states from the component factors.
Verdict oracle_equivalence(std::mt19937& g) {
  Worst p{"string probability error", kOracle}, s{"string post state error", kOracle};
  AnyonModel ising_m = models::ising(), fib = models::fibonacci();
  struct Case {
    const AnyonModel* m;
    std::vector<Charge> as;
    TwistSpec t;
  };
  const auto TO = TwistVariant::TwistOperator, PB = TwistVariant::PureBraid;
  std::vector<Case> cases{{&ising_m, {0, 1, 2}, {0, 0, TO}}, {&ising_m, {0, 1, 2}, {2, 0, TO}},
                          {&ising_m, {0, 1, 2}, {1, 0, PB}}, {&ising_m, {0, 1, 2}, {0, 1, TO}},
                          {&ising_m, {0, 1, 2}, {0, 2, PB}}, {&ising_m, {1}, {1, 1, PB}},
                          {&fib, {0, 1}, {0, 0, PB}},        {&fib, {0, 1}, {1, 0, TO}},
                          {&fib, {0, 1}, {2, 0, PB}},        {&fib, {0, 1}, {0, 1, TO}},
                          {&fib, {0, 1}, {1, 2, PB}},        {&fib, {0, 1}, {1, 1, TO}}};
  for (const auto& c : cases) {
    const AnyonModel& m = *c.m;
    auto probe = ProbeSpec::single(1);
    BeamSplitters bs = random_splitters(g);
    TargetState st = random_state(m, Layout::Simple, g, c.as, {1});
    TwistedRun run = twisted_run(m, st, bs, probe, c.t);
    for (int N = 1; N <= 3; ++N) {
      auto orc = enumerate_probe_paths(m, st, bs, probe, N, c.t);
      for (const auto& [key, o] : orc) {
        const int n = static_cast<int>(std::count(key.begin(), key.end(), '>'));
        MatrixXc r = MatrixXc::Zero(run.ex.basis.size(), run.ex.basis.size());
        for (size_t k = 0; k < run.dec.comps.size(); ++k)
          r += ipow(run.factor[k][0], n) * ipow(run.factor[k][1], N - n) * run.closed[k];
        const double pr = r.trace().real();
        p.see(std::abs(pr - o.probability));
        if (o.probability > 1e-9) s.see(max_abs_diff(from_chain(st.layout, run.ex.basis, r / pr), o.post_state));
      }
    }
  }
  return combine({&p, &s});
}

Verdict fixed_points(std::mt19937& g) {
  Worst u{"untwisted drift", kFixed}, t{"twisted drift", kFixed};
  for (const auto& m : {models::ising(), models::fibonacci(), models::zn(3)}) {
    auto probe = ProbeSpec::single(1);
    BeamSplitters bs = random_splitters(g);
    ProbeModel pm = make_probe_model(m, bs, probe);
    for (Layout lay : {Layout::Simple, Layout::Generalized}) {
      TargetState s = random_state(m, lay, g, all_charges(m), {1}, {0, 1});
      auto out = lay == Layout::Simple ? asymptotic_outcomes(m, s, bs, probe) : generalized_asymptotic(m, s, bs, probe);
      for (const auto& o : out) {
        double p = pm.p(Outcome::Horizontal, {o.charges[0], o.charges[0], 0, 0}).real();
        const int n = static_cast<int>(std::lround(20 * p));
        u.see(max_abs_diff(multi_probe_update(m, o.post_state, bs, probe, 20, n), o.post_state));
      }
    }
  }
  // twisted outcomes continue within their own run
  AnyonModel m = models::ising();
  auto sigma = ProbeSpec::single(1);
  for (TwistSpec ts : {TwistSpec{2, 0}, TwistSpec{1, 0}, TwistSpec{3, 0, TwistVariant::PureBraid}, TwistSpec{0, 1}}) {
    TargetState s = random_state(m, Layout::Simple, g, {0, 1, 2}, {1});
    TwistedRun run = twisted_run(m, s, random_splitters(g), sigma, ts);
    auto classes = classes_from(m, run.pm);
    for (const auto& o : twisted_asymptotic(run))
      for (const auto& c : classes)
        if (c.charges == o.charges) t.see(max_abs_diff(testing::continue_fixed(run, c, 20), o.post_state));
  }
  return combine({&u, &t});
}

Verdict decoherence(std::mt19937& g) {
  Worst w{"weight off the vacuum line", kVacuumLine};
  bool all_distinguishing = true;
  for (const auto& m : {models::ising(), models::fibonacci(), models::zn(3)}) {
    auto probe = ProbeSpec::single(1);
    BeamSplitters bs = random_splitters(g);
    for (const auto& c : distinguishability_classes(m, bs, probe))
      all_distinguishing = all_distinguishing && c.charges.size() == 1;
    TargetState s = random_state(m, Layout::Simple, g, all_charges(m), {1});
    for (const auto& o : asymptotic_outcomes(m, s, bs, probe))
      for (const auto& c : decompose_simple(m, o.post_state).comps)
        if (c.labels[2] != 0) w.see(max_abs(c.part));
    TargetState gs = random_state(m, Layout::Generalized, g, all_charges(m), {1}, {0, 1});
    for (const auto& o : generalized_asymptotic(m, gs, bs, probe))
      for (const auto& c : decompose(m, o.post_state).comps)
        if (c.labels[2] != 0 || c.labels[3] != 0) w.see(max_abs(c.part));
  }
  return combine({&w}, all_distinguishing ? "" : "probe not all-distinguishing", all_distinguishing);
}

Verdict sigma_target(std::mt19937& g) {
  Worst w{"max error", kSigmaTarget};
  AnyonModel m = models::ising();
  auto sigma = ProbeSpec::single(1);
  TargetState s;
  s.entries[{{1, 1, 0}, {1, 1, 0}}] = 1.0;
  auto at = [](const TargetState& t, Charge f) { return t.at({1, 1, f}, {1, 1, f}); };
  auto weight_elsewhere = [](const TargetState& t, Charge f) {
    double x = 0;
    for (const auto& [k, v] : t.entries)
      if (!(k.first == Labels{1, 1, f} && k.second == Labels{1, 1, f})) x = std::max(x, std::abs(v));
    return x;
  };
  for (long mm : {2L, 4L, 6L}) {
    auto out = twisted_asymptotic(m, s, random_splitters(g), sigma, TwistSpec{mm, 0});
    if (out.size() != 1) {
      w.see(1);
      continue;
    }
    w.see(std::abs(out[0].probability - 1.0));
    w.see(std::abs(at(out[0].post_state, 0) - 0.5));
    w.see(std::abs(at(out[0].post_state, 2) - 0.5));
    double off = 0;
    for (const auto& [k, v] : out[0].post_state.entries)
      if (k.first != k.second) off = std::max(off, std::abs(v));
    w.see(off);
  }
  for (long mm : {1L, 3L, -1L}) {
    auto out = twisted_asymptotic(m, s, random_splitters(g), sigma, TwistSpec{mm, 0});
    if (out.size() != 3) {
      w.see(1);
      continue;
    }
    for (const auto& o : out) {
      const bool sig = o.charges == std::vector<Charge>{1};
      const Charge f = sig ? 2 : 0;
      w.see(std::abs(o.probability - (sig ? 0.5 : 0.25)));
      w.see(std::abs(at(o.post_state, f) - 1.0));
      w.see(weight_elsewhere(o.post_state, f));
    }
  }
  return combine({&w});
}

Verdict partial(std::mt19937& g) {
  Worst c{"composition error", kComposition}, r{"decay ratio spread", kDecayRatio};
  std::normal_distribution<double> nd;
  for (int k = 0; k < 10; ++k) {
    ising::PureQubit psi(cplx(nd(g), nd(g)), cplx(nd(g), nd(g)));
    psi.normalize();
    BeamSplitters bs = random_splitters(g);
    for (auto [n1, N1, n2, N2] : {std::array<int, 4>{1, 3, 2, 4}, std::array<int, 4>{0, 2, 5, 5},
                                  std::array<int, 4>{4, 7, 0, 3}}) {
      auto a = ising::partial_interferometry(psi, bs, N1, n1);
      auto b = ising::partial_interferometry(a.state, bs, N2, n2);
      auto ab = ising::partial_interferometry(psi, bs, N1 + N2, n1 + n2);
      c.see(std::abs(std::abs(b.state.dot(ab.state)) - 1.0));
      const double lhs = a.probability * b.probability / (binomial(N1, n1) * binomial(N2, n2));
      c.see(std::abs(lhs - ab.probability / binomial(N1 + N2, n1 + n2)));
    }
  }
  // generic splitters whose coherence stays well above round-off at N = 50
  auto lambda = [](const BeamSplitters& bs) {
    auto A = ising::product_form_amplitudes(bs);
    return std::abs(A(Outcome::Horizontal, ising::kVacuum) * std::conj(A(Outcome::Horizontal, ising::kPsi)) +
                    A(Outcome::Vertical, ising::kVacuum) * std::conj(A(Outcome::Vertical, ising::kPsi)));
  };
  std::uniform_real_distribution<double> u(0.02, 0.98), ph(-kPi, kPi);
  auto draw = [&] {
    BeamSplitters bs;
    double a = std::sqrt(u(g)), b = std::sqrt(u(g));
    bs.t1 = std::polar(a, ph(g));
    bs.r1 = std::polar(std::sqrt(1 - a * a), ph(g));
    bs.t2 = std::polar(b, ph(g));
    bs.r2 = std::polar(std::sqrt(1 - b * b), ph(g));
    bs.theta_I = ph(g);
    bs.theta_II = ph(g);
    return bs;
  };
  for (int k = 0; k < 5; ++k) {
    BeamSplitters bs = draw();
    for (int tries = 0; lambda(bs) < 0.8 || lambda(bs) > 0.97; ++tries) {
      if (tries > 100000) throw std::runtime_error("no splitters with a usable coherence factor");
      bs = draw();
    }
    ising::PureQubit psi(M_SQRT1_2, M_SQRT1_2);
    double lo = 1e300, hi = -1e300;
    double prev = std::abs(ising::partial_ensemble(psi, bs, 10)(0, 1));
    for (int N = 11; N <= 50; ++N) {
      double cur = std::abs(ising::partial_ensemble(psi, bs, N)(0, 1));
      lo = std::min(lo, cur / prev);
      hi = std::max(hi, cur / prev);
      prev = cur;
    }
    r.see(hi - lo);
    if (!(hi < 1)) r.see(1);
  }
  return combine({&c, &r});
}

Verdict moore_read() {
  Worst u{"S unitarity error", kUnitary}, t{"T^2 error", kTSquared};
  auto mr = models::moore_read_half();
  u.see(max_abs(mr.s_matrix * mr.s_matrix.adjoint() - MatrixXc::Identity(6, 6)));
  const cplx want[6] = {1, 1, kI, -1, -1, kI};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) t.see(std::abs(mr.t_squared(i, j) - (i == j ? want[i] : 0.0)));
  return combine({&u, &t});
}

Verdict sample_size() {
  long a = estimate_sample_size(0.05, 0.25, 1.0), b = estimate_sample_size(0.05, 0.25, 0.5);
  Verdict v;
  v.pass = a == 62 && b == 246;
  v.detail = "Q=1 -> " + std::to_string(a) + ", Q=0.5 -> " + std::to_string(b) + " (ceil)";
  return v;
}

}  // namespace

int main() {
  std::mt19937 g(20240611);
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
    double budget;  // seconds, 0 for none
  };
  const std::vector<Criterion> criteria{
      {"ising_data", ising_table, kBudgetTable},
      {"tau_closed_forms", tau_closed_forms, 0},
      {"tuned_single_probe", [&] { return tuned_probe(g); }, 0},
      {"magic_state", magic_state, kBudgetMagic},
      {"odd_twist_protocol", [&] { return odd_protocol(g); }, 0},
      {"trivial_twist_reduction", [&] { return reduction(g); }, 0},
      {"oracle_equivalence", [&] { return oracle_equivalence(g); }, kBudgetOracle},
      {"fixed_points", [&] { return fixed_points(g); }, 0},
      {"decoherence_rule", [&] { return decoherence(g); }, 0},
      {"sigma_target", [&] { return sigma_target(g); }, 0},
      {"partial_interferometry", [&] { return partial(g); }, 0},
      {"moore_read_data", moore_read, 0},
      {"sample_size", sample_size, 0},
  };
  int failed = 0;
  int k = 0;
  for (const auto& c : criteria) {
    ++k;
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char tb[64];
    std::snprintf(tb, sizeof tb, "%.2fs", secs);
    std::string timing = tb;
    if (c.budget > 0) {
      std::snprintf(tb, sizeof tb, " (budget %.0fs)", c.budget);
      timing += tb;
      if (secs > c.budget) v.pass = false;
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << k << ". " << c.name << ": " << v.detail << "; " << timing
              << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/" << criteria.size() << std::endl;
  return failed ? 1 : 0;
}
