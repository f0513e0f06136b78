#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "interferometry.hpp"
#include "ising.hpp"
#include "model_io.hpp"
#include "models.hpp"
#include "oracle.hpp"
#include "sampling.hpp"
#include "state.hpp"
#include "twisted.hpp"

namespace anyonic::cli {

inline constexpr const char* kJsonSchema = "anyonic-run/1";
inline constexpr const char* kCsvSchema = "anyonic-table/1";

enum class Mode { FiniteN, Asymptotic, Sample, FakeTwist, Partial, SampleSize };

inline Mode parse_mode(const std::string& s) {
  if (s == "finite_n") return Mode::FiniteN;
  if (s == "asymptotic") return Mode::Asymptotic;
  if (s == "sample") return Mode::Sample;
  if (s == "fake_twist") return Mode::FakeTwist;
  if (s == "partial") return Mode::Partial;
  if (s == "sample_size") return Mode::SampleSize;
  throw Error(ErrorKind::InvalidParameter, "unknown mode " + s);
}

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::FiniteN: return "finite_n";
    case Mode::Asymptotic: return "asymptotic";
    case Mode::Sample: return "sample";
    case Mode::FakeTwist: return "fake_twist";
    case Mode::Partial: return "partial";
    case Mode::SampleSize: return "sample_size";
  }
  return "";
}

struct ExperimentConfig {
  std::string model = "ising";
  std::string state;  // path, inline text (';' separates lines) or qubit:a0,a1
  Mode mode = Mode::Asymptotic;
  int n_probes = 0;
  TwistSpec twist;
  std::optional<double> phi;
  std::optional<std::string> splitters;  // t1,r1,t2,r2,theta_I,theta_II
  std::string probe;                     // "sigma" or "sigma:0.5,psi:0.5"; default first non-vacuum charge
  double q = 1.0;
  long trials = 0;
  uint64_t seed = 0;
  bool oracle_check = false;
  double alpha = 0.05;
  double delta_p = 0;
};

struct Row {
  std::string outcome;
  int count = -1;
  double probability = 0;
  long sampled = -1;
  std::optional<TargetState> post_state;
  std::optional<ising::PureQubit> amplitudes;
};

struct RunResult {
  ExperimentConfig config;
  std::string model_name;
  std::vector<Row> rows;
  std::optional<long> sample_size;
  std::optional<double> oracle_error;
  double probability_sum = 0;
  const AnyonModel* model = nullptr;
};

// Error annotated with the config entry it came from.
inline Error in_context(const std::string& where, const Error& e) {
  return Error(e.kind(), where + ": " + e.message());
}

inline AnyonModel load_model(const std::string& ref) {
  if (std::filesystem::exists(ref)) return load_model_file(ref);
  return models::by_name(ref);
}

inline TargetState load_state(const AnyonModel& m, const std::string& ref) {
  if (ref.rfind("qubit:", 0) == 0) {
    auto comma = ref.find(',', 6);
    if (comma == std::string::npos) throw Error(ErrorKind::ParseError, "qubit state needs two amplitudes");
    ising::PureQubit v(parse_complex(ref.substr(6, comma - 6)), parse_complex(ref.substr(comma + 1)));
    if (v.norm() == 0) throw Error(ErrorKind::NotAState, "zero qubit vector");
    v.normalize();
    return ising::encode_qubit(ising::pure(v));
  }
  if (std::filesystem::exists(ref)) return load_state_file(m, ref);
  std::string text = ref;
  for (char& c : text)
    if (c == ';') c = '\n';
  return parse_state(m, text);
}

inline ProbeSpec parse_probe(const AnyonModel& m, const std::string& text) {
  ProbeSpec p;
  if (text.empty()) {
    if (m.rank() < 2) throw Error(ErrorKind::InvalidDistribution, "model has no non-vacuum probe charge");
    return ProbeSpec::single(1);
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) p.distribution[m.charge(detail::trim(item))] += 1.0;
    else p.distribution[m.charge(detail::trim(item.substr(0, colon)))] += detail::parse_real(item.substr(colon + 1), "probe");
  }
  p.validate(m);
  return p;
}

inline BeamSplitters parse_splitters(const ExperimentConfig& c) {
  BeamSplitters bs = c.phi ? tuned_splitters(*c.phi) : BeamSplitters{};
  if (c.splitters) {
    std::vector<std::string> v;
    std::stringstream ss(*c.splitters);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(item);
    if (v.size() != 6) throw Error(ErrorKind::ParseError, "splitters need t1,r1,t2,r2,theta_I,theta_II");
    bs.t1 = parse_complex(v[0]);
    bs.r1 = parse_complex(v[1]);
    bs.t2 = parse_complex(v[2]);
    bs.r2 = parse_complex(v[3]);
    bs.theta_I = detail::parse_real(v[4], "theta_I");
    bs.theta_II = detail::parse_real(v[5], "theta_II");
  }
  bs.visibility = c.q;
  bs.validate();
  return bs;
}

// Pr(n) and rho(n) for N probes, by the engine that is exact for the layout.
inline std::vector<std::pair<double, std::optional<TargetState>>> finite_n(const AnyonModel& m, const TargetState& s,
                                                                          const BeamSplitters& bs, const ProbeSpec& probe,
                                                                          const TwistSpec& twist, int N) {
  std::vector<std::pair<double, std::optional<TargetState>>> out;
  TwistedRun run = twisted_run(m, s, bs, probe, twist);
  for (const auto& r : twisted_counts(run, N)) {
    double pr = r.trace().real();
    if (pr < kMinProbability) out.push_back({pr, std::nullopt});
    else out.push_back({pr, from_chain(s.layout, run.ex.basis, r / pr)});
  }
  return out;
}

inline RunResult run(const ExperimentConfig& c, const AnyonModel& m) {
  RunResult r;
  r.config = c;
  r.model_name = m.model_name();
  r.model = &m;
  if (!(c.q > 0 && c.q <= 1)) throw in_context("q", Error(ErrorKind::InvalidParameter, "visibility must lie in (0, 1]"));

  if (c.mode == Mode::SampleSize) {
    try {
      r.sample_size = estimate_sample_size(c.alpha, c.delta_p, c.q);
    } catch (const Error& e) {
      throw in_context("sample_size", e);
    }
    r.probability_sum = 1;
    return r;
  }

  TargetState s;
  try {
    s = load_state(m, c.state);
    validate(m, s);
  } catch (const Error& e) {
    throw in_context("state", e);
  }
  ProbeSpec probe;
  BeamSplitters bs;
  try {
    probe = parse_probe(m, c.probe);
  } catch (const Error& e) {
    throw in_context("probe", e);
  }
  try {
    bs = parse_splitters(c);
  } catch (const Error& e) {
    throw in_context("splitters", e);
  }

  const std::string where = std::string("mode ") + mode_name(c.mode);
  try {
    switch (c.mode) {
      case Mode::FiniteN:
      case Mode::Sample: {
        if (c.n_probes < 1) throw Error(ErrorKind::InvalidParameter, "n-probes must be at least 1");
        auto res = finite_n(m, s, bs, probe, c.twist, c.n_probes);
        std::map<int, double> dist;
        for (int n = 0; n <= c.n_probes; ++n) dist[n] = res[n].first;
        std::map<int, long> hist;
        if (c.mode == Mode::Sample) {
          if (c.trials < 1) throw Error(ErrorKind::InvalidParameter, "trials must be at least 1");
          hist = sample_counts(dist, c.trials, c.seed);
        }
        for (int n = 0; n <= c.n_probes; ++n) {
          Row row;
          row.outcome = "n=" + std::to_string(n);
          row.count = n;
          row.probability = res[n].first;
          if (c.mode == Mode::Sample) row.sampled = hist[n];
          else row.post_state = res[n].second;
          r.rows.push_back(std::move(row));
        }
        if (c.oracle_check) {
          auto orc = enumerate_probe_paths(m, s, bs, probe, c.n_probes, c.twist);
          double err = 0;
          for (int n = 0; n <= c.n_probes; ++n) {
            double pr = 0;
            TargetState post;
            post.layout = s.layout;
            for (const auto& [key, o] : orc) {
              if (static_cast<int>(std::count(key.begin(), key.end(), '>')) != n) continue;
              pr += o.probability;
              for (const auto& [k, v] : o.post_state.entries) post.entries[k] += v * o.probability;
            }
            err = std::max(err, std::abs(pr - res[n].first));
            if (pr > 1e-9 && res[n].second) err = std::max(err, max_abs_diff(scaled(post, 1 / pr), *res[n].second));
          }
          r.oracle_error = err;
        }
        break;
      }
      case Mode::Asymptotic: {
        std::vector<OutcomeReport> reps;
        if (!c.twist.trivial()) reps = twisted_asymptotic(m, s, bs, probe, c.twist);
        else if (s.layout == Layout::Simple) reps = asymptotic_outcomes(m, s, bs, probe);
        else reps = generalized_asymptotic(m, s, bs, probe);
        for (auto& o : reps) {
          Row row;
          row.outcome = o.label;
          row.probability = o.probability;
          row.post_state = std::move(o.post_state);
          r.rows.push_back(std::move(row));
        }
        break;
      }
      case Mode::FakeTwist: {
        if (!c.phi) throw Error(ErrorKind::InvalidParameter, "fake_twist needs --phi");
        if (s.layout != Layout::Simple) throw Error(ErrorKind::InvalidParameter, "fake_twist needs a Simple target");
        BeamSplitters tuned = tuned_splitters(*c.phi);
        tuned.visibility = c.q;
        for (Outcome o : {Outcome::Horizontal, Outcome::Vertical}) {
          Row row;
          row.outcome = std::string(1, outcome_char(o));
          row.probability = single_probe_probability(m, s, tuned, probe, o);
          if (row.probability >= kMinProbability) row.post_state = single_probe_update(m, s, tuned, probe, o).second;
          r.rows.push_back(std::move(row));
        }
        break;
      }
      case Mode::Partial: {
        if (c.n_probes < 1) throw Error(ErrorKind::InvalidParameter, "n-probes must be at least 1");
        ising::Qubit q = ising::decode_qubit(s);
        Eigen::SelfAdjointEigenSolver<ising::Qubit> es(q);
        if (es.eigenvalues()(0) > 1e-10) throw Error(ErrorKind::NotAState, "partial interferometry needs a pure qubit");
        ising::PureQubit psi = es.eigenvectors().col(1);
        for (int n = 0; n <= c.n_probes; ++n) {
          Row row;
          row.outcome = "n=" + std::to_string(n);
          row.count = n;
          try {
            auto pr = ising::partial_interferometry(psi, bs, c.n_probes, n);
            row.probability = pr.probability;
            row.amplitudes = pr.state;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroProbabilityOutcome) throw;
          }
          r.rows.push_back(std::move(row));
        }
        break;
      }
      case Mode::SampleSize: break;
    }
  } catch (const Error& e) {
    throw in_context(where, e);
  }
  for (const auto& row : r.rows) r.probability_sum += row.probability;
  return r;
}

inline std::string fmt(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

inline std::string to_csv(const RunResult& r) {
  std::ostringstream o;
  o << "# " << kCsvSchema << "\n";
  if (r.sample_size) {
    o << "alpha,delta_p,q,n_min\n"
      << fmt(r.config.alpha) << ',' << fmt(r.config.delta_p) << ',' << fmt(r.config.q) << ',' << *r.sample_size << "\n";
    return o.str();
  }
  o << "outcome,count,probability" << (r.config.mode == Mode::Sample ? ",sampled" : "") << "\n";
  for (const auto& row : r.rows) {
    o << row.outcome << ',' << (row.count >= 0 ? std::to_string(row.count) : "") << ',' << fmt(row.probability);
    if (r.config.mode == Mode::Sample) o << ',' << row.sampled;
    o << "\n";
  }
  return o.str();
}

inline nlohmann::ordered_json complex_json(cplx z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

inline nlohmann::ordered_json state_json(const AnyonModel& m, const TargetState& s) {
  nlohmann::ordered_json j;
  j["layout"] = s.layout == Layout::Simple ? "simple" : "generalized";
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [k, v] : s.entries) {
    if (std::abs(v) < 1e-15) continue;
    nlohmann::ordered_json e;
    auto names = [&](const Labels& x) {
      auto a = nlohmann::ordered_json::array();
      for (Charge c : x) a.push_back(m.name(c));
      return a;
    };
    e["ket"] = names(k.first);
    e["bra"] = names(k.second);
    e["value"] = complex_json(v);
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline std::string to_json(const RunResult& r) {
  const auto& c = r.config;
  nlohmann::ordered_json j;
  j["schema"] = kJsonSchema;
  nlohmann::ordered_json cfg;
  cfg["model"] = r.model_name;
  cfg["mode"] = mode_name(c.mode);
  if (c.mode != Mode::SampleSize) cfg["state"] = c.state;
  cfg["n_probes"] = c.n_probes;
  cfg["twist_lower"] = c.twist.m_lower;
  cfg["twist_upper"] = c.twist.m_upper;
  cfg["variant"] = c.twist.variant == TwistVariant::PureBraid ? "purebraid" : "twist";
  if (c.phi) cfg["phi"] = *c.phi;
  if (c.splitters) cfg["splitters"] = *c.splitters;
  cfg["probe"] = c.probe;
  cfg["q"] = c.q;
  if (c.mode == Mode::SampleSize) {
    cfg["alpha"] = c.alpha;
    cfg["delta_p"] = c.delta_p;
  }
  j["config"] = std::move(cfg);
  if (r.sample_size) j["n_min"] = *r.sample_size;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["outcome"] = row.outcome;
    if (row.count >= 0) o["count"] = row.count;
    o["probability"] = row.probability;
    if (row.sampled >= 0) o["sampled"] = row.sampled;
    if (row.post_state && r.model) o["post_state"] = state_json(*r.model, *row.post_state);
    if (row.amplitudes) o["amplitudes"] = {complex_json((*row.amplitudes)(0)), complex_json((*row.amplitudes)(1))};
    rows.push_back(std::move(o));
  }
  j["outcomes"] = std::move(rows);
  nlohmann::ordered_json meta;
  meta["seed"] = c.seed;
  if (c.mode == Mode::Sample) {
    meta["rng"] = "philox4x32-10";
    meta["trials"] = c.trials;
  }
  meta["probability_sum"] = r.probability_sum;
  meta["probability_tolerance"] = 1e-9;
  if (r.oracle_error) meta["oracle_max_error"] = *r.oracle_error;
  j["metadata"] = std::move(meta);
  return j.dump(2) + "\n";
}

}  // namespace anyonic::cli
