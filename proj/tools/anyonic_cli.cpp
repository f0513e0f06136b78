#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <anyonic/cli.hpp>

using namespace anyonic;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::ZeroProbabilityOutcome:
    case ErrorKind::InconsistentData:
    case ErrorKind::NonModular:
      return kNumericalError;
    default:
      return kConfigError;
  }
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  return bool(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anyonic interferometry experiments"};
  cli::ExperimentConfig c;
  std::string mode = "asymptotic", variant = "twist";
  double phi = 0;
  std::string splitters;
  std::string out;
  app.add_option("--model", c.model, "bundled model name or model file")->capture_default_str();
  app.add_option("--state", c.state, "state file, inline state text (';' for newlines) or qubit:a0,a1");
  app.add_option("--mode", mode, "finite_n | asymptotic | sample | fake_twist | partial | sample_size")
      ->capture_default_str();
  app.add_option("--n-probes", c.n_probes, "number of probes N");
  app.add_option("--twist-lower", c.twist.m_lower, "twists on the lower arm");
  app.add_option("--twist-upper", c.twist.m_upper, "twists on the upper arm");
  app.add_option("--variant", variant, "twist | purebraid")->check(CLI::IsMember({"twist", "purebraid"}));
  auto* phi_opt = app.add_option("--phi", phi, "tuned splitters with t1 r1* r2* t2* e^{i(thI-thII)} = e^{i phi}/4");
  auto* bs_opt = app.add_option("--splitters", splitters, "t1,r1,t2,r2,theta_I,theta_II");
  app.add_option("--probe", c.probe, "probe charge or distribution, e.g. sigma or sigma:0.5,psi:0.5");
  app.add_option("--q", c.q, "visibility factor in (0, 1]")->capture_default_str();
  app.add_option("--trials", c.trials, "sample trials");
  app.add_option("--seed", c.seed, "64-bit RNG seed")->capture_default_str();
  app.add_flag("--oracle-check", c.oracle_check, "cross-check finite_n against the diagram oracle");
  app.add_option("--alpha", c.alpha, "significance level for sample_size")->capture_default_str();
  app.add_option("--delta-p", c.delta_p, "probe-factor gap for sample_size");
  app.add_option("--out", out, "output prefix; writes <prefix>.csv and <prefix>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    c.mode = cli::parse_mode(mode);
    c.twist.variant = variant == "purebraid" ? TwistVariant::PureBraid : TwistVariant::TwistOperator;
    if (*phi_opt) c.phi = phi;
    if (*bs_opt) c.splitters = splitters;
    if (c.mode != cli::Mode::SampleSize && c.state.empty())
      throw Error(ErrorKind::InvalidParameter, "--state is required");
    AnyonModel m;
    try {
      m = cli::load_model(c.model);
    } catch (const Error& e) {
      throw cli::in_context("model", e);
    }
    cli::RunResult r = cli::run(c, m);

    std::string csv = cli::to_csv(r), json = cli::to_json(r);
    if (out.empty()) {
      std::cout << csv;
    } else if (!write_file(out + ".csv", csv) || !write_file(out + ".json", json)) {
      std::cerr << "error: cannot write " << out << ".csv/.json\n";
      return kConfigError;
    }

    if (std::abs(r.probability_sum - 1.0) > 1e-9) {
      std::cerr << "error: probabilities sum to " << r.probability_sum << "\n";
      return kNumericalError;
    }
    if (r.oracle_error) {
      std::cerr << "oracle check: max deviation " << *r.oracle_error << "\n";
      if (*r.oracle_error > 1e-9) return kNumericalError;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
