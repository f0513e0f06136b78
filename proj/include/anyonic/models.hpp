#pragma once

#include <cmath>
#include <numeric>
#include <string>

#include "model.hpp"

namespace anyonic::models {

inline AnyonModel trivial() {
  ModelData m;
  m.name = "trivial";
  m.charges = {"I"};
  m.dual = {0};
  return AnyonModel::build(m);
}

// Ising-type model with theta_sigma = exp(i pi nu / 8) for odd nu. nu = 1 is
// Ising, nu = 3 is SU(2)_2. Charges are ordered (I, sigma, psi).
inline AnyonModel ising_family(int nu, const std::string& name,
                               const std::array<std::string, 3>& labels = {"I", "sigma", "psi"}) {
  if (nu % 2 == 0) throw Error(ErrorKind::InvalidParameter, "nu must be odd");
  nu = ((nu % 16) + 16) % 16;
  const double kappa = (((nu * nu - 1) / 8) % 2 == 0) ? 1.0 : -1.0;
  const int I = 0, s = 1, p = 2;
  ModelData m;
  m.name = name;
  m.charges = {labels[0], labels[1], labels[2]};
  m.dual = {0, 1, 2};
  m.fusion[{s, s}] = {I, p};
  m.fusion[{s, p}] = {s};
  m.fusion[{p, s}] = {s};
  m.fusion[{p, p}] = {I};
  const double h = kappa / std::sqrt(2.0);
  m.f_symbols[{s, s, s, s, I, I}] = h;
  m.f_symbols[{s, s, s, s, I, p}] = h;
  m.f_symbols[{s, s, s, s, p, I}] = h;
  m.f_symbols[{s, s, s, s, p, p}] = -h;
  m.f_symbols[{s, p, s, p, s, s}] = -1.0;
  m.f_symbols[{p, s, p, s, s, s}] = -1.0;
  const double u = kPi * nu / 8.0;
  m.r_symbols[{s, s, I}] = kappa * expi(-u);
  m.r_symbols[{s, s, p}] = kappa * expi(3.0 * u);
  m.r_symbols[{s, p, s}] = expi(-4.0 * u);
  m.r_symbols[{p, s, s}] = expi(-4.0 * u);
  m.r_symbols[{p, p, I}] = -1.0;
  return AnyonModel::build(m);
}

inline AnyonModel ising() { return ising_family(1, "ising"); }

// The n-th Galois conjugate, theta_sigma = exp(i (2n+1) pi / 8), n = 0..7.
inline AnyonModel ising_conjugate(int n) {
  return ising_family(2 * n + 1, "ising_conjugate_" + std::to_string(((n % 8) + 8) % 8));
}

inline AnyonModel su2_2() { return ising_family(3, "su2_2", {"0", "1/2", "1"}); }

inline AnyonModel fibonacci() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  ModelData m;
  m.name = "fibonacci";
  m.charges = {"I", "tau"};
  m.dual = {0, 1};
  m.fusion[{1, 1}] = {0, 1};
  m.f_symbols[{1, 1, 1, 1, 0, 0}] = 1.0 / phi;
  m.f_symbols[{1, 1, 1, 1, 0, 1}] = 1.0 / std::sqrt(phi);
  m.f_symbols[{1, 1, 1, 1, 1, 0}] = 1.0 / std::sqrt(phi);
  m.f_symbols[{1, 1, 1, 1, 1, 1}] = -1.0 / phi;
  m.r_symbols[{1, 1, 0}] = expi(-4.0 * kPi / 5.0);
  m.r_symbols[{1, 1, 1}] = expi(3.0 * kPi / 5.0);
  return AnyonModel::build(m);
}

// Z_N with trivial F and R^{ab} = exp(2 pi i k a b / N). Modular for odd N
// and k coprime to N.
inline AnyonModel zn(int n, int k = 1) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "N must be positive");
  ModelData m;
  m.name = "z" + std::to_string(n) + (k == 1 ? "" : "_k" + std::to_string(k));
  for (int a = 0; a < n; ++a) {
    m.charges.push_back(std::to_string(a));
    m.dual.push_back((n - a) % n);
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      m.fusion[{a, b}] = {(a + b) % n};
      m.r_symbols[{a, b, (a + b) % n}] = expi(2.0 * kPi * k * a * b / n);
    }
  return AnyonModel::build(m);
}

// nu = 1/2 Moore-Read doublet data. Order: (I0,psi2) (psi0,I2)
// (sigma1/2,sigma5/2) (I1,psi3) (psi1,I3) (sigma3/2,sigma7/2).
inline Z2GradedModel moore_read_half() {
  Z2GradedModel m;
  m.doublets = {{"I_0", "psi_2"},       {"psi_0", "I_2"}, {"sigma_1/2", "sigma_5/2"},
                {"I_1", "psi_3"},       {"psi_1", "I_3"}, {"sigma_3/2", "sigma_7/2"}};
  const double r2 = std::sqrt(2.0);
  const cplx i = kI;
  m.s_matrix = MatrixXc(6, 6);
  m.s_matrix << 1, 1, r2, 1, 1, r2,
                1, 1, -r2, 1, 1, -r2,
                r2, -r2, 0, i * r2, -i * r2, 0,
                1, 1, i * r2, -1, -1, -i * r2,
                1, 1, -i * r2, -1, -1, i * r2,
                r2, -r2, 0, -i * r2, i * r2, 0;
  m.s_matrix /= std::sqrt(8.0);
  m.t_squared = MatrixXc::Zero(6, 6);
  const cplx diag[6] = {1.0, 1.0, i, -1.0, -1.0, i};
  for (int k = 0; k < 6; ++k) m.t_squared(k, k) = diag[k];
  return m;
}

// Number of twists needed for magic-state generation in an odd-denominator
// nu = p/q Ising-type state.
inline int odd_denominator_twists(int q) {
  if (q <= 0 || q % 2 == 0) throw Error(ErrorKind::InvalidParameter, "q must be a positive odd integer");
  return 2 * q;
}

inline AnyonModel by_name(const std::string& name) {
  if (name == "ising") return ising();
  if (name == "su2_2") return su2_2();
  if (name == "fibonacci") return fibonacci();
  if (name == "trivial") return trivial();
  if (name.rfind("ising_conjugate_", 0) == 0) return ising_conjugate(std::stoi(name.substr(16)));
  if (name.size() > 1 && name[0] == 'z' && std::isdigit(static_cast<unsigned char>(name[1])))
    return zn(std::stoi(name.substr(1)));
  throw Error(ErrorKind::InvalidParameter, "unknown bundled model " + name);
}

}  // namespace anyonic::models
