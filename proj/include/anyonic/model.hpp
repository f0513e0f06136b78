#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "types.hpp"

namespace anyonic {

using Charge = int;

// Raw model input: charge names (vacuum first), duals, fusion table and the
// F and R symbols that are not equal to 1. Admissible symbols that are absent
// default to 1.
struct ModelData {
  std::string name;
  std::vector<std::string> charges;
  std::vector<int> dual;
  // fusion[{a,b}] lists the channels c of a x b (a repeated channel means N > 1).
  std::map<std::pair<int, int>, std::vector<int>> fusion;
  // (a,b,c,d,e,f) -> [F^{abc}_d]_{ef}
  std::map<std::array<int, 6>, cplx> f_symbols;
  // (a,b,c) -> R^{ab}_c
  std::map<std::array<int, 3>, cplx> r_symbols;
};

struct VerificationReport {
  double pentagon_error = 0;
  double hexagon_error = 0;
  double f_unitarity_error = 0;
  double s_unitarity_error = 0;
};

class AnyonModel {
 public:
  AnyonModel() = default;

  // Validates the data and populates every derived quantity.
  static AnyonModel build(const ModelData& data, double tol = kTol) {
    AnyonModel m;
    m.name_ = data.name;
    m.names_ = data.charges;
    const int r = static_cast<int>(m.names_.size());
    if (r == 0) throw Error(ErrorKind::InconsistentData, "model has no charges");
    m.rank_ = r;
    for (int i = 0; i < r; ++i) m.index_[m.names_[i]] = i;
    if (static_cast<int>(m.index_.size()) != r)
      throw Error(ErrorKind::InconsistentData, "duplicate charge names");

    m.dual_ = data.dual;
    if (static_cast<int>(m.dual_.size()) != r) {
      throw Error(ErrorKind::InconsistentData, "dual table has wrong size");
    }
    for (int a = 0; a < r; ++a) {
      int b = m.dual_[a];
      if (b < 0 || b >= r || m.dual_[b] != a)
        throw Error(ErrorKind::InconsistentData, "conjugation is not an involution");
    }
    if (m.dual_[0] != 0) throw Error(ErrorKind::InconsistentData, "vacuum must be self-dual");

    m.N_.assign(r * r * r, 0);
    for (int a = 0; a < r; ++a) {
      m.N_[m.nidx(0, a, a)] = 1;
      m.N_[m.nidx(a, 0, a)] = 1;
    }
    for (const auto& [ab, cs] : data.fusion) {
      auto [a, b] = ab;
      m.check_index(a);
      m.check_index(b);
      std::map<int, int> count;
      for (int c : cs) {
        m.check_index(c);
        ++count[c];
      }
      for (auto [c, n] : count) {
        if (n > 1)
          throw Error(ErrorKind::MultiplicityUnsupported,
                      m.names_[a] + " x " + m.names_[b] + " -> " + m.names_[c]);
        int& slot = m.N_[m.nidx(a, b, c)];
        int& mirror = m.N_[m.nidx(b, a, c)];
        slot = 1;
        mirror = 1;
      }
    }
    m.check_fusion();

    // Symbols: fill defaults, then overwrite with supplied values.
    m.F_.assign(static_cast<size_t>(r) * r * r * r * r * r, cplx(0));
    m.R_.assign(static_cast<size_t>(r) * r * r, cplx(0));
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          for (int d = 0; d < r; ++d)
            for (int e = 0; e < r; ++e)
              for (int f = 0; f < r; ++f)
                if (m.f_admissible(a, b, c, d, e, f)) m.F_[m.fidx(a, b, c, d, e, f)] = 1.0;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          if (m.Nabc(a, b, c)) m.R_[m.ridx(a, b, c)] = 1.0;
    for (const auto& [k, v] : data.f_symbols) {
      for (int x : k) m.check_index(x);
      if (!m.f_admissible(k[0], k[1], k[2], k[3], k[4], k[5]))
        throw Error(ErrorKind::InconsistentData, "F symbol given for inadmissible labels");
      m.F_[m.fidx(k[0], k[1], k[2], k[3], k[4], k[5])] = v;
    }
    for (const auto& [k, v] : data.r_symbols) {
      for (int x : k) m.check_index(x);
      if (!m.Nabc(k[0], k[1], k[2]))
        throw Error(ErrorKind::InconsistentData, "R symbol given for inadmissible labels");
      m.R_[m.ridx(k[0], k[1], k[2])] = v;
    }

    m.report_.f_unitarity_error = m.f_unitarity_error();
    m.report_.pentagon_error = m.pentagon_error();
    m.report_.hexagon_error = m.hexagon_error();
    if (m.report_.f_unitarity_error > tol)
      throw Error(ErrorKind::InconsistentData, "F blocks are not unitary");
    if (m.report_.pentagon_error > tol)
      throw Error(ErrorKind::InconsistentData,
                  "pentagon fails (max error " + std::to_string(m.report_.pentagon_error) + ")");
    if (m.report_.hexagon_error > tol)
      throw Error(ErrorKind::InconsistentData,
                  "hexagon fails (max error " + std::to_string(m.report_.hexagon_error) + ")");

    m.derive();
    m.report_.s_unitarity_error = (m.S_ * m.S_.adjoint() - MatrixXc::Identity(r, r)).cwiseAbs().maxCoeff();
    if (m.report_.s_unitarity_error > tol) throw Error(ErrorKind::NonModular, "S is not unitary");
    return m;
  }

  const std::string& model_name() const { return name_; }
  int rank() const { return rank_; }
  Charge vacuum() const { return 0; }
  const std::string& name(Charge a) const { return names_.at(a); }
  const std::vector<std::string>& names() const { return names_; }

  Charge charge(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw Error(ErrorKind::UnknownCharge, label);
    return it->second;
  }

  bool has_charge(const std::string& label) const { return index_.count(label) > 0; }

  Charge dual(Charge a) const { return dual_.at(a); }

  int Nabc(Charge a, Charge b, Charge c) const { return N_[nidx(a, b, c)]; }

  std::vector<Charge> fuse(Charge a, Charge b) const {
    std::vector<Charge> out;
    for (int c = 0; c < rank_; ++c)
      if (Nabc(a, b, c)) out.push_back(c);
    return out;
  }

  bool f_admissible(int a, int b, int c, int d, int e, int f) const {
    return Nabc(a, b, e) && Nabc(e, c, d) && Nabc(b, c, f) && Nabc(a, f, d);
  }

  // [F^{abc}_d]_{ef}; zero when the labels are not admissible.
  cplx F(int a, int b, int c, int d, int e, int f) const { return F_[fidx(a, b, c, d, e, f)]; }

  // R^{ab}_c; zero when c is not in a x b.
  cplx R(int a, int b, int c) const { return R_[ridx(a, b, c)]; }

  double d(Charge a) const { return d_.at(a); }
  double total_dim() const { return D_; }
  cplx theta(Charge a) const { return theta_.at(a); }
  const MatrixXc& S() const { return S_; }
  const MatrixXc& T() const { return T_; }
  const MatrixXc& M() const { return M_; }
  const VerificationReport& report() const { return report_; }

  // sum_a theta_a^m S_{0a} conj(S_{ax}) for a in the set.
  std::vector<cplx> omega_coefficients(const std::set<Charge>& set) const {
    if (set.empty()) throw Error(ErrorKind::InvalidParameter, "empty charge set");
    std::vector<cplx> out(rank_, 0.0);
    for (Charge a : set) {
      check_index(a);
      for (int x = 0; x < rank_; ++x) out[x] += S_(0, a) * std::conj(S_(a, x));
    }
    return out;
  }

  std::vector<cplx> tau_coefficients(long m) const {
    std::vector<cplx> out(rank_, 0.0);
    for (int a = 0; a < rank_; ++a) {
      cplx w = ipow(theta_[a], m) * S_(0, a);
      for (int x = 0; x < rank_; ++x) out[x] += w * std::conj(S_(a, x));
    }
    return out;
  }

  void check_index(int a) const {
    if (a < 0 || a >= rank_) throw Error(ErrorKind::UnknownCharge, "charge index " + std::to_string(a));
  }

 private:
  size_t nidx(int a, int b, int c) const { return (static_cast<size_t>(a) * rank_ + b) * rank_ + c; }
  size_t ridx(int a, int b, int c) const { return nidx(a, b, c); }
  size_t fidx(int a, int b, int c, int d, int e, int f) const {
    size_t r = rank_;
    return ((((static_cast<size_t>(a) * r + b) * r + c) * r + d) * r + e) * r + f;
  }

  void check_fusion() const {
    const int r = rank_;
    for (int a = 0; a < r; ++a) {
      for (int b = 0; b < r; ++b) {
        bool any = false;
        for (int c = 0; c < r; ++c) {
          if (Nabc(a, b, c) != Nabc(b, a, c))
            throw Error(ErrorKind::InconsistentData, "fusion is not commutative");
          any = any || Nabc(a, b, c);
        }
        if (!any) throw Error(ErrorKind::InconsistentData, "empty fusion product");
        if (Nabc(0, a, b) != (a == b ? 1 : 0))
          throw Error(ErrorKind::InconsistentData, "fusion with the vacuum must be trivial");
        if (Nabc(a, b, 0) != (b == dual_[a] ? 1 : 0))
          throw Error(ErrorKind::InconsistentData, "vacuum channel does not match duals");
      }
    }
    // associativity of the fusion ring
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          for (int d = 0; d < r; ++d) {
            int left = 0, right = 0;
            for (int e = 0; e < r; ++e) {
              left += Nabc(a, b, e) * Nabc(e, c, d);
              right += Nabc(b, c, e) * Nabc(a, e, d);
            }
            if (left != right) throw Error(ErrorKind::InconsistentData, "fusion is not associative");
          }
  }

  double f_unitarity_error() const {
    const int r = rank_;
    double err = 0;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          for (int d = 0; d < r; ++d) {
            std::vector<int> es, fs;
            for (int e = 0; e < r; ++e)
              if (Nabc(a, b, e) && Nabc(e, c, d)) es.push_back(e);
            for (int f = 0; f < r; ++f)
              if (Nabc(b, c, f) && Nabc(a, f, d)) fs.push_back(f);
            if (es.size() != fs.size()) return 1e300;
            if (es.empty()) continue;
            MatrixXc blk(es.size(), fs.size());
            for (size_t i = 0; i < es.size(); ++i)
              for (size_t j = 0; j < fs.size(); ++j) blk(i, j) = F(a, b, c, d, es[i], fs[j]);
            MatrixXc id = MatrixXc::Identity(es.size(), es.size());
            err = std::max(err, (blk * blk.adjoint() - id).cwiseAbs().maxCoeff());
          }
    return err;
  }

  // [F^{fcd}_e]_{gl}[F^{abl}_e]_{fk} = sum_h [F^{abc}_g]_{fh}[F^{ahd}_e]_{gk}[F^{bcd}_k]_{hl}
  double pentagon_error() const {
    const int r = rank_;
    double err = 0;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          for (int d = 0; d < r; ++d)
            for (int e = 0; e < r; ++e)
              for (int f : fuse(a, b))
                for (int g : fuse(f, c))
                  for (int l : fuse(c, d)) {
                    if (!Nabc(g, d, e) || !Nabc(f, l, e)) continue;
                    for (int k : fuse(b, l)) {
                      if (!Nabc(a, k, e)) continue;
                      cplx lhs = F(f, c, d, e, g, l) * F(a, b, l, e, f, k);
                      cplx rhs = 0;
                      for (int h : fuse(b, c)) rhs += F(a, b, c, g, f, h) * F(a, h, d, e, g, k) * F(b, c, d, k, h, l);
                      err = std::max(err, std::abs(lhs - rhs));
                    }
                  }
    return err;
  }

  // Hexagons in the form matching the left-nested braid action used by the
  // chain code: moving c leftwards past the pair (a b)_e, counterclockwise and
  // clockwise.
  double hexagon_error() const {
    const int r = rank_;
    double err = 0;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          for (int d = 0; d < r; ++d)
            for (int e : fuse(a, b)) {
              if (!Nabc(e, c, d)) continue;
              for (int g : fuse(c, a)) {
                if (!Nabc(g, b, d)) continue;
                cplx lhs = R(e, c, d) * std::conj(F(c, a, b, d, g, e));
                cplx rhs = 0;
                for (int f : fuse(b, c)) rhs += F(a, b, c, d, e, f) * R(b, c, f) * std::conj(F(a, c, b, d, g, f));
                rhs *= R(a, c, g);
                err = std::max(err, std::abs(lhs - rhs));
                cplx lhs2 = std::conj(R(c, e, d)) * std::conj(F(c, a, b, d, g, e));
                cplx rhs2 = 0;
                for (int f : fuse(b, c))
                  rhs2 += F(a, b, c, d, e, f) * std::conj(R(c, b, f)) * std::conj(F(a, c, b, d, g, f));
                rhs2 *= std::conj(R(c, a, g));
                err = std::max(err, std::abs(lhs2 - rhs2));
              }
            }
    return err;
  }

  void derive() {
    const int r = rank_;
    d_.assign(r, 1.0);
    for (int a = 0; a < r; ++a) {
      Eigen::MatrixXd Na(r, r);
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c) Na(b, c) = Nabc(a, b, c);
      Eigen::EigenSolver<Eigen::MatrixXd> es(Na);
      double best = 0;
      for (int i = 0; i < r; ++i) best = std::max(best, es.eigenvalues()[i].real());
      d_[a] = best;
    }
    double sum = 0;
    for (double x : d_) sum += x * x;
    D_ = std::sqrt(sum);

    theta_.assign(r, 1.0);
    for (int a = 0; a < r; ++a) {
      cplx t = 0;
      for (int c : fuse(a, a)) t += d_[c] * R(a, a, c);
      theta_[a] = t / d_[a];
    }
    for (int a = 0; a < r; ++a) {
      if (std::abs(std::abs(theta_[a]) - 1.0) > 1e-10)
        throw Error(ErrorKind::InconsistentData, "topological spin of " + names_[a] + " is not a phase");
    }

    S_ = MatrixXc::Zero(r, r);
    M_ = MatrixXc::Zero(r, r);
    T_ = MatrixXc::Zero(r, r);
    for (int a = 0; a < r; ++a) {
      T_(a, a) = theta_[a];
      for (int b = 0; b < r; ++b) {
        cplx tr = 0;
        for (int c : fuse(a, b)) tr += d_[c] * theta_[c] / (theta_[a] * theta_[b]);
        S_(a, b) = tr / D_;
        M_(a, b) = tr / (d_[a] * d_[b]);
      }
    }
  }

  std::string name_;
  int rank_ = 0;
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  std::vector<int> dual_;
  std::vector<int> N_;
  std::vector<cplx> F_;
  std::vector<cplx> R_;
  std::vector<double> d_;
  double D_ = 1;
  std::vector<cplx> theta_;
  MatrixXc S_, T_, M_;
  VerificationReport report_;
};

// The Z2-graded S and T^2 data of the nu = 1/2 Moore-Read state. It supports
// matrix queries only.
struct Z2GradedModel {
  std::vector<std::pair<std::string, std::string>> doublets;
  MatrixXc s_matrix;
  MatrixXc t_squared;
};

}  // namespace anyonic
