#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "model.hpp"

namespace anyonic {

using SpMat = Eigen::SparseMatrix<cplx>;

// Where a leaf sits relative to the two interferometer arms.
enum class Tag { Above, Between, Below };

struct Leaf {
  std::vector<Charge> charges;
  Tag tag = Tag::Between;
};

// Left-nested fusion-tree basis: x_0 = l_0, x_k = (x_{k-1} l_k), total = x_{n-1}.
// A basis element stores the leaf charges followed by the intermediates.
class ChainBasis {
 public:
  ChainBasis() = default;

  ChainBasis(const AnyonModel& m, std::vector<Leaf> leaves) : leaves_(std::move(leaves)) {
    const int n = static_cast<int>(leaves_.size());
    std::vector<int> cur(2 * n);
    if (n > 0) grow(m, 0, cur);
    for (size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = static_cast<int>(i);
  }

  int size() const { return static_cast<int>(states_.size()); }
  int n_leaves() const { return static_cast<int>(leaves_.size()); }
  const std::vector<Leaf>& leaves() const { return leaves_; }
  const std::vector<int>& state(int i) const { return states_[i]; }
  int leaf(int i, int k) const { return states_[i][k]; }
  int inter(int i, int k) const { return states_[i][n_leaves() + k]; }
  int total(int i) const { return inter(i, n_leaves() - 1); }

  int find(const std::vector<int>& s) const {
    auto it = index_.find(s);
    return it == index_.end() ? -1 : it->second;
  }

 private:
  void grow(const AnyonModel& m, int k, std::vector<int>& cur) {
    const int n = n_leaves();
    for (int l : leaves_[k].charges) {
      cur[k] = l;
      if (k == 0) {
        cur[n] = l;
        if (n == 1) states_.push_back(cur);
        else grow(m, 1, cur);
        continue;
      }
      for (int x : m.fuse(cur[n + k - 1], l)) {
        cur[n + k] = x;
        if (k == n - 1) states_.push_back(cur);
        else grow(m, k + 1, cur);
      }
    }
  }

  std::vector<Leaf> leaves_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, int> index_;
};

inline SpMat to_sparse(int rows, int cols, const std::vector<Eigen::Triplet<cplx>>& t) {
  SpMat s(rows, cols);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

// Exchange of leaves i and i+1. sign = +1 is counterclockwise (the left leaf
// passes below), sign = -1 the inverse.
inline std::pair<ChainBasis, SpMat> exchange(const AnyonModel& m, const ChainBasis& in, int i, int sign) {
  const int n = in.n_leaves();
  if (i < 0 || i + 1 >= n) throw Error(ErrorKind::InvalidParameter, "exchange position out of range");
  std::vector<Leaf> leaves = in.leaves();
  std::swap(leaves[i], leaves[i + 1]);
  ChainBasis out(m, leaves);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int col = 0; col < in.size(); ++col) {
    const auto& s = in.state(col);
    const int li = s[i], lj = s[i + 1];
    std::vector<int> t = s;
    t[i] = lj;
    t[i + 1] = li;
    auto rsym = [&](int y) { return sign > 0 ? m.R(li, lj, y) : std::conj(m.R(lj, li, y)); };
    if (i == 0) {
      t[n] = lj;
      int row = out.find(t);
      trip.emplace_back(row, col, rsym(s[n + 1]));
      continue;
    }
    const int xl = s[n + i - 1], xi = s[n + i], xr = s[n + i + 1];
    for (int xp : m.fuse(xl, lj)) {
      if (!m.Nabc(xp, li, xr)) continue;
      cplx amp = 0;
      for (int y : m.fuse(li, lj)) {
        if (!m.Nabc(xl, y, xr)) continue;
        amp += m.F(xl, li, lj, xr, xi, y) * rsym(y) * std::conj(m.F(xl, lj, li, xr, xp, y));
      }
      if (amp == cplx(0)) continue;
      t[n + i] = xp;
      trip.emplace_back(out.find(t), col, amp);
    }
  }
  return {out, to_sparse(out.size(), in.size(), trip)};
}

// Quantum partial trace of the last leaf, for density matrices stored as
// coefficients rho_ij (the operator is sum rho_ij / d_total |i><j|).
inline std::pair<ChainBasis, MatrixXc> trace_last(const AnyonModel& m, const ChainBasis& in, const MatrixXc& rho) {
  const int n = in.n_leaves();
  if (n < 2) throw Error(ErrorKind::InvalidParameter, "cannot trace the only leaf");
  std::vector<Leaf> leaves(in.leaves().begin(), in.leaves().end() - 1);
  ChainBasis out(m, leaves);
  MatrixXc r = MatrixXc::Zero(out.size(), out.size());
  std::vector<int> proj(in.size());
  for (int i = 0; i < in.size(); ++i) {
    const auto& s = in.state(i);
    std::vector<int> t;
    t.insert(t.end(), s.begin(), s.begin() + n - 1);
    t.insert(t.end(), s.begin() + n, s.begin() + 2 * n - 1);
    proj[i] = out.find(t);
  }
  for (int i = 0; i < in.size(); ++i)
    for (int j = 0; j < in.size(); ++j) {
      if (rho(i, j) == cplx(0)) continue;
      const auto& si = in.state(i);
      const auto& sj = in.state(j);
      if (si[n - 1] != sj[n - 1] || si[2 * n - 1] != sj[2 * n - 1] || si[2 * n - 2] != sj[2 * n - 2]) continue;
      r(proj[i], proj[j]) += rho(i, j);
    }
  return {out, r};
}

// Coefficients of |(P_p, R_q; g)> in the combined left-nested basis: for each
// combined state, the chain of F-moves that re-brackets the right factor.
inline std::pair<ChainBasis, MatrixXc> tensor(const AnyonModel& m, const ChainBasis& L, const MatrixXc& rl,
                                              const ChainBasis& R, const MatrixXc& rr) {
  std::vector<Leaf> leaves = L.leaves();
  leaves.insert(leaves.end(), R.leaves().begin(), R.leaves().end());
  ChainBasis out(m, leaves);
  const int nl = L.n_leaves(), nr = R.n_leaves(), n = nl + nr;
  // split each combined state into (left index, right index, coefficient)
  struct Part {
    int l, r;
    cplx c;
  };
  std::vector<std::vector<Part>> parts(out.size());
  std::vector<int> sl(2 * nl), sr(2 * nr);
  for (int i = 0; i < out.size(); ++i) {
    const auto& s = out.state(i);
    for (int k = 0; k < nl; ++k) {
      sl[k] = s[k];
      sl[nl + k] = s[n + k];
    }
    const int p = s[n + nl - 1];
    std::vector<int> y(nr);
    for (int k = 0; k < nr; ++k) {
      sr[k] = s[nl + k];
      y[k] = s[n + nl + k];
    }
    int li = L.find(sl);
    if (li < 0) continue;
    // enumerate right intermediates q_k compatible with the y chain
    std::vector<int> q(nr);
    std::function<void(int, cplx)> rec = [&](int k, cplx c) {
      if (k == nr) {
        for (int j = 0; j < nr; ++j) sr[nr + j] = q[j];
        int ri = R.find(sr);
        if (ri >= 0) parts[i].push_back({li, ri, c});
        return;
      }
      if (k == 0) {
        q[0] = sr[0];
        if (!m.Nabc(p, q[0], y[0])) return;
        rec(1, c);
        return;
      }
      for (int qk : m.fuse(q[k - 1], sr[k])) {
        if (!m.Nabc(p, qk, y[k])) continue;
        cplx f = std::conj(m.F(p, q[k - 1], sr[k], y[k], y[k - 1], qk));
        if (f == cplx(0)) continue;
        q[k] = qk;
        rec(k + 1, c * f);
      }
    };
    rec(0, 1.0);
  }
  MatrixXc r = MatrixXc::Zero(out.size(), out.size());
  for (int i = 0; i < out.size(); ++i)
    for (int j = 0; j < out.size(); ++j) {
      if (out.total(i) != out.total(j)) continue;
      const double dg = m.d(out.total(i));
      cplx acc = 0;
      for (const auto& a : parts[i])
        for (const auto& b : parts[j]) {
          cplx v = rl(a.l, b.l) * rr(a.r, b.r);
          if (v == cplx(0)) continue;
          acc += v * a.c * std::conj(b.c) * dg / (m.d(L.total(a.l)) * m.d(R.total(a.r)));
        }
      r(i, j) = acc;
    }
  return {out, r};
}

// Isometry inserting a vacuum-channel pair (x, xbar) after leaf k (k = 0
// means at the front).
inline std::pair<ChainBasis, SpMat> insert_pair(const AnyonModel& m, const ChainBasis& in, int k, Charge x,
                                                Tag tag_x, Tag tag_xbar) {
  const int n = in.n_leaves();
  const Charge xb = m.dual(x);
  std::vector<Leaf> leaves = in.leaves();
  leaves.insert(leaves.begin() + k, Leaf{{xb}, tag_xbar});
  leaves.insert(leaves.begin() + k, Leaf{{x}, tag_x});
  ChainBasis out(m, leaves);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int col = 0; col < in.size(); ++col) {
    const auto& s = in.state(col);
    std::vector<int> t;
    t.insert(t.end(), s.begin(), s.begin() + k);
    t.push_back(x);
    t.push_back(xb);
    t.insert(t.end(), s.begin() + k, s.begin() + n);
    std::vector<int> inter(s.begin() + n, s.end());
    if (k == 0) {
      std::vector<int> ti = {x, 0};
      ti.insert(ti.end(), inter.begin(), inter.end());
      std::vector<int> full = t;
      full.insert(full.end(), ti.begin(), ti.end());
      int row = out.find(full);
      trip.emplace_back(row, col, 1.0);
      continue;
    }
    const int xk = inter[k - 1];
    for (int u : m.fuse(xk, x)) {
      if (!m.Nabc(u, xb, xk)) continue;
      cplx c = std::conj(m.F(xk, x, xb, xk, u, 0));
      if (c == cplx(0)) continue;
      std::vector<int> ti(inter.begin(), inter.begin() + k);
      ti.push_back(u);
      ti.push_back(xk);
      ti.insert(ti.end(), inter.begin() + k, inter.end());
      std::vector<int> full = t;
      full.insert(full.end(), ti.begin(), ti.end());
      trip.emplace_back(out.find(full), col, c);
    }
  }
  return {out, to_sparse(out.size(), in.size(), trip)};
}

// Dense version of a chain density matrix transformed by a sparse operator.
inline MatrixXc sandwich(const SpMat& a, const MatrixXc& rho, const SpMat& b) {
  MatrixXc left = a * rho;
  return (b * left.adjoint()).adjoint();
}

}  // namespace anyonic
