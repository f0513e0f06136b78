#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "types.hpp"

namespace anyonic {

// Philox4x32-10 (Salmon et al.), counter-based: output is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Counter = std::array<uint32_t, 4>;
  using Key = std::array<uint32_t, 2>;

  static Counter block(Counter c, Key k) {
    for (int round = 0; round < 10; ++round) {
      if (round) {
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
      }
      uint64_t p0 = uint64_t(0xD2511F53u) * c[0];
      uint64_t p1 = uint64_t(0xCD9E8D57u) * c[2];
      c = {uint32_t(p1 >> 32) ^ c[1] ^ k[0], uint32_t(p1), uint32_t(p0 >> 32) ^ c[3] ^ k[1], uint32_t(p0)};
    }
    return c;
  }

  Philox4x32(uint64_t seed, uint64_t stream) : key_{uint32_t(seed), uint32_t(seed >> 32)}, stream_(stream) {}

  uint32_t next() {
    if (pos_ == 4) {
      buf_ = block({uint32_t(index_), uint32_t(index_ >> 32), uint32_t(stream_), uint32_t(stream_ >> 32)}, key_);
      ++index_;
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  // 53-bit uniform in [0, 1)
  double uniform() {
    uint64_t hi = next() >> 5, lo = next() >> 6;
    return (hi * 67108864.0 + lo) * (1.0 / 9007199254740992.0);
  }

 private:
  Key key_;
  uint64_t stream_;
  uint64_t index_ = 0;
  Counter buf_{};
  int pos_ = 4;
};

// Two-sided normal quantile z*_{alpha/2} = sqrt(2) erfinv(1 - alpha).
inline double z_star(double alpha) { return std::sqrt(2.0) * boost::math::erf_inv(1.0 - alpha); }

// ceil((z* / (q dp))^2), clamped to at least one probe.
inline long estimate_sample_size(double alpha, double delta_p, double q = 1.0) {
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0, 1)");
  if (!(delta_p > 0)) throw Error(ErrorKind::InvalidParameter, "delta_p must be positive");
  if (!(q > 0 && q <= 1)) throw Error(ErrorKind::InvalidParameter, "q must lie in (0, 1]");
  double x = z_star(alpha) / (q * delta_p);
  return std::max(1L, static_cast<long>(std::ceil(x * x)));
}

// Inverse-CDF sampling; trial t draws from stream t so trials are independent of ordering.
inline std::map<int, long> sample_counts(const std::map<int, double>& distribution, long trials, uint64_t seed) {
  if (trials < 0) throw Error(ErrorKind::InvalidParameter, "trials must be non-negative");
  double sum = 0;
  for (auto [n, p] : distribution) {
    if (p < -1e-12) throw Error(ErrorKind::InvalidDistribution, "negative probability");
    sum += std::max(p, 0.0);
  }
  if (distribution.empty() || std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidDistribution, "probabilities do not sum to 1");
  std::vector<std::pair<int, double>> cdf;
  double acc = 0;
  for (auto [n, p] : distribution) {
    acc += std::max(p, 0.0) / sum;
    cdf.push_back({n, acc});
  }
  std::map<int, long> hist;
  for (auto [n, p] : distribution) hist[n] = 0;
  for (long t = 0; t < trials; ++t) {
    double u = Philox4x32(seed, static_cast<uint64_t>(t)).uniform();
    size_t k = 0;
    while (k + 1 < cdf.size() && (u >= cdf[k].second || distribution.at(cdf[k].first) <= 0)) ++k;
    ++hist[cdf[k].first];
  }
  return hist;
}

inline std::map<int, long> sample_counts(const std::vector<double>& distribution, long trials, uint64_t seed) {
  std::map<int, double> d;
  for (size_t n = 0; n < distribution.size(); ++n) d[static_cast<int>(n)] = distribution[n];
  return sample_counts(d, trials, seed);
}

}  // namespace anyonic
