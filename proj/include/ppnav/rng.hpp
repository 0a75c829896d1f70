#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace ppnav {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Counter based, so every stream and every coin is addressable without state.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k[0] += W0;
      k[1] += W1;
    }
    const std::uint64_t p0 = std::uint64_t(M0) * c[0];
    const std::uint64_t p1 = std::uint64_t(M1) * c[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Key of the stream (master seed, purpose tag, replication index).
constexpr std::uint64_t stream_key(std::uint64_t master, std::string_view tag,
                                   std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a(tag));
  return splitmix64(h ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t a,
                                   std::uint64_t b = 0) {
  return splitmix64(splitmix64(key ^ splitmix64(a)) ^ (b * 0xD1342543DE82EF95ull + 1));
}

inline double to_unit(std::uint64_t x) { return double(x >> 11) * 0x1.0p-53; }

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : key_(key) {}

  static Rng stream(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
    return Rng(stream_key(master, tag, index));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ >= 4) refill();
    const std::uint64_t lo = buf_[pos_], hi = buf_[pos_ + 1];
    pos_ += 2;
    return (hi << 32) | lo;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t blocks_used() const { return counter_; }

 private:
  void refill() {
    const PhiloxCounter c{std::uint32_t(counter_), std::uint32_t(counter_ >> 32), 0u, 0u};
    buf_ = philox4x32_10(c, PhiloxKey{std::uint32_t(key_), std::uint32_t(key_ >> 32)});
    ++counter_;
    pos_ = 0;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  PhiloxCounter buf_{};
  int pos_ = 4;
};

// Uniform on [0,1) with 53 random bits.
inline double uniform01(Rng& r) { return to_unit(r()); }

// Uniform on (0,1].
inline double uniform_pos(Rng& r) { return 1.0 - uniform01(r); }

inline double exponential(Rng& r, double rate = 1.0) {
  return -std::log(uniform_pos(r)) / rate;
}

inline double normal(Rng& r) {
  const double u1 = uniform_pos(r), u2 = uniform01(r);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
inline std::uint64_t uniform_int(Rng& r, std::uint64_t n) {
  if (n == 0) return 0;
  unsigned __int128 m = (unsigned __int128)r() * n;
  std::uint64_t l = std::uint64_t(m);
  if (l < n) {
    const std::uint64_t t = (0 - n) % n;
    while (l < t) {
      m = (unsigned __int128)r() * n;
      l = std::uint64_t(m);
    }
  }
  return std::uint64_t(m >> 64);
}

// Failures before the first success of Bernoulli(p) trials.
inline std::uint64_t geometric_failures(Rng& r, double p) {
  if (p >= 1.0) return 0;
  if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  const double g = std::floor(std::log(uniform_pos(r)) / std::log1p(-p));
  return g >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max() : std::uint64_t(g);
}

// Knuth multiplication for small means, PTRS (Hormann 1993) otherwise.
inline std::uint64_t poisson(Rng& r, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) {
    const double L = std::exp(-mean);
    std::uint64_t k = 0;
    double p = uniform01(r);
    while (p > L) {
      ++k;
      p *= uniform01(r);
    }
    return k;
  }
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double lmu = std::log(mean);
  for (;;) {
    const double U = uniform01(r) - 0.5;
    const double V = uniform01(r);
    const double us = 0.5 - std::fabs(U);
    const double k = std::floor((2.0 * a / us + b) * U + mean + 0.43);
    if (us >= 0.07 && V <= vr) return std::uint64_t(k);
    if (k < 0.0 || (us < 0.013 && V > us)) continue;
    if (std::log(V) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * lmu - std::lgamma(k + 1.0))
      return std::uint64_t(k);
  }
}

// Uniform direction on the unit sphere of R^D.
template <std::size_t D>
std::array<double, D> unit_direction(Rng& r) {
  std::array<double, D> v{};
  if constexpr (D == 2) {
    const double a = 2.0 * std::numbers::pi * uniform01(r);
    v = {std::cos(a), std::sin(a)};
  } else {
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& x : v) {
        x = normal(r);
        n2 += x * x;
      }
    } while (n2 == 0.0);
    const double s = 1.0 / std::sqrt(n2);
    for (auto& x : v) x *= s;
  }
  return v;
}

// Stateless uniform addressed by (key, a, b, c): used for edge coins.
inline double counter_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c = 0) {
  const std::uint64_t k2 = derive_key(key, c);
  const PhiloxCounter ctr{std::uint32_t(a), std::uint32_t(a >> 32), std::uint32_t(b),
                          std::uint32_t(b >> 32)};
  const auto out = philox4x32_10(ctr, PhiloxKey{std::uint32_t(k2), std::uint32_t(k2 >> 32)});
  return to_unit((std::uint64_t(out[1]) << 32) | out[0]);
}

}  // namespace ppnav
