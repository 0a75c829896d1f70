#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rng.hpp"

namespace ppnav {

// Uniform coins U(X,Y) of the small-world graph, keyed by the unordered index
// pair and the rejection round of the querying point. Coins are a pure
// function of (seed, pair, round); the memo only caches them.
class EdgeOracle {
 public:
  explicit EdgeOracle(std::uint64_t key = 0) : key_(key) {}

  double coin(std::size_t i, std::size_t j, std::uint64_t round = 0) {
    const std::size_t a = i < j ? i : j, b = i < j ? j : i;
    const Key k{a, b, round};
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    const double u = counter_uniform(key_, a, b, round);
    memo_.emplace(k, u);
    return u;
  }

  std::uint64_t round(std::size_t i) const { return i < rounds_.size() ? rounds_[i] : 0; }

  void set_round(std::size_t i, std::uint64_t r) {
    if (rounds_.size() <= i) rounds_.resize(i + 1, 0);
    rounds_[i] = r;
  }

  std::size_t memo_size() const { return memo_.size(); }

 private:
  struct Key {
    std::size_t a, b;
    std::uint64_t r;
    bool operator==(const Key&) const = default;
  };
  struct Hash {
    std::size_t operator()(const Key& k) const {
      return std::size_t(derive_key(k.a * 0x9E3779B97F4A7C15ull + k.b, k.r));
    }
  };
  std::uint64_t key_;
  std::unordered_map<Key, double, Hash> memo_;
  std::vector<std::uint64_t> rounds_;
};

}  // namespace ppnav
