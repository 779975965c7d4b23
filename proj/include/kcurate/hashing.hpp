#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace kcurate {

/// FNV-1a over the code points of a slice, folded with a seed and finished
/// with a splitmix64 avalanche so low bits are usable as bucket indices.
inline std::uint64_t hash_codepoints(std::u32string_view s, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (char32_t c : s) {
    for (int k = 0; k < 4; ++k) {
      h ^= static_cast<std::uint8_t>(c >> (8 * k));
      h *= 0x100000001b3ULL;
    }
  }
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

inline std::uint64_t hash_bytes(std::string_view s, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Calls `sink(hash)` for every character n-gram of each requested order.
/// Text shorter than an order contributes nothing for that order.
template <typename Sink>
void for_each_ngram_hash(std::u32string_view text, const std::vector<int>& orders,
                         std::uint64_t seed, Sink&& sink) {
  for (int n : orders) {
    if (n <= 0 || text.size() < static_cast<std::size_t>(n)) continue;
    const std::uint64_t order_seed = seed + static_cast<std::uint64_t>(n) * 0x51ED27ULL;
    for (std::size_t i = 0; i + n <= text.size(); ++i)
      sink(hash_codepoints(text.substr(i, n), order_seed));
  }
}

/// Sparse real vector with strictly increasing indices.
template <typename Index>
struct SparseVector {
  std::vector<std::pair<Index, double>> entries;

  static SparseVector from_unsorted(std::vector<std::pair<Index, double>> raw) {
    std::sort(raw.begin(), raw.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseVector v;
    for (const auto& [idx, val] : raw) {
      if (!v.entries.empty() && v.entries.back().first == idx)
        v.entries.back().second += val;
      else
        v.entries.emplace_back(idx, val);
    }
    return v;
  }

  double dot(const SparseVector& other) const {
    double acc = 0.0;
    auto a = entries.begin();
    auto b = other.entries.begin();
    while (a != entries.end() && b != other.entries.end()) {
      if (a->first < b->first) {
        ++a;
      } else if (b->first < a->first) {
        ++b;
      } else {
        acc += a->second * b->second;
        ++a;
        ++b;
      }
    }
    return acc;
  }

  bool empty() const { return entries.empty(); }
};

}  // namespace kcurate
