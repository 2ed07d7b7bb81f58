/*
 * Copyright 2026 The avmap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef AVMAP_RNG_HPP_
#define AVMAP_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

// Deterministic sampling helpers. std::mt19937_64 output is fully specified
// by the standard, but the std distributions are not; everything here draws
// through explicit algorithms so seeded results are identical on every
// platform and compiler.

namespace avmap {

/// splitmix64 finalizer; combines a base seed with a stream id.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Unbiased integer in [0, n) by rejection sampling.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t v = gen();
  while (v > limit) v = gen();
  return v % n;
}

/// Uniform double in [lo, hi) from the top 53 bits.
inline double uniform_real(std::mt19937_64& gen, double lo = 0.0, double hi = 1.0) {
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

template <typename T>
void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(v[i - 1], v[j]);
  }
}

/// k distinct values from [0, n), in draw order.
inline std::vector<int> sample_without_replacement(int n, int k, std::mt19937_64& gen) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k && i < n; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        static_cast<std::size_t>(uniform_below(gen, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    out.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace avmap

#endif  // AVMAP_RNG_HPP_
