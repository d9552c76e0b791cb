/*
 * Copyright 2026 The fedsten Authors
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

#ifndef FEDSTEN_COMMON_RNG_H_
#define FEDSTEN_COMMON_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace fedsten {

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

// Seed-splitting rule used everywhere a component needs its own stream:
//   derive_seed(root, label) = splitmix64(root ^ splitmix64(fnv1a64(label)))
// Labels are stable strings such as "data/client1" or "train/client2".
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// Deterministic random source. The distributions are implemented here
// rather than taken from <random> so streams are identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }
  // Standard normal via Box-Muller (no cached second value).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = uniform_int(0, i);
      std::swap(first[i], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fedsten

#endif  // FEDSTEN_COMMON_RNG_H_
