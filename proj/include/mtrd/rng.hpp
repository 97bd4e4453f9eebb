// Copyright 2026 The mtrd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTRD_RNG_HPP_
#define MTRD_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>

namespace mtrd {

// SplitMix64 finalizer. Used to derive independent stream seeds from a master
// seed and a path of indices (trial number, terminal, purpose tag, ...).
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = Mix64(master);
  for (std::uint64_t p : path) s = Mix64(s ^ Mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

// Deterministic generator. std::mt19937_64 is fully specified by the
// standard; the distributions below are implemented here because the
// std:: distributions are implementation-defined and would break
// byte-identical reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection sampling, bound > 0.
  std::uint64_t Below(std::uint64_t bound) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  // Standard exponential; Dirichlet(1) rows are normalized exponentials.
  double Exponential() { return -std::log1p(-Uniform()); }

  // Index drawn from a cumulative table (last entry ~1).
  std::size_t Categorical(std::span<const double> cdf) {
    const double u = Uniform() * cdf.back();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (u < cdf[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mtrd

#endif  // MTRD_RNG_HPP_
