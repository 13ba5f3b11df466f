// Copyright 2026 The dplabel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPLABEL_RNG_HPP_
#define DPLABEL_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace dplabel {

// SplitMix64 finalizer. Used to derive engine seeds and per-record seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds `value` into an accumulated hash `h`.
constexpr std::uint64_t mix_seed(std::uint64_t h, std::uint64_t value) noexcept {
  return splitmix64(h ^ splitmix64(value));
}

// Stream indices for the logical random consumers of one repetition. Each
// consumer draws from its own stream so reordering consumers never perturbs
// the others.
enum StreamIndex : std::uint32_t {
  kThetaStream = 0,
  kDataStream = 1,
  kRandomizerStream = 2,
  kObjectiveNoiseStream = 3,
};

// A deterministic random stream identified by (seed, stream_index).
// Identical identifiers reproduce identical draws. The underlying engine is
// mt19937_64 and the samplers below are written out explicitly, so draws do
// not depend on the standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint32_t stream_index)
      : seed_(seed),
        stream_index_(stream_index),
        engine_(mix_seed(splitmix64(seed), stream_index)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer on [0, bound). Lemire-style rejection, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via the Marsaglia polar method. The second variate of
  // each accepted pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

 private:
  std::uint64_t seed_;
  std::uint32_t stream_index_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dplabel

#endif  // DPLABEL_RNG_HPP_
