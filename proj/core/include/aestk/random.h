// Copyright 2026 The aestk Authors
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

#ifndef AESTK_RANDOM_H_
#define AESTK_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace aestk {

// Seeded generator whose draws are identical on every platform. The standard
// distributions are implementation-defined, so all sampling here is done
// directly from the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, bound). bound must be > 0.
  uint64_t UniformInt(uint64_t bound);

  // Uniform in [0, 1) with 53 bits of precision.
  double UniformDouble();

  bool Bernoulli(double p) { return UniformDouble() < p; }

  double StandardNormal();

  template <typename T>
  void Shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent seed for substream `stream` of `seed` (splitmix64
// finalizer over both words).
uint64_t SubstreamSeed(uint64_t seed, uint64_t stream);

}  // namespace aestk

#endif  // AESTK_RANDOM_H_
