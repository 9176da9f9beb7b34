// Copyright 2026 The swssb Authors
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

#pragma once

#include <cstdint>
#include <random>

namespace swssb {

// One avalanche round of the splitmix64 generator: advances state and
// returns a well-mixed 64-bit word.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Derives an independent stream seed from (master, index).  Used to give
// every Monte-Carlo sample its own deterministic stream so results are
// reproducible regardless of thread scheduling.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

// Stateless keyed hash of (key, tag, x); tag separates hash domains.
std::uint64_t keyed_hash(std::uint64_t key, std::uint64_t tag,
                         std::uint64_t x);

// Deterministic random stream.  All floating-point distributions are
// hand-mapped from the raw 64-bit output so that identical seeds produce
// identical doubles on every platform and standard-library version.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Seeded from OS entropy.
  static RandomStream fresh();

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generates pairs and caches one.
  double normal();

  // Uniform integer in [0, n) by rejection (exact, unbiased).
  std::uint64_t uniform_below(std::uint64_t n);

  // Single uniform bit, buffered 64 at a time.
  bool bit();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
  std::uint64_t bit_buffer_ = 0;
  int bits_left_ = 0;
};

}  // namespace swssb
