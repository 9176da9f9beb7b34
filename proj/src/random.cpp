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

#include "swssb/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swssb {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master + (index + 1) * 0x9E3779B97F4A7C15ull;
  std::uint64_t z = splitmix64_next(state);
  z ^= splitmix64_next(state);
  return z;
}

std::uint64_t keyed_hash(std::uint64_t key, std::uint64_t tag,
                         std::uint64_t x) {
  std::uint64_t state = key + tag * 0x9E3779B97F4A7C15ull;
  (void)splitmix64_next(state);
  state += x * 0xBF58476D1CE4E5B9ull;
  std::uint64_t z = splitmix64_next(state);
  z ^= splitmix64_next(state);
  return z;
}

RandomStream RandomStream::fresh() {
  std::random_device rd;
  std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return RandomStream(seed);
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform_open();
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t RandomStream::uniform_below(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("uniform_below: n must be positive");
  }
  if ((n & (n - 1)) == 0) {
    return next_u64() & (n - 1);
  }
  // Reject values below 2^64 mod n so every residue is equally likely.
  std::uint64_t threshold = (-n) % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v < threshold);
  return v % n;
}

bool RandomStream::bit() {
  if (bits_left_ == 0) {
    bit_buffer_ = next_u64();
    bits_left_ = 64;
  }
  bool b = (bit_buffer_ & 1) != 0;
  bit_buffer_ >>= 1;
  --bits_left_;
  return b;
}

}  // namespace swssb
