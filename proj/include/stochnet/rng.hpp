/*
 * Copyright 2026 The stochnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace stochnet {

/// Philox4x32-10 block function: encrypts a 128-bit counter under a 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/**
 * Counter-based random stream.
 *
 * A stream is identified by (seed, stream id); the n-th output is a pure
 * function of (seed, stream id, n), so two streams with equal identity
 * produce identical sequences. split() derives a statistically independent
 * child stream, which is how per-example and per-chain randomness is keyed.
 *
 * Satisfies UniformRandomBitGenerator, so it plugs into <random>
 * distributions.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// True with probability p (p is clamped to [0, 1]).
  bool bernoulli(double p) { return uniform() < p; }

  /// Child stream keyed by `id`. Does not advance this stream.
  RngStream split(std::uint64_t id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  /// Number of 64-bit words drawn so far.
  std::uint64_t position() const { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
};

}  // namespace stochnet
