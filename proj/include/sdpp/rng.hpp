// Copyright 2026 The sdpushpull Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SDPP_RNG_HPP
#define SDPP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sdpp {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// murmur3 64-bit finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xFF51AFD7ED558CCDull;
  z ^= z >> 33;
  z *= 0xC4CEB9FE1A85EC53ull;
  z ^= z >> 33;
  return z;
}

/// Counter-keyed deterministic random stream (splitmix64 core).
///
/// A stream is a pure function of its key (seed, kind, a, b, c), so replicas,
/// agents and iterations can be assigned independent streams and advanced
/// concurrently without any shared state.  The same key always yields the
/// same sequence, bit for bit, on any platform.
class StreamRng {
 public:
  enum class Kind : std::uint64_t {
    kInit = 1,     // per-agent initial decision variables
    kNoise = 2,    // per-(agent, iteration) privacy noise
    kProblem = 3,  // instance generation
    kGeneric = 4,
  };

  StreamRng(std::uint64_t seed, Kind kind, std::uint64_t a = 0,
            std::uint64_t b = 0, std::uint64_t c = 0) {
    state_ = mix64(seed + kGolden);
    state_ = mix64(state_ ^ mix64(static_cast<std::uint64_t>(kind) + kGolden));
    state_ = mix64(state_ ^ mix64(a + kGolden));
    state_ = mix64(state_ ^ mix64(b + kGolden));
    state_ = mix64(state_ ^ mix64(c + kGolden));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0, 1); never returns an endpoint.
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (-0.5, 0.5).
  double next_symmetric() { return next_unit_open() - 0.5; }

  /// Uniform on (lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit_open();
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double next_gaussian() {
    const double u1 = next_unit_open();
    const double u2 = next_unit_open();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  std::uint64_t state_;
};

inline StreamRng init_stream(std::uint64_t seed, std::uint64_t replica,
                             std::uint64_t agent) {
  return StreamRng(seed, StreamRng::Kind::kInit, replica, agent);
}

inline StreamRng noise_stream(std::uint64_t seed, std::uint64_t replica,
                              std::uint64_t agent, std::uint64_t iteration) {
  return StreamRng(seed, StreamRng::Kind::kNoise, replica, agent, iteration);
}

inline StreamRng problem_stream(std::uint64_t seed, std::uint64_t agent,
                                std::uint64_t field) {
  return StreamRng(seed, StreamRng::Kind::kProblem, agent, field);
}

}  // namespace sdpp

#endif  // SDPP_RNG_HPP
