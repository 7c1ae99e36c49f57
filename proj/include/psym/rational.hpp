/*
 * Copyright 2026 The Pseudonymetry Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>

#include "psym/error.hpp"

namespace psym {

/// Exact duration in seconds, stored as a reduced fraction num/den (den > 0).
///
/// TX symbols (1/93 750 s) and RX bins (1/90 000 s) are not representable in
/// binary floating point, and their ratio 24/25 must hold exactly for
/// long streams to stay aligned, so all interval bookkeeping goes through
/// this type.
class Seconds {
 public:
  constexpr Seconds() = default;

  constexpr Seconds(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw ArgumentError("Seconds: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  /// Period of a rate given in whole hertz.
  static constexpr Seconds period_of_hz(std::int64_t hz) { return Seconds(1, hz); }

  /// Converts a nanosecond count back to an exact period. When the count is
  /// the rounded period of a whole-hertz rate (11111 ns -> 90 kHz) that
  /// rate's exact period is returned.
  static Seconds from_nanoseconds(std::uint64_t ns) {
    if (ns == 0) throw ArgumentError("Seconds: zero nanoseconds");
    // Several integer rates can share one ns value (90000 and 90001 Hz both
    // give 11111 ns); take the roundest, then the closest.
    const double exact = 1e9 / static_cast<double>(ns);
    const auto lo = static_cast<std::int64_t>(std::ceil(1e9 / (static_cast<double>(ns) + 0.5)));
    const auto hi = static_cast<std::int64_t>(std::floor(1e9 / (static_cast<double>(ns) - 0.5)));
    std::int64_t best = 0;
    int best_zeros = -1;
    if (hi - lo < 100'000) {
      for (std::int64_t hz = std::max<std::int64_t>(lo, 1); hz <= hi; ++hz) {
        if (static_cast<std::uint64_t>(std::llround(1e9 / static_cast<double>(hz))) != ns) continue;
        int zeros = 0;
        for (std::int64_t v = hz; v % 10 == 0; v /= 10) ++zeros;
        if (zeros > best_zeros ||
            (zeros == best_zeros && std::abs(static_cast<double>(hz) - exact) <
                                        std::abs(static_cast<double>(best) - exact))) {
          best = hz;
          best_zeros = zeros;
        }
      }
    }
    if (best > 0) return period_of_hz(best);
    return Seconds(static_cast<std::int64_t>(ns), 1'000'000'000);
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  constexpr double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::uint64_t nanoseconds() const {
    return static_cast<std::uint64_t>(std::llround(value() * 1e9));
  }
  constexpr bool positive() const { return num_ > 0; }

  friend constexpr bool operator==(const Seconds& a, const Seconds& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend constexpr std::strong_ordering operator<=>(const Seconds& a, const Seconds& b) {
    return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
  }

  friend constexpr Seconds operator*(const Seconds& a, std::int64_t k) {
    return Seconds(a.num_ * k, a.den_);
  }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Two durations expressed as integer multiples of a shared tick
/// (1 / lcm(den_a, den_b) seconds). For 1/93 750 s and 1/90 000 s this is
/// 24 and 25 ticks.
struct TickPair {
  std::int64_t a = 0;
  std::int64_t b = 0;
};

inline TickPair common_ticks(const Seconds& a, const Seconds& b) {
  const std::int64_t den = std::lcm(a.den(), b.den());
  return TickPair{a.num() * (den / a.den()), b.num() * (den / b.den())};
}

}  // namespace psym
