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

// Watermark construction: PN chip codes, packet framing, the per-symbol
// power pattern on the reserved subcarrier and optional OFDM synthesis.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psym/error.hpp"
#include "psym/rational.hpp"

namespace psym {

inline constexpr std::size_t kChipsPerBit = 15;

/// 15-chip spreading code for one pseudonym bit value.
struct PnSequence {
  std::array<std::uint8_t, kChipsPerBit> chips{};

  constexpr std::size_t ones() const {
    std::size_t n = 0;
    for (auto c : chips) n += c;
    return n;
  }
  friend constexpr bool operator==(const PnSequence&, const PnSequence&) = default;
};

// Maximal-length sequence used for bit 1; bit 0 uses its complement.
inline constexpr PnSequence kPnOne{{1, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0}};
inline constexpr PnSequence kPnZero = [] {
  PnSequence c;
  for (std::size_t i = 0; i < kChipsPerBit; ++i) c.chips[i] = 1 - kPnOne.chips[i];
  return c;
}();

constexpr PnSequence pn_for_bit(bool bit) { return bit ? kPnOne : kPnZero; }

/// Transmitter-side watermark parameters. Defaults reproduce the field
/// configuration: 64 subcarriers at 6 MHz (93.75 kHz spacing), 6 symbols per
/// chip, 28-bit packets, on-off keying.
struct WatermarkConfig {
  std::size_t samples_per_chip = 6;
  std::size_t chips_per_bit = kChipsPerBit;
  std::size_t bits_per_packet = 28;
  double high_power = 1.0;
  double low_power = 0.0;
  Seconds tx_symbol_duration = Seconds::period_of_hz(93'750);
  std::size_t watermark_subcarrier_index = 0;
  std::size_t num_subcarriers = 64;
  std::int64_t sample_rate_hz = 6'000'000;

  std::size_t samples_per_bit() const { return samples_per_chip * chips_per_bit; }
  std::size_t samples_per_packet() const { return samples_per_bit() * bits_per_packet; }
  Seconds packet_duration() const {
    return tx_symbol_duration * static_cast<std::int64_t>(samples_per_packet());
  }

  /// Throws ConfigError describing the first violated constraint.
  void validate() const {
    if (samples_per_chip == 0) throw ConfigError("samples_per_chip must be positive");
    if (chips_per_bit != kChipsPerBit) throw ConfigError("chips_per_bit is fixed at 15");
    if (bits_per_packet == 0) throw ConfigError("bits_per_packet must be positive");
    if (!std::isfinite(high_power) || !std::isfinite(low_power) || !(high_power > 0.0)) {
      throw ConfigError("high_power must be finite and positive");
    }
    if (!(low_power >= 0.0)) throw ConfigError("low_power must be non-negative");
    if (!(low_power < high_power)) throw ConfigError("low_power must be below high_power");
    if (!tx_symbol_duration.positive()) throw ConfigError("tx_symbol_duration must be positive");
    if (num_subcarriers == 0) throw ConfigError("num_subcarriers must be positive");
    if (watermark_subcarrier_index >= num_subcarriers) {
      throw ConfigError("watermark_subcarrier_index " + std::to_string(watermark_subcarrier_index) +
                        " outside [0, " + std::to_string(num_subcarriers) + ")");
    }
    if (sample_rate_hz <= 0) throw ConfigError("sample_rate_hz must be positive");
  }
};

/// Opaque pseudonym payload, one 0/1 value per element.
class PseudonymPacket {
 public:
  PseudonymPacket() = default;

  explicit PseudonymPacket(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) {
      if (b > 1) throw ArgumentError("packet bits must be 0 or 1");
    }
  }

  /// Low `width` bits of `value`, most significant first.
  static PseudonymPacket from_uint(std::uint64_t value, std::size_t width = 28) {
    if (width == 0 || width > 64) throw ArgumentError("packet width must be in [1, 64]");
    std::vector<std::uint8_t> bits(width);
    for (std::size_t i = 0; i < width; ++i) {
      bits[i] = static_cast<std::uint8_t>((value >> (width - 1 - i)) & 1u);
    }
    return PseudonymPacket(std::move(bits));
  }

  /// Parses exactly seven hex digits (28 bits), e.g. "A5C3F01".
  static PseudonymPacket from_hex(std::string_view hex) {
    if (hex.size() != 7) {
      throw ArgumentError("packet must be exactly 7 hex digits, got \"" + std::string(hex) + "\"");
    }
    std::uint64_t value = 0;
    for (char c : hex) {
      int digit;
      if (c >= '0' && c <= '9') {
        digit = c - '0';
      } else if (c >= 'a' && c <= 'f') {
        digit = c - 'a' + 10;
      } else if (c >= 'A' && c <= 'F') {
        digit = c - 'A' + 10;
      } else {
        throw ArgumentError("invalid hex digit in packet \"" + std::string(hex) + "\"");
      }
      value = (value << 4) | static_cast<std::uint64_t>(digit);
    }
    return from_uint(value, 28);
  }

  std::string to_hex() const {
    if (bits_.size() != 28) throw ArgumentError("hex rendering requires a 28-bit packet");
    static constexpr char kDigits[] = "0123456789ABCDEF";
    std::string out;
    for (std::size_t nib = 0; nib < 7; ++nib) {
      int v = 0;
      for (std::size_t i = 0; i < 4; ++i) v = (v << 1) | bits_[nib * 4 + i];
      out.push_back(kDigits[v]);
    }
    return out;
  }

  std::string to_bit_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }

  friend bool operator==(const PseudonymPacket&, const PseudonymPacket&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Linear power per TX symbol interval on the watermark subcarrier.
struct TxPowerPattern {
  std::vector<double> samples;
  Seconds symbol_duration = Seconds::period_of_hz(93'750);

  Seconds duration() const { return symbol_duration * static_cast<std::int64_t>(samples.size()); }
};

inline TxPowerPattern encode_bit(bool bit, const WatermarkConfig& config) {
  config.validate();
  TxPowerPattern out;
  out.symbol_duration = config.tx_symbol_duration;
  out.samples.reserve(config.samples_per_bit());
  for (auto chip : pn_for_bit(bit).chips) {
    out.samples.insert(out.samples.end(), config.samples_per_chip,
                       chip ? config.high_power : config.low_power);
  }
  return out;
}

inline TxPowerPattern encode_packet(const PseudonymPacket& packet, const WatermarkConfig& config) {
  config.validate();
  if (packet.size() != config.bits_per_packet) {
    throw FramingError("packet has " + std::to_string(packet.size()) + " bits, config expects " +
                       std::to_string(config.bits_per_packet));
  }
  const TxPowerPattern one = encode_bit(true, config);
  const TxPowerPattern zero = encode_bit(false, config);
  TxPowerPattern out;
  out.symbol_duration = config.tx_symbol_duration;
  out.samples.reserve(config.samples_per_packet());
  for (auto b : packet.bits()) {
    const auto& seg = b ? one.samples : zero.samples;
    out.samples.insert(out.samples.end(), seg.begin(), seg.end());
  }
  return out;
}

struct StreamPattern {
  TxPowerPattern pattern;
  std::size_t full_packets = 0;
  std::size_t tail_samples = 0;
};

/// Repeats the packet back to back for `duration`; a partial final packet
/// is truncated at the last whole TX symbol.
inline StreamPattern encode_stream(const PseudonymPacket& packet, const Seconds& duration,
                                   const WatermarkConfig& config) {
  if (!duration.positive()) throw ArgumentError("stream duration must be positive");
  const TxPowerPattern one = encode_packet(packet, config);
  const Seconds& sym = config.tx_symbol_duration;
  // floor(duration / symbol)
  const auto total = static_cast<std::size_t>(
      (static_cast<__int128>(duration.num()) * sym.den()) /
      (static_cast<__int128>(duration.den()) * sym.num()));
  const std::size_t per_packet = one.samples.size();

  StreamPattern out;
  out.full_packets = total / per_packet;
  out.tail_samples = total % per_packet;
  out.pattern.symbol_duration = sym;
  out.pattern.samples.reserve(total);
  for (std::size_t p = 0; p < out.full_packets; ++p) {
    out.pattern.samples.insert(out.pattern.samples.end(), one.samples.begin(), one.samples.end());
  }
  out.pattern.samples.insert(out.pattern.samples.end(), one.samples.begin(),
                             one.samples.begin() + static_cast<std::ptrdiff_t>(out.tail_samples));
  return out;
}

/// Floating-point convenience. The duration is converted to a whole number
/// of TX symbols; values within 1e-9 relative of an integer count snap to it
/// so that e.g. 10 * packet_duration().value() yields exactly 10 packets.
inline StreamPattern encode_stream(const PseudonymPacket& packet, double duration_s,
                                   const WatermarkConfig& config) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw ArgumentError("stream duration must be positive");
  }
  const Seconds& sym = config.tx_symbol_duration;
  const double symbols = duration_s * static_cast<double>(sym.den()) / static_cast<double>(sym.num());
  const double nearest = std::round(symbols);
  const double whole =
      std::abs(symbols - nearest) <= 1e-9 * std::max(1.0, symbols) ? nearest : std::floor(symbols);
  if (whole < 1.0) {
    encode_packet(packet, config);
    StreamPattern empty;
    empty.pattern.symbol_duration = sym;
    return empty;
  }
  return encode_stream(packet, sym * static_cast<std::int64_t>(whole), config);
}

/// Unit-power QPSK placeholder symbols for the data subcarriers.
class QpskPlaceholderSource {
 public:
  explicit QpskPlaceholderSource(std::uint64_t seed) : rng_(seed) {}

  std::complex<double> operator()() {
    const auto bits = rng_();
    const double s = std::numbers::sqrt2 / 2.0;
    return {(bits & 1u) ? s : -s, (bits & 2u) ? s : -s};
  }

 private:
  std::mt19937_64 rng_;
};

/// Leaves every data subcarrier empty.
struct SilentDataSource {
  std::complex<double> operator()() const { return {}; }
};

/// OFDM baseband with the watermark power pattern on the reserved
/// subcarrier: one num_subcarriers-point inverse DFT per pattern sample, no
/// cyclic prefix. The inverse transform carries the 1/N factor so the
/// forward DFT of each symbol returns the frequency grid unchanged.
template <class DataSource>
std::vector<std::complex<double>> synthesize_ofdm_baseband(const TxPowerPattern& pattern,
                                                           const WatermarkConfig& config,
                                                           DataSource&& data_source) {
  config.validate();
  if (pattern.samples.empty()) throw ArgumentError("cannot synthesize an empty pattern");

  const std::size_t n = config.num_subcarriers;
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t k = 0; k < n; ++k) {
    twiddle[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(n));
  }

  std::vector<std::complex<double>> grid(n);
  std::vector<std::complex<double>> out;
  out.reserve(pattern.samples.size() * n);
  for (double power : pattern.samples) {
    if (!(power >= 0.0) || !std::isfinite(power)) throw DataError("pattern power must be finite, >= 0");
    for (std::size_t k = 0; k < n; ++k) {
      grid[k] = k == config.watermark_subcarrier_index ? std::complex<double>(std::sqrt(power), 0.0)
                                                       : std::complex<double>(data_source());
    }
    for (std::size_t t = 0; t < n; ++t) {
      std::complex<double> acc{};
      for (std::size_t k = 0; k < n; ++k) acc += grid[k] * twiddle[(k * t) % n];
      out.push_back(acc / static_cast<double>(n));
    }
  }
  return out;
}

}  // namespace psym
