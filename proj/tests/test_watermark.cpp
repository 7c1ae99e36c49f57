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

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "psym/watermark.hpp"

using namespace psym;

namespace {

// Forward DFT by definition, independent of the library's synthesis loop.
std::vector<std::complex<double>> dft(const std::complex<double>* x, std::size_t n) {
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < n; ++t) {
      out[k] += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t) / double(n));
    }
  }
  return out;
}

// Recovers a packet from a noiseless pattern by reading one sample per chip
// and matching the chip row against c1 / c0 exactly.
std::vector<std::uint8_t> template_decode(const TxPowerPattern& p, const WatermarkConfig& c) {
  std::vector<std::uint8_t> bits;
  for (std::size_t b = 0; b * c.samples_per_bit() < p.samples.size(); ++b) {
    PnSequence seen;
    for (std::size_t i = 0; i < kChipsPerBit; ++i) {
      seen.chips[i] = p.samples[b * c.samples_per_bit() + i * c.samples_per_chip] == c.high_power;
    }
    if (seen == kPnOne) {
      bits.push_back(1);
    } else if (seen == kPnZero) {
      bits.push_back(0);
    } else {
      ADD_FAILURE() << "bit " << b << " matches neither template";
      bits.push_back(2);
    }
  }
  return bits;
}

}  // namespace

TEST(PnSequence, BitOneIsPublishedCode) {
  const PnSequence expected{{1, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0}};
  EXPECT_EQ(pn_for_bit(true), expected);
}

TEST(PnSequence, BitZeroIsComplementOfBitOne) {
  const PnSequence expected{{0, 1, 1, 1, 0, 0, 0, 0, 1, 0, 1, 0, 0, 1, 1}};
  EXPECT_EQ(pn_for_bit(false), expected);
}

TEST(PnSequence, ComplementAndBalance) {
  for (std::size_t i = 0; i < kChipsPerBit; ++i) {
    EXPECT_EQ(pn_for_bit(false).chips[i], 1 - pn_for_bit(true).chips[i]) << "chip " << i;
  }
  EXPECT_EQ(pn_for_bit(true).ones(), 8u);
  EXPECT_EQ(pn_for_bit(false).ones(), 7u);
}

TEST(PnSequence, BitOneHasTwoValuedPeriodicAutocorrelation) {
  // Maximal-length property: in +/-1 form the cyclic autocorrelation is 15
  // at zero shift and -1 everywhere else.
  const auto& c = kPnOne.chips;
  for (std::size_t s = 0; s < kChipsPerBit; ++s) {
    int acc = 0;
    for (std::size_t i = 0; i < kChipsPerBit; ++i) {
      acc += (2 * c[i] - 1) * (2 * c[(i + s) % kChipsPerBit] - 1);
    }
    EXPECT_EQ(acc, s == 0 ? 15 : -1) << "shift " << s;
  }
}

TEST(WatermarkConfig, DefaultsMatchFieldConfiguration) {
  const WatermarkConfig c;
  EXPECT_EQ(c.samples_per_bit(), 90u);
  EXPECT_EQ(c.samples_per_packet(), 2520u);
  // 64 subcarriers at 6 MHz: one symbol is 64 / 6e6 s = 1 / 93 750 s.
  EXPECT_EQ(c.tx_symbol_duration, Seconds(static_cast<std::int64_t>(c.num_subcarriers), c.sample_rate_hz));
  EXPECT_NO_THROW(c.validate());
}

TEST(WatermarkConfig, RejectsInvalidPowersAndIndices) {
  WatermarkConfig c;
  c.low_power = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.low_power = 2.0;
  EXPECT_THROW(encode_bit(true, c), ConfigError);
  c = {};
  c.watermark_subcarrier_index = 64;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.samples_per_chip = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(EncodeBit, OneFollowsC1AtSixSamplesPerChip) {
  WatermarkConfig c;
  c.high_power = 2.5;
  c.low_power = 0.5;
  const auto p = encode_bit(true, c);
  ASSERT_EQ(p.samples.size(), 90u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(p.samples[i], 2.5);
  for (std::size_t i = 6; i < 24; ++i) EXPECT_EQ(p.samples[i], 0.5);
  for (std::size_t i = 0; i < 90; ++i) {
    EXPECT_EQ(p.samples[i], kPnOne.chips[i / 6] ? 2.5 : 0.5) << "sample " << i;
  }
}

TEST(EncodeBit, ZeroSwapsPowersOfOne) {
  WatermarkConfig c;
  c.low_power = 0.25;
  const auto one = encode_bit(true, c);
  const auto zero = encode_bit(false, c);
  ASSERT_EQ(zero.samples.size(), one.samples.size());
  for (std::size_t i = 0; i < one.samples.size(); ++i) {
    EXPECT_EQ(zero.samples[i], one.samples[i] == c.high_power ? c.low_power : c.high_power);
  }
}

TEST(EncodeBit, OneSamplePerChipIsTheCodeItself) {
  WatermarkConfig c;
  c.samples_per_chip = 1;
  const auto p = encode_bit(true, c);
  ASSERT_EQ(p.samples.size(), 15u);
  for (std::size_t i = 0; i < 15; ++i) EXPECT_EQ(p.samples[i], static_cast<double>(kPnOne.chips[i]));
}

TEST(EncodePacket, DefaultPacketIs2520Samples) {
  const auto p = encode_packet(PseudonymPacket::from_hex("A5C3F01"), {});
  EXPECT_EQ(p.samples.size(), 2520u);
}

TEST(EncodePacket, AllOnesRepeatsOneSegment) {
  const WatermarkConfig c;
  const auto p = encode_packet(PseudonymPacket::from_uint(0xFFFFFFF), c);
  const auto seg = encode_bit(true, c);
  for (std::size_t b = 0; b < 28; ++b) {
    for (std::size_t i = 0; i < 90; ++i) ASSERT_EQ(p.samples[b * 90 + i], seg.samples[i]);
  }
}

TEST(EncodePacket, WrongLengthIsFramingError) {
  EXPECT_THROW(encode_packet(PseudonymPacket(std::vector<std::uint8_t>(27, 1)), {}), FramingError);
}

TEST(EncodePacket, LengthConservationOverRandomConfigs) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    WatermarkConfig c;
    c.samples_per_chip = 1 + rng() % 12;
    c.bits_per_packet = 1 + rng() % 40;
    c.high_power = 0.1 + double(rng() % 1000) / 100.0;
    c.low_power = c.high_power * double(rng() % 100) / 100.0;
    std::vector<std::uint8_t> bits(c.bits_per_packet);
    for (auto& b : bits) b = rng() & 1;
    const auto p = encode_packet(PseudonymPacket(bits), c);
    ASSERT_EQ(p.samples.size(), c.bits_per_packet * 15 * c.samples_per_chip);
    for (double v : p.samples) ASSERT_TRUE(v == c.high_power || v == c.low_power);
  }
}

TEST(EncodePacket, TemplateMatchingRecoversRandomPackets) {
  std::mt19937_64 rng(12);
  const WatermarkConfig c;
  for (int t = 0; t < 1000; ++t) {
    const auto packet = PseudonymPacket::from_uint(rng() & 0xFFFFFFF);
    const auto decoded = template_decode(encode_packet(packet, c), c);
    ASSERT_EQ(decoded, std::vector<std::uint8_t>(packet.bits().begin(), packet.bits().end()));
  }
}

TEST(EncodeStream, ExactMultipleOfPacketDuration) {
  const WatermarkConfig c;
  const auto s = encode_stream(PseudonymPacket::from_uint(0x1234567), c.packet_duration() * 10, c);
  EXPECT_EQ(s.full_packets, 10u);
  EXPECT_EQ(s.tail_samples, 0u);
  EXPECT_EQ(s.pattern.samples.size(), 25200u);
  // Same through the floating-point entry point.
  const auto f = encode_stream(PseudonymPacket::from_uint(0x1234567), 10 * c.packet_duration().value(), c);
  EXPECT_EQ(f.full_packets, 10u);
  EXPECT_EQ(f.tail_samples, 0u);
}

TEST(EncodeStream, FiveSecondsHolds186Packets) {
  // 5 s at 93 750 symbols/s = 468 750 symbols = 186 * 2520 + 30.
  const std::int64_t symbols = 5 * 93'750;
  ASSERT_EQ(symbols / 2520, 186);
  ASSERT_EQ(symbols % 2520, 30);
  const auto s = encode_stream(PseudonymPacket::from_uint(0xABCDEF0), 5.0, {});
  EXPECT_EQ(s.full_packets, 186u);
  EXPECT_EQ(s.tail_samples, 30u);
  EXPECT_EQ(s.pattern.samples.size(), 468'750u);
}

TEST(EncodeStream, HalfPacketIsTailOnly) {
  const WatermarkConfig c;
  const auto packet = PseudonymPacket::from_uint(0x0F0F0F0);
  const auto s = encode_stream(packet, Seconds(c.packet_duration().num(), c.packet_duration().den() * 2), c);
  EXPECT_EQ(s.full_packets, 0u);
  EXPECT_EQ(s.tail_samples, 1260u);
  const auto full = encode_packet(packet, c);
  EXPECT_TRUE(std::equal(s.pattern.samples.begin(), s.pattern.samples.end(), full.samples.begin()));
}

TEST(EncodeStream, NonPositiveDurationIsArgumentError) {
  const auto packet = PseudonymPacket::from_uint(1);
  EXPECT_THROW(encode_stream(packet, 0.0, {}), ArgumentError);
  EXPECT_THROW(encode_stream(packet, -1.0, {}), ArgumentError);
  EXPECT_THROW(encode_stream(packet, Seconds(0, 1), {}), ArgumentError);
}

TEST(PseudonymPacket, HexRoundTripAndErrors) {
  const auto p = PseudonymPacket::from_hex("a5c3f01");
  EXPECT_EQ(p.size(), 28u);
  EXPECT_EQ(p.to_hex(), "A5C3F01");
  EXPECT_EQ(p.to_bit_string(), "1010010111000011111100000001");
  EXPECT_THROW(PseudonymPacket::from_hex("A5C3F0"), ArgumentError);
  EXPECT_THROW(PseudonymPacket::from_hex("A5C3F0G"), ArgumentError);
  EXPECT_THROW(PseudonymPacket(std::vector<std::uint8_t>{0, 2}), ArgumentError);
}

TEST(OfdmSynthesis, SingleToneAtWatermarkSubcarrier) {
  WatermarkConfig c;
  c.high_power = 4.0;
  c.watermark_subcarrier_index = 17;
  TxPowerPattern p;
  p.samples = {c.high_power};
  const auto x = synthesize_ofdm_baseband(p, c, SilentDataSource{});
  ASSERT_EQ(x.size(), 64u);
  const auto spectrum = dft(x.data(), 64);
  for (std::size_t k = 0; k < 64; ++k) {
    if (k == 17) {
      EXPECT_NEAR(std::norm(spectrum[k]), 4.0, 1e-9);
    } else {
      EXPECT_NEAR(std::abs(spectrum[k]), 0.0, 1e-9) << "bin " << k;
    }
  }
}

TEST(OfdmSynthesis, ZeroPowerAndSilentDataIsSilence) {
  TxPowerPattern p;
  p.samples = {0.0};
  const auto x = synthesize_ofdm_baseband(p, {}, SilentDataSource{});
  ASSERT_EQ(x.size(), 64u);
  for (const auto& v : x) EXPECT_EQ(v, std::complex<double>(0.0, 0.0));
}

TEST(OfdmSynthesis, PacketLengthAndWatermarkPower) {
  WatermarkConfig c;
  c.watermark_subcarrier_index = 5;
  c.low_power = 0.2;
  const auto p = encode_packet(PseudonymPacket::from_hex("5A5A5A5"), c);
  const auto x = synthesize_ofdm_baseband(p, c, QpskPlaceholderSource(3));
  ASSERT_EQ(x.size(), 161'280u);
  // 161 280 samples at 6 MHz.
  EXPECT_EQ(Seconds(static_cast<std::int64_t>(x.size()), c.sample_rate_hz), Seconds(2688, 100'000));
  for (std::size_t s = 0; s < p.samples.size(); s += 37) {
    const auto spectrum = dft(x.data() + s * 64, 64);
    EXPECT_NEAR(std::norm(spectrum[5]), p.samples[s], 0.01 * p.samples[s]) << "symbol " << s;
    EXPECT_NEAR(std::norm(spectrum[6]), 1.0, 1e-9);
  }
}

TEST(OfdmSynthesis, OutOfRangeSubcarrierIsConfigError) {
  WatermarkConfig c;
  c.watermark_subcarrier_index = 99;
  TxPowerPattern p;
  p.samples = {1.0};
  EXPECT_THROW(synthesize_ofdm_baseband(p, c, SilentDataSource{}), ConfigError);
}
