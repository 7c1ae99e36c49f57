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

// Passive-receiver channel model: the TX power pattern as it appears in a
// channelized spectrometer with a coarser, non-commensurate time resolution.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "psym/error.hpp"
#include "psym/rational.hpp"
#include "psym/watermark.hpp"

namespace psym {

/// Offset from the reference SNR axis used by experiment sweeps to the
/// in-channel peak convention (in-channel = reference + offset). Under
/// square-law bins and the correlation detector, Pe = 0.3 at -8.75 dB and
/// Pe = 1e-2 at -1.83 dB in-channel (1e5-bit Monte Carlo), so on the
/// reference axis the waterfall spans -14.75 dB to -7.83 dB.
inline constexpr double kReferenceSnrOffsetDb = 6.0;

/// Sentinel for a noiseless channel.
inline constexpr double kNoiselessSnrDb = std::numeric_limits<double>::infinity();

struct ChannelConfig {
  /// Peak (chip-on) watermark power over mean noise power in the watermark
  /// channel, dB, minus convention_offset_db. +inf disables noise.
  double snr_db = kNoiselessSnrDb;
  /// Added to snr_db before calibration. 0 gives the plain in-channel peak
  /// convention; experiment sweeps use kReferenceSnrOffsetDb.
  double convention_offset_db = 0.0;
  Seconds rx_bin_duration = Seconds::period_of_hz(90'000);
  /// Lumped sidelobe and path loss applied to the TX pattern.
  double attenuation_db = 0.0;
  std::uint64_t noise_seed = 0;
  std::size_t num_channels = 853;
  /// 1410 MHz inside the 1361.659-1438.249 MHz band at 90 kHz per channel.
  std::size_t watermark_channel_index = 537;
  double channel_bandwidth_hz = 90'000.0;
  double center_frequency_hz = 1'399'954'000.0;

  void validate() const {
    if (!rx_bin_duration.positive()) throw ConfigError("rx_bin_duration must be positive");
    if (num_channels == 0) throw ConfigError("num_channels must be at least 1");
    if (watermark_channel_index >= num_channels) {
      throw ConfigError("watermark_channel_index " + std::to_string(watermark_channel_index) +
                        " outside [0, " + std::to_string(num_channels) + ")");
    }
    if (!(attenuation_db >= 0.0) || !std::isfinite(attenuation_db)) {
      throw ConfigError("attenuation_db must be finite and >= 0");
    }
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
      throw ConfigError("snr_db must be a number or +inf");
    }
    if (!std::isfinite(convention_offset_db)) throw ConfigError("convention_offset_db must be finite");
  }
};

/// Known transmit-side facts attached to simulated blocks.
struct GroundTruth {
  PseudonymPacket bits;
  std::int64_t start_offset_bins = 0;
  double snr_db = kNoiselessSnrDb;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Time x frequency power matrix, row-major (one row per RX time bin).
struct SpectrogramBlock {
  std::vector<float> power;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Seconds bin_duration = Seconds::period_of_hz(90'000);
  std::uint64_t channel_bandwidth_hz = 90'000;
  std::uint64_t center_frequency_hz = 1'399'954'000;
  std::optional<GroundTruth> ground_truth;

  float at(std::size_t row, std::size_t col) const { return power[row * cols + col]; }
  float& at(std::size_t row, std::size_t col) { return power[row * cols + col]; }
  Seconds time_span() const { return bin_duration * static_cast<std::int64_t>(rows); }
};

/// Uniformly sampled power time series.
struct PowerSeries {
  std::vector<double> samples;
  Seconds bin_duration = Seconds::period_of_hz(90'000);
};

/// Averages the piecewise-constant TX pattern over consecutive RX bins
/// [k*T_RX, (k+1)*T_RX). Only whole bins are emitted. Interval arithmetic
/// is done in integer ticks of 1/lcm(den_tx, den_rx) seconds, so no phase
/// error accumulates over long streams.
inline PowerSeries project_to_rx_resolution(const TxPowerPattern& pattern, const Seconds& rx_bin) {
  if (pattern.samples.empty()) throw ArgumentError("cannot project an empty pattern");
  if (!pattern.symbol_duration.positive() || !rx_bin.positive()) {
    throw ArgumentError("symbol and bin durations must be positive");
  }
  const TickPair ticks = common_ticks(pattern.symbol_duration, rx_bin);
  const std::int64_t tx = ticks.a;
  const std::int64_t rx = ticks.b;
  const auto n_in = static_cast<std::int64_t>(pattern.samples.size());
  const std::int64_t n_out = static_cast<std::int64_t>(
      static_cast<__int128>(n_in) * tx / rx);

  PowerSeries out;
  out.bin_duration = rx_bin;
  out.samples.assign(static_cast<std::size_t>(n_out), 0.0);

  std::int64_t i = 0;
  for (std::int64_t k = 0; k < n_out; ++k) {
    const std::int64_t lo = k * rx;
    const std::int64_t hi = lo + rx;
    // First TX sample overlapping [lo, hi).
    while ((i + 1) * tx <= lo) ++i;
    double acc = 0.0;
    for (std::int64_t j = i; j < n_in && j * tx < hi; ++j) {
      const std::int64_t overlap = std::min(hi, (j + 1) * tx) - std::max(lo, j * tx);
      acc += static_cast<double>(overlap) * pattern.samples[static_cast<std::size_t>(j)];
    }
    out.samples[static_cast<std::size_t>(k)] = acc / static_cast<double>(rx);
  }
  return out;
}

struct SnrCalibration {
  double signal_power = 0.0;
  double noise_power = 0.0;
};

/// Signal power is the attenuated chip-on power; noise power follows from
/// snr_db + convention_offset_db = 10 log10(signal / noise).
inline SnrCalibration calibrate_snr(const ChannelConfig& channel, const WatermarkConfig& config) {
  channel.validate();
  config.validate();
  SnrCalibration cal;
  cal.signal_power = config.high_power * std::pow(10.0, -channel.attenuation_db / 10.0);
  cal.noise_power = std::isinf(channel.snr_db)
                        ? 0.0
                        : cal.signal_power /
                                  std::pow(10.0, (channel.snr_db + channel.convention_offset_db) / 10.0);
  return cal;
}

/// Square-law spectrometer bin: |sqrt(signal) + n|^2 with n circular complex
/// Gaussian of variance noise_power. With signal = 0 this is exponential with
/// mean noise_power.
class SquareLawNoise {
 public:
  SquareLawNoise(std::uint64_t seed, double noise_power)
      : rng_(seed), normal_(0.0, std::sqrt(noise_power / 2.0)), enabled_(noise_power > 0.0) {}

  double operator()(double signal_power) {
    if (!enabled_) return signal_power;
    const double re = std::sqrt(signal_power) + normal_(rng_);
    const double im = normal_(rng_);
    return re * re + im * im;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  bool enabled_;
};

/// Builds the receiver's view: noise in every channel, plus the attenuated
/// projected pattern in the watermark channel starting at
/// `start_offset_bins`. `rows == 0` sizes the block to end with the pattern.
/// The packet carried in `truth` (if any) is recorded as ground truth.
inline SpectrogramBlock simulate_rx_spectrogram(const TxPowerPattern& pattern,
                                                const ChannelConfig& channel,
                                                std::int64_t start_offset_bins,
                                                const WatermarkConfig& config,
                                                std::optional<PseudonymPacket> truth = std::nullopt,
                                                std::size_t rows = 0) {
  channel.validate();
  if (start_offset_bins < 0) throw ArgumentError("start_offset_bins must be >= 0");
  const SnrCalibration cal = calibrate_snr(channel, config);
  const double gain = std::pow(10.0, -channel.attenuation_db / 10.0);

  const PowerSeries projected = project_to_rx_resolution(pattern, channel.rx_bin_duration);
  const auto offset = static_cast<std::size_t>(start_offset_bins);
  if (rows == 0) rows = offset + projected.samples.size();
  if (offset >= rows) {
    throw ArgumentError("offset " + std::to_string(offset) + " places the pattern outside a " +
                        std::to_string(rows) + "-row block");
  }

  SpectrogramBlock block;
  block.rows = rows;
  block.cols = channel.num_channels;
  block.bin_duration = channel.rx_bin_duration;
  block.channel_bandwidth_hz = static_cast<std::uint64_t>(std::llround(channel.channel_bandwidth_hz));
  block.center_frequency_hz = static_cast<std::uint64_t>(std::llround(channel.center_frequency_hz));
  block.power.resize(rows * block.cols);

  SquareLawNoise noise(channel.noise_seed, cal.noise_power);
  const std::size_t wm = channel.watermark_channel_index;
  for (std::size_t r = 0; r < rows; ++r) {
    const bool inside = r >= offset && r - offset < projected.samples.size();
    for (std::size_t c = 0; c < block.cols; ++c) {
      const double signal = (c == wm && inside) ? gain * projected.samples[r - offset] : 0.0;
      block.power[r * block.cols + c] = static_cast<float>(noise(signal));
    }
  }

  if (truth) block.ground_truth = GroundTruth{std::move(*truth), start_offset_bins, channel.snr_db};
  return block;
}

}  // namespace psym
