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

// Experiment drivers behind the psym command line: seeded dataset
// generation, file detection and Pe-vs-SNR sweeps.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "psym/channel.hpp"
#include "psym/dataset_io.hpp"
#include "psym/detector.hpp"
#include "psym/error.hpp"
#include "psym/watermark.hpp"

namespace psym {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // I/O and anything not covered below
  kExitNoSignal = 2,
  kExitFormatError = 3,
  kExitArgumentError = 4,
};

/// Stderr logger whose verbosity comes from PSYM_LOG (quiet, info, debug;
/// default info). Each message is emitted with a single write.
class Logger {
 public:
  enum class Level { kQuiet = 0, kInfo = 1, kDebug = 2 };

  Logger() : level_(from_env()) {}
  explicit Logger(Level level) : level_(level) {}

  static Level from_env() {
    const char* env = std::getenv("PSYM_LOG");
    if (env == nullptr) return Level::kInfo;
    const std::string_view v(env);
    if (v == "quiet" || v == "off" || v == "0") return Level::kQuiet;
    if (v == "debug" || v == "2") return Level::kDebug;
    return Level::kInfo;
  }

  void info(const std::string& msg) { emit(Level::kInfo, msg); }
  void debug(const std::string& msg) { emit(Level::kDebug, msg); }

 private:
  void emit(Level at, const std::string& msg) {
    if (static_cast<int>(level_) < static_cast<int>(at)) return;
    const std::string line = "[psym] " + msg + "\n";
    std::lock_guard lock(mu_);
    std::fwrite(line.data(), 1, line.size(), stderr);
    std::fflush(stderr);
  }

  Level level_;
  std::mutex mu_;
};

struct SweepConfig {
  std::vector<double> snr_points_db = {-15, -14, -13, -12, -11, -10, -9, -8, -7, -6, -5};
  std::uint64_t bits_per_point = 10'000;
  PseudonymPacket packet = PseudonymPacket::from_hex("A5C3F01");
  std::uint64_t seed = 1;
  WatermarkConfig watermark;
  ChannelConfig channel = [] {
    ChannelConfig c;
    c.num_channels = 1;
    c.watermark_channel_index = 0;
    c.convention_offset_db = kReferenceSnrOffsetDb;
    return c;
  }();
  /// Sweeps split each point into blocks of at most this many packets,
  /// each with its own random start offset and noise seed.
  std::size_t packets_per_block = 40;

  std::size_t packets_per_point() const {
    const std::size_t b = watermark.bits_per_packet;
    return static_cast<std::size_t>((bits_per_point + b - 1) / b);
  }

  void validate() const {
    watermark.validate();
    ChannelConfig probe = channel;
    probe.snr_db = 0.0;
    probe.validate();
    if (snr_points_db.empty()) throw ArgumentError("at least one SNR point is required");
    for (double s : snr_points_db) {
      if (!std::isfinite(s) && !(std::isinf(s) && s > 0)) throw ArgumentError("SNR points must be numbers");
    }
    if (bits_per_point < watermark.bits_per_packet) {
      throw ArgumentError("bits per point (" + std::to_string(bits_per_point) +
                          ") must cover at least one packet of " +
                          std::to_string(watermark.bits_per_packet) + " bits");
    }
    if (packet.size() != watermark.bits_per_packet) {
      throw ArgumentError("packet has " + std::to_string(packet.size()) + " bits, expected " +
                          std::to_string(watermark.bits_per_packet));
    }
    if (packets_per_block == 0) throw ArgumentError("packets_per_block must be positive");
  }
};

/// "-15,-10,-5" or an inclusive range "start:stop:step".
inline std::vector<double> parse_snr_list(std::string_view text) {
  std::vector<double> out;
  const std::string s(text);
  if (s.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (true) {
      const auto colon = s.find(':', pos);
      try {
        parts.push_back(detail::parse_double(s.substr(pos, colon - pos), "SNR range"));
      } catch (const FormatError& e) {
        throw ArgumentError(e.what());
      }
      if (colon == std::string::npos) break;
      pos = colon + 1;
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw ArgumentError("SNR range must be start:stop:step with step > 0 and stop >= start");
    }
    const auto steps = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    if (steps > 100'000) throw ArgumentError("SNR range has too many points");
    for (std::size_t i = 0; i <= steps; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
    return out;
  }
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    std::string item = s.substr(pos, comma - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw ArgumentError("empty entry in SNR list \"" + s + "\"");
    try {
      out.push_back(detail::parse_double(item, "SNR"));
    } catch (const FormatError& e) {
      throw ArgumentError(e.what());
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// Applies `key = value` lines ('#' starts a comment) on top of `config`.
inline void apply_config_text(SweepConfig& config, std::string_view text,
                              const std::string& where = "config") {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string at = where + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ArgumentError(at + ": expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));

    auto num = [&](const char* what) {
      try {
        return detail::parse_double(value, what);
      } catch (const FormatError&) {
        throw ArgumentError(at + ": " + what + " is not a number: \"" + value + "\"");
      }
    };
    auto count = [&](const char* what) {
      try {
        return detail::parse_int<std::uint64_t>(value, what);
      } catch (const FormatError&) {
        throw ArgumentError(at + ": " + what + " is not a non-negative integer: \"" + value + "\"");
      }
    };

    if (key == "seed") {
      config.seed = count("seed");
    } else if (key == "packet") {
      config.packet = PseudonymPacket::from_hex(value);
    } else if (key == "snr") {
      config.snr_points_db = parse_snr_list(value);
    } else if (key == "bits") {
      config.bits_per_point = count("bits");
    } else if (key == "snr_offset_db") {
      config.channel.convention_offset_db = num("snr_offset_db");
    } else if (key == "attenuation_db") {
      config.channel.attenuation_db = num("attenuation_db");
    } else if (key == "num_channels") {
      config.channel.num_channels = count("num_channels");
    } else if (key == "watermark_channel") {
      config.channel.watermark_channel_index = count("watermark_channel");
    } else if (key == "rx_bin_hz") {
      config.channel.rx_bin_duration = Seconds::period_of_hz(static_cast<std::int64_t>(count("rx_bin_hz")));
    } else if (key == "center_frequency_hz") {
      config.channel.center_frequency_hz = num("center_frequency_hz");
    } else if (key == "samples_per_chip") {
      config.watermark.samples_per_chip = count("samples_per_chip");
    } else if (key == "high_power") {
      config.watermark.high_power = num("high_power");
    } else if (key == "low_power") {
      config.watermark.low_power = num("low_power");
    } else if (key == "tx_symbol_hz") {
      config.watermark.tx_symbol_duration =
          Seconds::period_of_hz(static_cast<std::int64_t>(count("tx_symbol_hz")));
    } else if (key == "packets_per_block") {
      config.packets_per_block = count("packets_per_block");
    } else {
      throw ArgumentError(at + ": unknown key \"" + key + "\"");
    }
  }
}

inline void load_config_file(SweepConfig& config, const std::filesystem::path& path) {
  apply_config_text(config, detail::read_all(path), path.string());
}

/// Deterministic 64-bit seed for stream (a, b) of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), 0x5053594du};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline std::string snr_label(double snr_db) { return "snr" + detail::format_double(snr_db); }

/// One simulated block of `packets` back-to-back packets at SNR point
/// `point`, started at a seeded offset within the first packet period.
inline SpectrogramBlock simulate_point_block(const SweepConfig& config, std::size_t point,
                                             std::size_t block_index, std::size_t packets) {
  const std::uint64_t s = derive_seed(config.seed, point, block_index);
  std::mt19937_64 rng(s);
  ChannelConfig channel = config.channel;
  channel.snr_db = config.snr_points_db.at(point);
  channel.noise_seed = rng();
  const TxPowerPattern one = encode_packet(config.packet, config.watermark);
  const std::size_t period_bins = project_to_rx_resolution(one, channel.rx_bin_duration).samples.size();
  const auto offset = static_cast<std::int64_t>(rng() % period_bins);

  const StreamPattern stream = encode_stream(
      config.packet, config.watermark.packet_duration() * static_cast<std::int64_t>(packets),
      config.watermark);
  return simulate_rx_spectrogram(stream.pattern, channel, offset, config.watermark, config.packet);
}

/// Simulate-and-decode until bits_per_point bits are decoded. Blocks that
/// fail sync are still decoded (forced) so Pe reflects chance-level errors.
inline ExperimentRecord run_point(const SweepConfig& config, std::size_t point) {
  ExperimentRecord rec;
  rec.snr_db = config.snr_points_db.at(point);
  rec.label = snr_label(rec.snr_db);

  const std::size_t bits_per_packet = config.watermark.bits_per_packet;
  DecodeOptions options;
  options.force = true;
  // A misplaced sync can cost a block one packet span, so count decoded
  // bits rather than simulated packets.
  for (std::size_t block = 0; rec.total_bits < config.bits_per_point; ++block) {
    const std::size_t missing = static_cast<std::size_t>(config.bits_per_point - rec.total_bits);
    const std::size_t packets =
        std::min(config.packets_per_block, (missing + bits_per_packet - 1) / bits_per_packet);
    const SpectrogramBlock b = simulate_point_block(config, point, block, packets);
    const DetectionReport r = decode_block(b, config.channel.watermark_channel_index, config.packet,
                                           config.watermark, {}, options);
    if (r.total_bits == 0) throw Error("block " + std::to_string(block) + " decoded no bits");
    rec.total_bits += r.total_bits;
    rec.bit_errors += r.bit_errors.value_or(0);
    if (r.sync_offset_error_bins) {
      const std::int64_t e = *r.sync_offset_error_bins;
      if (!rec.sync_offset_error_bins || std::llabs(e) > std::llabs(*rec.sync_offset_error_bins)) {
        rec.sync_offset_error_bins = e;
      }
    }
  }
  return rec;
}

/// Runs every SNR point on up to `threads` workers (0 = hardware
/// concurrency). Results are sorted by SNR and independent of scheduling.
inline std::vector<ExperimentRecord> run_sweep(const SweepConfig& config, Logger* log = nullptr,
                                               unsigned threads = 0) {
  config.validate();
  const std::size_t n = config.snr_points_db.size();
  std::vector<ExperimentRecord> records(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        records[i] = run_point(config, i);
        if (log) {
          log->info(records[i].label + ": " + std::to_string(records[i].bit_errors) + "/" +
                    std::to_string(records[i].total_bits) + " errors, pe " +
                    detail::format_double(records[i].pe()));
        }
      } catch (const Error& e) {
        records[i] = ExperimentRecord{};
        records[i].snr_db = config.snr_points_db[i];
        records[i].label = snr_label(config.snr_points_db[i]);
        records[i].failed = true;
        if (log) log->info(records[i].label + ": FAILED: " + e.what());
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.snr_db < b.snr_db; });
  return records;
}

/// Two-column "snr_db pe" text for log-scale plotting. Points with no
/// errors are drawn at 1/(2N) and tagged; failed points are commented out.
inline std::string render_plot(const std::vector<ExperimentRecord>& records) {
  std::string out = "# snr_db pe\n";
  bool any_floor = false;
  for (const auto& r : records) {
    if (!r.failed && r.total_bits > 0 && r.bit_errors == 0) any_floor = true;
  }
  if (any_floor) out += "# pe=0 points are drawn at the floor 1/(2*total_bits), marked 'floor'\n";
  for (const auto& r : records) {
    const std::string snr = detail::format_double(r.snr_db);
    if (r.failed || r.total_bits == 0) {
      out += "# " + snr + " failed\n";
    } else if (r.bit_errors == 0) {
      out += snr + " " + detail::format_double(1.0 / (2.0 * static_cast<double>(r.total_bits))) +
             " # floor\n";
    } else {
      out += snr + " " + detail::format_double(r.pe()) + "\n";
    }
  }
  return out;
}

struct ManifestEntry {
  std::filesystem::path path;
  double snr_db = 0.0;
  std::size_t rows = 0;
  std::size_t packets = 0;
  bool ok = false;
  std::string error;
};

inline std::string spectrogram_file_name(std::size_t index, double snr_db) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "point%02zu_", index);
  return std::string(buf) + snr_label(snr_db) + ".psymspec";
}

/// Writes one spectrogram (plus truth sidecar) per SNR point into `out_dir`.
/// Each point holds packets_per_point() packets after a seeded offset. Files
/// are written to a temporary name and renamed, so a reported failure never
/// leaves a half-written .psymspec behind.
inline std::vector<ManifestEntry> simulate_dataset(const SweepConfig& config,
                                                   const std::filesystem::path& out_dir,
                                                   Logger* log = nullptr) {
  config.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(out_dir, ec)) {
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  }
  {
    const fs::path probe = out_dir / ".psym-write-probe";
    try {
      detail::write_all(probe, "");
    } catch (const IoError&) {
      throw IoError("output directory " + out_dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
  }

  std::vector<ManifestEntry> manifest;
  for (std::size_t i = 0; i < config.snr_points_db.size(); ++i) {
    ManifestEntry e;
    e.snr_db = config.snr_points_db[i];
    e.path = out_dir / spectrogram_file_name(i, e.snr_db);
    e.packets = config.packets_per_point();
    try {
      const SpectrogramBlock block = simulate_point_block(config, i, 0, e.packets);
      e.rows = block.rows;
      const fs::path tmp = fs::path(e.path.string() + ".tmp");
      SpectrogramBlock staged = block;
      staged.ground_truth.reset();
      write_spectrogram(tmp, staged);
      detail::write_all(truth_path_for(e.path), render_truth(*block.ground_truth));
      fs::rename(tmp, e.path);
      e.ok = true;
      if (log) log->debug("wrote " + e.path.string());
    } catch (const Error& err) {
      e.error = err.what();
      fs::remove(fs::path(e.path.string() + ".tmp"), ec);
      if (log) log->info("failed " + e.path.string() + ": " + e.error);
    } catch (const fs::filesystem_error& err) {
      e.error = err.what();
      if (log) log->info("failed " + e.path.string() + ": " + e.error);
    }
    manifest.push_back(std::move(e));
  }
  return manifest;
}

inline std::string render_manifest(const std::vector<ManifestEntry>& manifest) {
  std::string out;
  bool partial = false;
  for (const auto& e : manifest) {
    if (e.ok) {
      out += e.path.string() + "\tsnr_db=" + detail::format_double(e.snr_db) +
             "\trows=" + std::to_string(e.rows) + "\tpackets=" + std::to_string(e.packets) + "\n";
    } else {
      partial = true;
      out += "# FAILED " + e.path.string() + ": " + e.error + "\n";
    }
  }
  if (partial) out += "# manifest is partial\n";
  return out;
}

inline std::string render_report_text(const DetectionReport& r) {
  std::ostringstream out;
  if (r.status == DetectionStatus::kNoSignal) {
    out << "no signal detected (sync confidence " << detail::format_double(r.sync.confidence)
        << " < " << detail::format_double(kSyncRejectThreshold) << ")\n";
    if (r.total_bits == 0) return out.str();
  }
  out << "sync start_bin " << r.sync.start_bin << ", peak correlation "
      << detail::format_double(r.sync.peak_correlation) << ", confidence "
      << detail::format_double(r.sync.confidence) << "\n";
  out << "decoded " << r.packet_origins.size() << " packets, " << r.total_bits << " bits\n";
  const std::size_t show = std::min<std::size_t>(r.decoded_bits.size(), 28);
  if (show > 0) {
    out << "first packet bits ";
    for (std::size_t i = 0; i < show; ++i) out << static_cast<int>(r.decoded_bits[i]);
    out << "\n";
  }
  const auto flagged = std::count(r.low_confidence.begin(), r.low_confidence.end(), std::uint8_t{1});
  if (flagged > 0) out << flagged << " bits decided on a zero metric\n";
  if (r.pe) {
    out << "bit errors " << *r.bit_errors << " / " << r.total_bits << ", pe "
        << detail::format_double(*r.pe) << "\n";
  }
  if (r.sync_offset_error_bins) out << "sync offset error " << *r.sync_offset_error_bins << " bins\n";
  return out.str();
}

}  // namespace psym
