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

// On-disk formats.
//
// Spectrogram file (.psymspec), all integers little-endian:
//
//   offset  size  field
//        0     8  magic "PSYMSPEC"
//        8     4  version (u32, currently 1)
//       12     8  rows (u64, time bins)
//       20     8  cols (u64, frequency channels)
//       28     8  bin_duration_ns (u64)
//       36     8  channel_bandwidth_hz (u64)
//       44     8  center_frequency_hz (u64)
//       52     4  value_encoding (u32, 0 = f32 LE linear power)
//       56        rows * cols * 4 bytes, row-major (one row per time bin)
//
// Ground truth sidecar (<file>.truth), UTF-8 lines:
//
//   bits=<0/1 string>
//   offset=<int>
//   snr_db=<float|inf>
//
// Result CSV: label,snr_db,total_bits,bit_errors,pe,sync_offset_error_bins

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "psym/channel.hpp"
#include "psym/error.hpp"
#include "psym/watermark.hpp"

namespace psym {

inline constexpr std::array<char, 8> kSpectrogramMagic{'P', 'S', 'Y', 'M', 'S', 'P', 'E', 'C'};
inline constexpr std::uint32_t kSpectrogramVersion = 1;
inline constexpr std::uint32_t kEncodingF32Le = 0;
inline constexpr std::size_t kSpectrogramHeaderBytes = 56;

struct SpectrogramFileHeader {
  std::array<char, 8> magic = kSpectrogramMagic;
  std::uint32_t version = kSpectrogramVersion;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t bin_duration_ns = 0;
  std::uint64_t channel_bandwidth_hz = 0;
  std::uint64_t center_frequency_hz = 0;
  std::uint32_t value_encoding = kEncodingF32Le;

  friend bool operator==(const SpectrogramFileHeader&, const SpectrogramFileHeader&) = default;
};

namespace detail {

template <class T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFFu));
  }
}

template <class T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s, const std::string& what) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("cannot parse " + what + " from \"" + std::string(s) + "\"");
  }
  return v;
}

template <class Int>
Int parse_int(std::string_view s, const std::string& what) {
  Int v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("cannot parse " + what + " from \"" + std::string(s) + "\"");
  }
  return v;
}

inline std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + path.string());
  return std::move(ss).str();
}

inline void write_all(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace detail

inline std::filesystem::path truth_path_for(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".truth");
}

inline std::string encode_header(const SpectrogramFileHeader& h) {
  std::string out(h.magic.begin(), h.magic.end());
  detail::put_le(out, h.version);
  detail::put_le(out, h.rows);
  detail::put_le(out, h.cols);
  detail::put_le(out, h.bin_duration_ns);
  detail::put_le(out, h.channel_bandwidth_hz);
  detail::put_le(out, h.center_frequency_hz);
  detail::put_le(out, h.value_encoding);
  return out;
}

inline SpectrogramFileHeader decode_header(std::string_view bytes, const std::string& where) {
  if (bytes.size() < kSpectrogramHeaderBytes) {
    throw FormatError(where + ": " + std::to_string(bytes.size()) +
                      " bytes is shorter than the spectrogram header");
  }
  SpectrogramFileHeader h;
  std::memcpy(h.magic.data(), bytes.data(), 8);
  if (h.magic != kSpectrogramMagic) throw FormatError(where + ": bad magic, not a spectrogram file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  h.version = detail::get_le<std::uint32_t>(p + 8);
  h.rows = detail::get_le<std::uint64_t>(p + 12);
  h.cols = detail::get_le<std::uint64_t>(p + 20);
  h.bin_duration_ns = detail::get_le<std::uint64_t>(p + 28);
  h.channel_bandwidth_hz = detail::get_le<std::uint64_t>(p + 36);
  h.center_frequency_hz = detail::get_le<std::uint64_t>(p + 44);
  h.value_encoding = detail::get_le<std::uint32_t>(p + 52);
  if (h.version != kSpectrogramVersion) {
    throw FormatError(where + ": unsupported version " + std::to_string(h.version));
  }
  if (h.value_encoding != kEncodingF32Le) {
    throw FormatError(where + ": unsupported value encoding " + std::to_string(h.value_encoding));
  }
  if (h.bin_duration_ns == 0) throw FormatError(where + ": zero bin duration");
  return h;
}

inline std::string render_truth(const GroundTruth& truth) {
  return "bits=" + truth.bits.to_bit_string() + "\noffset=" + std::to_string(truth.start_offset_bins) +
         "\nsnr_db=" + detail::format_double(truth.snr_db) + "\n";
}

inline GroundTruth parse_truth(std::string_view text, const std::string& where) {
  GroundTruth t;
  bool have_bits = false, have_offset = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(where + ": malformed line \"" + line + "\"");
    const std::string key = line.substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    if (key == "bits") {
      std::vector<std::uint8_t> bits;
      for (char c : value) {
        if (c != '0' && c != '1') throw FormatError(where + ": bits must be a 0/1 string");
        bits.push_back(c == '1' ? 1 : 0);
      }
      t.bits = PseudonymPacket(std::move(bits));
      have_bits = true;
    } else if (key == "offset") {
      t.start_offset_bins = detail::parse_int<std::int64_t>(value, "offset");
      have_offset = true;
    } else if (key == "snr_db") {
      t.snr_db = detail::parse_double(value, "snr_db");
    }
  }
  if (!have_bits || !have_offset) throw FormatError(where + ": truth file lacks bits or offset");
  return t;
}

inline void write_spectrogram(const std::filesystem::path& path, const SpectrogramBlock& block) {
  if (block.power.size() != block.rows * block.cols) {
    throw ArgumentError("block power has " + std::to_string(block.power.size()) + " values for " +
                        std::to_string(block.rows) + "x" + std::to_string(block.cols));
  }
  for (float v : block.power) {
    if (!std::isfinite(v) || v < 0.0f) {
      throw DataError("refusing to write non-finite or negative power to " + path.string());
    }
  }
  SpectrogramFileHeader h;
  h.rows = block.rows;
  h.cols = block.cols;
  h.bin_duration_ns = block.bin_duration.nanoseconds();
  h.channel_bandwidth_hz = block.channel_bandwidth_hz;
  h.center_frequency_hz = block.center_frequency_hz;

  std::string bytes = encode_header(h);
  bytes.reserve(bytes.size() + block.power.size() * 4);
  for (float v : block.power) detail::put_le(bytes, std::bit_cast<std::uint32_t>(v));
  detail::write_all(path, bytes);

  const auto truth = truth_path_for(path);
  if (block.ground_truth) {
    detail::write_all(truth, render_truth(*block.ground_truth));
  } else {
    std::error_code ec;
    std::filesystem::remove(truth, ec);
  }
}

inline SpectrogramFileHeader read_spectrogram_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string bytes(kSpectrogramHeaderBytes, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  return decode_header(bytes, path.string());
}

inline SpectrogramBlock read_spectrogram(const std::filesystem::path& path) {
  const std::string bytes = detail::read_all(path);
  const SpectrogramFileHeader h = decode_header(bytes, path.string());

  const std::uint64_t payload = bytes.size() - kSpectrogramHeaderBytes;
  if (h.cols != 0 && h.rows > std::numeric_limits<std::uint64_t>::max() / 4 / h.cols) {
    throw CorruptionError(path.string() + ": header dimensions overflow");
  }
  const std::uint64_t expected = h.rows * h.cols * 4;
  if (payload != expected) {
    throw CorruptionError(path.string() + ": payload is " + std::to_string(payload) +
                          " bytes, header implies " + std::to_string(expected));
  }

  SpectrogramBlock block;
  block.rows = h.rows;
  block.cols = h.cols;
  block.bin_duration = Seconds::from_nanoseconds(h.bin_duration_ns);
  block.channel_bandwidth_hz = h.channel_bandwidth_hz;
  block.center_frequency_hz = h.center_frequency_hz;
  block.power.resize(h.rows * h.cols);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + kSpectrogramHeaderBytes;
  for (std::size_t i = 0; i < block.power.size(); ++i) {
    block.power[i] = std::bit_cast<float>(detail::get_le<std::uint32_t>(p + 4 * i));
  }

  const auto truth = truth_path_for(path);
  if (std::filesystem::exists(truth)) {
    block.ground_truth = parse_truth(detail::read_all(truth), truth.string());
  }
  return block;
}

struct ExperimentRecord {
  std::string label;
  double snr_db = 0.0;
  std::uint64_t total_bits = 0;
  std::uint64_t bit_errors = 0;
  std::optional<std::int64_t> sync_offset_error_bins;
  /// Set when the point could not be evaluated; rendered with an empty pe.
  bool failed = false;

  double pe() const {
    return total_bits == 0 ? 0.0 : static_cast<double>(bit_errors) / static_cast<double>(total_bits);
  }
  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

inline constexpr std::string_view kRecordsCsvHeader =
    "label,snr_db,total_bits,bit_errors,pe,sync_offset_error_bins";

inline std::string render_records_csv(std::vector<ExperimentRecord> records) {
  if (records.empty()) throw ArgumentError("no records to export");
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.snr_db < b.snr_db; });
  std::string out(kRecordsCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    if (r.label.find_first_of(",\n\"") != std::string::npos) {
      throw ArgumentError("record label may not contain commas, quotes or newlines");
    }
    out += r.label;
    out += ',';
    out += detail::format_double(r.snr_db);
    out += ',';
    out += std::to_string(r.total_bits);
    out += ',';
    out += std::to_string(r.bit_errors);
    out += ',';
    if (!r.failed) out += detail::format_double(r.pe());
    out += ',';
    if (r.sync_offset_error_bins) out += std::to_string(*r.sync_offset_error_bins);
    out += '\n';
  }
  return out;
}

inline void export_records_csv(const std::vector<ExperimentRecord>& records,
                               const std::filesystem::path& path) {
  detail::write_all(path, render_records_csv(records));
}

inline std::vector<ExperimentRecord> parse_records_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kRecordsCsvHeader) {
    throw FormatError("CSV header does not match \"" + std::string(kRecordsCsvHeader) + "\"");
  }
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      f.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (f.size() != 6) throw FormatError("CSV row has " + std::to_string(f.size()) + " fields");
    ExperimentRecord r;
    r.label = f[0];
    r.snr_db = detail::parse_double(f[1], "snr_db");
    r.total_bits = detail::parse_int<std::uint64_t>(f[2], "total_bits");
    r.bit_errors = detail::parse_int<std::uint64_t>(f[3], "bit_errors");
    r.failed = f[4].empty();
    if (!f[5].empty()) r.sync_offset_error_bins = detail::parse_int<std::int64_t>(f[5], "sync offset");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ExperimentRecord> read_records_csv(const std::filesystem::path& path) {
  return parse_records_csv(detail::read_all(path));
}

}  // namespace psym
