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

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "gtest/gtest.h"
#include "psym/dataset_io.hpp"

using namespace psym;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("psym-io-" + std::string(info->test_suite_name()) + "-" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

SpectrogramBlock random_block(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<float> e(1.0f);
  SpectrogramBlock b;
  b.rows = rows;
  b.cols = cols;
  for (std::size_t i = 0; i < rows * cols; ++i) b.power.push_back(e(rng));
  return b;
}

void truncate_file(const fs::path& p, std::size_t drop) {
  std::string bytes = detail::read_all(p);
  bytes.resize(bytes.size() - drop);
  detail::write_all(p, bytes);
}

}  // namespace

TEST(SpectrogramFile, SizeIsHeaderPlusPayload) {
  TempDir dir;
  const auto p = dir / "a.psymspec";
  write_spectrogram(p, random_block(2, 3, 1));
  EXPECT_EQ(fs::file_size(p), 56u + 24u);
  EXPECT_FALSE(fs::exists(truth_path_for(p)));
}

TEST(SpectrogramFile, HeaderLayoutIsLittleEndian) {
  SpectrogramFileHeader h;
  h.rows = 0x0102;
  h.cols = 853;
  h.bin_duration_ns = 11111;
  const std::string b = encode_header(h);
  ASSERT_EQ(b.size(), kSpectrogramHeaderBytes);
  EXPECT_EQ(b.substr(0, 8), "PSYMSPEC");
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(b[12]), 0x02u);
  EXPECT_EQ(static_cast<unsigned char>(b[13]), 0x01u);
  EXPECT_EQ(decode_header(b, "mem"), h);
}

TEST(SpectrogramFile, RoundTripIsBitExact) {
  TempDir dir;
  const auto p = dir / "b.psymspec";
  auto block = random_block(300, 17, 2);
  block.power[5] = 0.0f;
  block.power[6] = std::numeric_limits<float>::denorm_min();
  block.power[7] = std::numeric_limits<float>::max();
  block.ground_truth = GroundTruth{PseudonymPacket::from_hex("A5C3F01"), 1234, -8.5};
  write_spectrogram(p, block);
  const auto back = read_spectrogram(p);
  EXPECT_EQ(back.rows, block.rows);
  EXPECT_EQ(back.cols, block.cols);
  ASSERT_EQ(back.power.size(), block.power.size());
  EXPECT_EQ(std::memcmp(back.power.data(), block.power.data(), block.power.size() * 4), 0);
  EXPECT_EQ(back.bin_duration, Seconds::period_of_hz(90'000));
  EXPECT_EQ(back.channel_bandwidth_hz, block.channel_bandwidth_hz);
  EXPECT_EQ(back.center_frequency_hz, block.center_frequency_hz);
  EXPECT_EQ(back.ground_truth, block.ground_truth);
}

TEST(SpectrogramFile, NoiselessTruthRoundTrips) {
  TempDir dir;
  const auto p = dir / "c.psymspec";
  auto block = random_block(1, 1, 3);
  block.ground_truth = GroundTruth{PseudonymPacket::from_uint(1), 0, kNoiselessSnrDb};
  write_spectrogram(p, block);
  EXPECT_EQ(read_spectrogram(p).ground_truth, block.ground_truth);
  // Rewriting without truth drops the stale sidecar.
  block.ground_truth.reset();
  write_spectrogram(p, block);
  EXPECT_FALSE(read_spectrogram(p).ground_truth.has_value());
}

TEST(SpectrogramFile, NonFiniteOrNegativeIsRejected) {
  TempDir dir;
  auto block = random_block(2, 2, 4);
  block.power[1] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(write_spectrogram(dir / "n.psymspec", block), DataError);
  block.power[1] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(write_spectrogram(dir / "n.psymspec", block), DataError);
  block.power[1] = -1.0f;
  EXPECT_THROW(write_spectrogram(dir / "n.psymspec", block), DataError);
  EXPECT_FALSE(fs::exists(dir / "n.psymspec"));
}

TEST(SpectrogramFile, BadMagicIsFormatError) {
  TempDir dir;
  const auto p = dir / "m.psymspec";
  write_spectrogram(p, random_block(2, 2, 5));
  std::string bytes = detail::read_all(p);
  bytes[0] = 'X';
  detail::write_all(p, bytes);
  EXPECT_THROW(read_spectrogram(p), FormatError);
}

TEST(SpectrogramFile, BadVersionOrEncodingIsFormatError) {
  TempDir dir;
  const auto p = dir / "v.psymspec";
  write_spectrogram(p, random_block(2, 2, 6));
  std::string bytes = detail::read_all(p);
  bytes[8] = 2;
  detail::write_all(p, bytes);
  EXPECT_THROW(read_spectrogram(p), FormatError);
  bytes[8] = 1;
  bytes[52] = 7;
  detail::write_all(p, bytes);
  EXPECT_THROW(read_spectrogram(p), FormatError);
}

TEST(SpectrogramFile, ShortPayloadIsCorruption) {
  TempDir dir;
  const auto p = dir / "t.psymspec";
  write_spectrogram(p, random_block(10, 4, 7));
  truncate_file(p, 4);
  try {
    read_spectrogram(p);
    FAIL() << "no exception";
  } catch (const CorruptionError& e) {
    EXPECT_NE(std::string(e.what()).find("payload is 156 bytes, header implies 160"), std::string::npos)
        << e.what();
  }
}

TEST(SpectrogramFile, EveryTruncationAndExtensionIsRejected) {
  TempDir dir;
  const auto good = dir / "g.psymspec";
  write_spectrogram(good, random_block(3, 5, 8));
  const std::string bytes = detail::read_all(good);
  const auto p = dir / "f.psymspec";
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    detail::write_all(p, bytes.substr(0, len));
    EXPECT_THROW(read_spectrogram(p), FormatError) << len;
  }
  for (std::size_t extra : {1u, 3u, 4u, 100u}) {
    detail::write_all(p, bytes + std::string(extra, '\0'));
    EXPECT_THROW(read_spectrogram(p), CorruptionError) << extra;
  }
}

TEST(SpectrogramFile, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_THROW(read_spectrogram(dir / "absent.psymspec"), IoError);
}

TEST(SpectrogramFile, MalformedTruthIsFormatError) {
  TempDir dir;
  const auto p = dir / "x.psymspec";
  write_spectrogram(p, random_block(1, 1, 9));
  detail::write_all(truth_path_for(p), "bits=10201\noffset=3\n");
  EXPECT_THROW(read_spectrogram(p), FormatError);
  detail::write_all(truth_path_for(p), "bits=101\n");
  EXPECT_THROW(read_spectrogram(p), FormatError);
}

TEST(RecordsCsv, ExampleRow) {
  ExperimentRecord r;
  r.label = "g10";
  r.snr_db = -8;
  r.total_bits = 10'000;
  r.bit_errors = 80;
  EXPECT_EQ(render_records_csv({r}),
            "label,snr_db,total_bits,bit_errors,pe,sync_offset_error_bins\ng10,-8,10000,80,0.008,\n");
}

TEST(RecordsCsv, SortedBySnrAndFailedRowsHaveEmptyPe) {
  ExperimentRecord a{"a", -5, 100, 1, 3, false};
  ExperimentRecord b{"b", -15, 100, 50, std::nullopt, true};
  ExperimentRecord c{"c", -10.5, 100, 0, -2, false};
  EXPECT_EQ(render_records_csv({a, b, c}),
            "label,snr_db,total_bits,bit_errors,pe,sync_offset_error_bins\n"
            "b,-15,100,50,,\n"
            "c,-10.5,100,0,0,-2\n"
            "a,-5,100,1,0.01,3\n");
}

TEST(RecordsCsv, EmptyIsArgumentError) { EXPECT_THROW(render_records_csv({}), ArgumentError); }

TEST(RecordsCsv, ExportParsesBackToEqualRecords) {
  TempDir dir;
  std::mt19937_64 rng(10);
  std::vector<ExperimentRecord> recs;
  for (int i = 0; i < 25; ++i) {
    ExperimentRecord r;
    r.label = "p" + std::to_string(i);
    r.snr_db = -15.0 + 0.37 * i;
    r.total_bits = 10'000 + rng() % 100;
    r.bit_errors = rng() % 1000;
    if (i % 3) r.sync_offset_error_bins = static_cast<std::int64_t>(rng() % 9) - 4;
    r.failed = i == 7;
    recs.push_back(r);
  }
  export_records_csv(recs, dir / "r.csv");
  EXPECT_EQ(read_records_csv(dir / "r.csv"), recs);
}

TEST(RecordsCsv, BadHeaderOrRowIsFormatError) {
  EXPECT_THROW(parse_records_csv("snr,pe\n-8,0.1\n"), FormatError);
  EXPECT_THROW(parse_records_csv(std::string(kRecordsCsvHeader) + "\na,1,2\n"), FormatError);
  EXPECT_THROW(parse_records_csv(std::string(kRecordsCsvHeader) + "\na,x,2,3,0.1,\n"), FormatError);
}
