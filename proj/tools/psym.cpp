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

// psym: simulate watermarked spectrograms, detect pseudonyms in them and
// sweep Pe against SNR.
//
// Exit status: 0 success, 1 I/O or other failure, 2 no signal detected,
// 3 malformed or corrupted input file, 4 bad arguments or configuration.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "psym/psym.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> packet;
  std::optional<std::string> snr;
  std::optional<std::uint64_t> bits;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master RNG seed");
  cmd->add_option("--packet", f.packet, "28-bit pseudonym as 7 hex digits");
  cmd->add_option("--snr", f.snr, "SNR points in dB: a,b,c or start:stop:step");
  cmd->add_option("--bits", f.bits, "bits per SNR point");
}

psym::SweepConfig build_config(const CommonFlags& f) {
  psym::SweepConfig c;
  if (!f.config_path.empty()) psym::load_config_file(c, f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (f.packet) c.packet = psym::PseudonymPacket::from_hex(*f.packet);
  if (f.snr) c.snr_points_db = psym::parse_snr_list(*f.snr);
  if (f.bits) c.bits_per_point = *f.bits;
  c.validate();
  return c;
}

int run_simulate(const CommonFlags& f, const std::string& out_dir, psym::Logger& log) {
  const psym::SweepConfig config = build_config(f);
  const auto manifest = psym::simulate_dataset(config, out_dir, &log);
  std::cout << psym::render_manifest(manifest);
  for (const auto& e : manifest) {
    if (!e.ok) return psym::kExitFailure;
  }
  return psym::kExitOk;
}

int run_detect(const CommonFlags& f, const std::string& file, std::optional<std::size_t> channel,
               const std::string& format, bool force, bool resync, psym::Logger& log) {
  const psym::SweepConfig config = build_config(f);
  const psym::SpectrogramBlock block = psym::read_spectrogram(file);
  std::size_t index = channel.value_or(config.channel.watermark_channel_index);
  if (!channel && block.cols == 853 && config.channel.num_channels == 1) {
    index = psym::ChannelConfig{}.watermark_channel_index;
  }
  psym::DecodeOptions options;
  options.force = force;
  options.resync_per_packet = resync;
  log.debug("decoding channel " + std::to_string(index) + " of " + std::to_string(block.cols));
  const psym::DetectionReport report =
      psym::decode_block(block, index, config.packet, config.watermark, {}, options);

  if (format == "csv") {
    psym::ExperimentRecord rec;
    rec.label = std::filesystem::path(file).stem().string();
    rec.snr_db = block.ground_truth ? block.ground_truth->snr_db : 0.0;
    rec.total_bits = report.total_bits;
    rec.bit_errors = report.bit_errors.value_or(0);
    rec.sync_offset_error_bins = report.sync_offset_error_bins;
    rec.failed = report.status == psym::DetectionStatus::kNoSignal && report.total_bits == 0;
    std::cout << psym::render_records_csv({rec});
  } else {
    std::cout << psym::render_report_text(report);
  }
  return report.status == psym::DetectionStatus::kNoSignal ? psym::kExitNoSignal : psym::kExitOk;
}

int run_sweep(const CommonFlags& f, const std::string& out_csv, const std::string& plot_path,
              unsigned threads, psym::Logger& log) {
  const psym::SweepConfig config = build_config(f);
  const auto records = psym::run_sweep(config, &log, threads);
  psym::export_records_csv(records, out_csv);
  if (!plot_path.empty()) psym::detail::write_all(plot_path, psym::render_plot(records));
  std::cout << psym::render_records_csv(records);
  for (const auto& r : records) {
    if (r.failed) return psym::kExitFailure;
  }
  return psym::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudonym watermark simulation and spectrogram detection"};
  app.require_subcommand(1);

  CommonFlags sim_flags, det_flags, sweep_flags;

  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "write one simulated spectrogram per SNR point");
  add_common(sim, sim_flags);
  sim->add_option("--out", sim_out, "output directory")->required();

  std::string det_file, det_format = "text";
  std::optional<std::size_t> det_channel;
  bool det_force = false, det_resync = false;
  auto* det = app.add_subcommand("detect", "decode the pseudonym in a spectrogram file");
  add_common(det, det_flags);
  det->add_option("file", det_file, "spectrogram file")->required();
  det->add_option("--channel", det_channel, "frequency channel carrying the watermark");
  det->add_option("--format", det_format, "output format")->check(CLI::IsMember({"text", "csv"}));
  det->add_flag("--force", det_force, "decode even when sync is rejected");
  det->add_flag("--resync", det_resync, "re-synchronize every packet");

  std::string sweep_out, sweep_plot;
  unsigned sweep_threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo Pe versus SNR");
  add_common(sweep, sweep_flags);
  sweep->add_option("--out", sweep_out, "result CSV path")->required();
  sweep->add_option("--plot", sweep_plot, "optional two-column plot file");
  sweep->add_option("--threads", sweep_threads, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? psym::kExitOk : psym::kExitArgumentError;
  }

  psym::Logger log;
  try {
    if (*sim) return run_simulate(sim_flags, sim_out, log);
    if (*det) {
      return run_detect(det_flags, det_file, det_channel, det_format, det_force, det_resync, log);
    }
    if (*sweep) return run_sweep(sweep_flags, sweep_out, sweep_plot, sweep_threads, log);
  } catch (const psym::FormatError& e) {
    std::cerr << "psym: format error: " << e.what() << "\n";
    return psym::kExitFormatError;
  } catch (const psym::ArgumentError& e) {
    std::cerr << "psym: " << e.what() << "\n";
    return psym::kExitArgumentError;
  } catch (const psym::ConfigError& e) {
    std::cerr << "psym: configuration error: " << e.what() << "\n";
    return psym::kExitArgumentError;
  } catch (const psym::FramingError& e) {
    std::cerr << "psym: " << e.what() << "\n";
    return psym::kExitArgumentError;
  } catch (const psym::Error& e) {
    std::cerr << "psym: " << e.what() << "\n";
    return psym::kExitFailure;
  }
  return psym::kExitFailure;
}
