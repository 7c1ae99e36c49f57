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

#include <stdexcept>
#include <string>

namespace psym {

/// Base class of every error raised by the library. Callers that only care
/// about "something went wrong" catch this; the CLI maps the subclasses onto
/// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid WatermarkConfig / ChannelConfig values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Packet length does not match the configured bits_per_packet.
class FramingError : public Error {
 public:
  using Error::Error;
};

/// Caller passed an out-of-domain argument (bad index, non-positive duration).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input too short for the requested operation.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable sample values.
class DataError : public Error {
 public:
  using Error::Error;
};

/// File is not a spectrogram file (bad magic, unknown version/encoding).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// File is a spectrogram file but its payload does not match the header.
class CorruptionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Filesystem failure; the message always carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace psym
