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

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace psym::detail {

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
inline void fft_inplace(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    // Twiddles from the exact angle, not by repeated multiplication.
    std::vector<std::complex<double>> w(len / 2);
    for (std::size_t k = 0; k < len / 2; ++k) {
      w[k] = std::polar(1.0, ang * static_cast<double>(k));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w[k];
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& x : data) x /= static_cast<double>(n);
  }
}

/// out[l] = sum_i signal[l + i] * kernel[i] for l in [0, |signal| - |kernel|].
inline std::vector<double> sliding_dot(std::span<const double> signal, std::span<const double> kernel) {
  if (kernel.empty() || signal.size() < kernel.size()) return {};
  const std::size_t lags = signal.size() - kernel.size() + 1;
  const std::size_t n = std::bit_ceil(signal.size() + kernel.size());
  std::vector<std::complex<double>> a(n), b(n);
  for (std::size_t i = 0; i < signal.size(); ++i) a[i] = signal[i];
  for (std::size_t i = 0; i < kernel.size(); ++i) b[i] = kernel[i];
  fft_inplace(a, false);
  fft_inplace(b, false);
  for (std::size_t i = 0; i < n; ++i) a[i] *= std::conj(b[i]);
  fft_inplace(a, true);
  std::vector<double> out(lags);
  for (std::size_t l = 0; l < lags; ++l) out[l] = a[l].real();
  return out;
}

}  // namespace psym::detail
