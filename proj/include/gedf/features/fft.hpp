// SPDX-License-Identifier: Apache-2.0
/**
 * @file   fft.hpp
 * @brief  Thin real-FFT wrapper over FFTW with a per-size plan cache.
 */
#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "gedf/error.hpp"

namespace gedf::features {

using Complex = std::complex<double>;

namespace detail {

struct RealPlans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread safe; execution through the new-array
// interface is. Plans are created once per size and never destroyed.
inline const RealPlans &plans_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, RealPlans> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> real(n);
  std::vector<Complex> spec(n / 2 + 1);
  auto *cplx = reinterpret_cast<fftw_complex *>(spec.data());
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  RealPlans p;
  p.forward = fftw_plan_dft_r2c_1d(len, real.data(), cplx, flags);
  p.inverse = fftw_plan_dft_c2r_1d(len, cplx, real.data(), flags | FFTW_DESTROY_INPUT);
  if (!p.forward || !p.inverse)
    throw ContractError("FFTW could not plan a transform of size " +
                        std::to_string(n));
  return cache.emplace(n, p).first->second;
}

}  // namespace detail

/// Real-to-complex DFT; returns n/2+1 bins, X[k] = sum_t x[t] e^{-2 pi i k t / n}.
inline std::vector<Complex> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  const auto &p = detail::plans_for(n);
  std::vector<double> in(x.begin(), x.end());
  std::vector<Complex> out(n / 2 + 1);
  fftw_execute_dft_r2c(p.forward, in.data(),
                       reinterpret_cast<fftw_complex *>(out.data()));
  return out;
}

/// Inverse of rfft, normalized by 1/n so irfft(rfft(x)) == x.
inline std::vector<double> irfft(std::span<const Complex> spec, std::size_t n) {
  if (spec.size() != n / 2 + 1)
    throw ShapeError("irfft of size " + std::to_string(n) + " needs " +
                     std::to_string(n / 2 + 1) + " bins, got " +
                     std::to_string(spec.size()));
  const auto &p = detail::plans_for(n);
  std::vector<Complex> in(spec.begin(), spec.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex *>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (auto &v : out) v *= scale;
  return out;
}

}  // namespace gedf::features
