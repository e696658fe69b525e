#pragma once

#include <memory>
#include <span>
#include <vector>

#include "chansel/common.hpp"

namespace chansel {

// Real-input FFT of a fixed size, backed by FFTW. One instance per thread;
// plan creation/destruction is serialized internally (FFTW requirement).
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  int bins() const { return size_ / 2 + 1; }

  // in: size() samples, out: bins() coefficients.
  void forward(std::span<const double> in, std::span<cdouble> out);
  // in: bins() coefficients, out: size() samples, scaled by 1/size().
  void inverse(std::span<const cdouble> in, std::span<double> out);

 private:
  struct Impl;
  int size_ = 0;
  std::unique_ptr<Impl> impl_;
};

int next_pow2(int n);

// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

// Frequency-domain convolution helpers for rendering many (source, receiver)
// pairs against shared source spectra without redundant transforms.
class ConvolutionPlan {
 public:
  // max_out = longest linear-convolution result the plan must hold.
  explicit ConvolutionPlan(int max_out);

  int fft_size() const { return fft_.size(); }
  std::vector<cdouble> spectrum(std::span<const double> x);
  // out += irfft(sa * sb) truncated to out.size().
  void accumulate_product(std::span<const cdouble> sa, std::span<const cdouble> sb,
                          std::span<double> out);
  // out = irfft(sa * sb) truncated to out.size().
  void product(std::span<const cdouble> sa, std::span<const cdouble> sb,
               std::span<double> out);

 private:
  RealFft fft_;
  std::vector<cdouble> scratch_spec_;
  std::vector<double> scratch_time_;
};

}  // namespace chansel
