#include "chansel/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace chansel {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

RealFft::RealFft(int size) : size_(size), impl_(std::make_unique<Impl>()) {
  if (size < 2) throw std::invalid_argument("RealFft: size must be >= 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->real = fftw_alloc_real(size);
  impl_->spec = fftw_alloc_complex(size / 2 + 1);
  impl_->fwd = fftw_plan_dft_r2c_1d(size, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_1d(size, impl_->spec, impl_->real, FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->inv) throw NumericalError("RealFft: plan creation failed");
}

RealFft::~RealFft() {
  if (!impl_) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->inv) fftw_destroy_plan(impl_->inv);
  if (impl_->real) fftw_free(impl_->real);
  if (impl_->spec) fftw_free(impl_->spec);
}

RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<cdouble> out) {
  if (static_cast<int>(in.size()) != size_ || static_cast<int>(out.size()) != bins())
    throw std::invalid_argument("RealFft::forward: size mismatch");
  std::memcpy(impl_->real, in.data(), sizeof(double) * size_);
  fftw_execute(impl_->fwd);
  std::memcpy(out.data(), impl_->spec, sizeof(cdouble) * bins());
}

void RealFft::inverse(std::span<const cdouble> in, std::span<double> out) {
  if (static_cast<int>(in.size()) != bins() || static_cast<int>(out.size()) != size_)
    throw std::invalid_argument("RealFft::inverse: size mismatch");
  std::memcpy(impl_->spec, in.data(), sizeof(cdouble) * bins());
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(size_);
  for (int i = 0; i < size_; ++i) out[i] = impl_->real[i] * scale;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("fft_convolve: empty input");
  const int out_len = static_cast<int>(a.size() + b.size()) - 1;
  ConvolutionPlan plan(out_len);
  auto sa = plan.spectrum(a);
  auto sb = plan.spectrum(b);
  std::vector<double> out(out_len, 0.0);
  plan.product(sa, sb, out);
  return out;
}

ConvolutionPlan::ConvolutionPlan(int max_out) : fft_(next_pow2(std::max(max_out, 2))) {
  scratch_spec_.resize(fft_.bins());
  scratch_time_.resize(fft_.size());
}

std::vector<cdouble> ConvolutionPlan::spectrum(std::span<const double> x) {
  if (static_cast<int>(x.size()) > fft_.size())
    throw std::invalid_argument("ConvolutionPlan: input longer than plan size");
  std::fill(scratch_time_.begin(), scratch_time_.end(), 0.0);
  std::copy(x.begin(), x.end(), scratch_time_.begin());
  std::vector<cdouble> spec(fft_.bins());
  fft_.forward(scratch_time_, spec);
  return spec;
}

void ConvolutionPlan::product(std::span<const cdouble> sa, std::span<const cdouble> sb,
                              std::span<double> out) {
  if (sa.size() != sb.size() || static_cast<int>(sa.size()) != fft_.bins())
    throw std::invalid_argument("ConvolutionPlan::product: spectrum size mismatch");
  for (size_t i = 0; i < sa.size(); ++i) scratch_spec_[i] = sa[i] * sb[i];
  fft_.inverse(scratch_spec_, scratch_time_);
  const size_t n = std::min(out.size(), scratch_time_.size());
  std::copy_n(scratch_time_.begin(), n, out.begin());
}

void ConvolutionPlan::accumulate_product(std::span<const cdouble> sa,
                                         std::span<const cdouble> sb, std::span<double> out) {
  if (sa.size() != sb.size() || static_cast<int>(sa.size()) != fft_.bins())
    throw std::invalid_argument("ConvolutionPlan::accumulate_product: spectrum size mismatch");
  for (size_t i = 0; i < sa.size(); ++i) scratch_spec_[i] = sa[i] * sb[i];
  fft_.inverse(scratch_spec_, scratch_time_);
  const size_t n = std::min(out.size(), scratch_time_.size());
  for (size_t i = 0; i < n; ++i) out[i] += scratch_time_[i];
}

}  // namespace chansel
