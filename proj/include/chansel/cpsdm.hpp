#pragma once

#include <Eigen/Dense>
#include <vector>

#include "chansel/common.hpp"

namespace chansel {

// Per-bin noisy cross power spectral density matrices with recursive
// smoothing: C <- alpha*C + (1-alpha)*y*y^H, Hermitian-symmetrized.
class Cpsdm {
 public:
  // Starts at init_scale * I so the matrices are invertible from frame 0.
  Cpsdm(int num_mics, int num_bins, double alpha, double init_scale = 1e-6);

  // frame: mics x bins.
  void update(const Eigen::MatrixXcd& frame);
  // Single-bin update.
  void update_bin(int bin, const Eigen::VectorXcd& y);

  const Eigen::MatrixXcd& matrix(int bin) const { return mats_[bin]; }
  int num_mics() const { return num_mics_; }
  int num_bins() const { return static_cast<int>(mats_.size()); }
  double alpha() const { return alpha_; }
  long frames_seen() const { return frames_seen_; }

  // Frames before this are excluded from metrics (recursion unconverged).
  int warmup_frames() const;

 private:
  int num_mics_;
  double alpha_;
  long frames_seen_ = 0;
  std::vector<Eigen::MatrixXcd> mats_;
};

// Solves (C + loading*tr(C)/M * I) x = b via LDLT; deterministic.
Eigen::VectorXcd solve_hermitian(const Eigen::MatrixXcd& C, const Eigen::VectorXcd& b,
                                 double loading);

}  // namespace chansel
