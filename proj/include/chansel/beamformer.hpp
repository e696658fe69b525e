#pragma once

#include <Eigen/Dense>
#include <span>

#include "chansel/common.hpp"

namespace chansel {

// MPDR weights w = C^{-1}d / (d^H C^{-1} d); distortionless (w^H d = 1).
Eigen::VectorXcd mpdr_weights(const Eigen::MatrixXcd& C_y, const Eigen::VectorXcd& d,
                              double loading = 1e-6);

inline cdouble beamform(const Eigen::VectorXcd& w, const Eigen::VectorXcd& y) {
  if (w.size() != y.size()) throw std::invalid_argument("beamform: dimension mismatch");
  return w.dot(y);  // Eigen dot conjugates the left operand: w^H y
}

// Mean of |Y|^2 over a window of beamformer outputs at one bin.
double output_noisy_psd(std::span<const cdouble> y_bf_window);

// Per-frame output signals and PSD tracks of the head-steered beamformer.
struct BeamformerOutput {
  Eigen::MatrixXcd y_bf;     // frames x bins
  Eigen::MatrixXd noisy_psd;  // frames x bins, recursively smoothed |y_bf|^2
  Eigen::MatrixXd noise_psd;  // frames x bins; equals noisy_psd in approximation mode
};

}  // namespace chansel
