#include "chansel/beamformer.hpp"

#include <cmath>

#include "chansel/cpsdm.hpp"

namespace chansel {

Eigen::VectorXcd mpdr_weights(const Eigen::MatrixXcd& C_y, const Eigen::VectorXcd& d,
                              double loading) {
  if (d.size() != C_y.rows()) throw std::invalid_argument("mpdr_weights: dimension mismatch");
  if (d.norm() == 0.0) throw std::invalid_argument("mpdr_weights: zero steering vector");

  const Eigen::VectorXcd x = solve_hermitian(C_y, d, loading);
  const cdouble denom = d.dot(x);  // d^H C^{-1} d, real positive for PD C
  const double re = denom.real();
  if (!(re > 0.0) || std::abs(denom.imag()) > 1e-6 * std::abs(re))
    throw NumericalError("mpdr_weights: d^H C^{-1} d not strictly positive real");
  return x / denom;
}

double output_noisy_psd(std::span<const cdouble> y_bf_window) {
  if (y_bf_window.empty()) throw std::invalid_argument("output_noisy_psd: empty window");
  double acc = 0.0;
  for (const cdouble& v : y_bf_window) acc += std::norm(v);
  return acc / static_cast<double>(y_bf_window.size());
}

}  // namespace chansel
