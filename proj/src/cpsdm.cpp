#include "chansel/cpsdm.hpp"

#include <cmath>
#include <stdexcept>

namespace chansel {

Cpsdm::Cpsdm(int num_mics, int num_bins, double alpha, double init_scale)
    : num_mics_(num_mics), alpha_(alpha) {
  if (num_mics < 1 || num_bins < 1) throw std::invalid_argument("Cpsdm: bad dimensions");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("Cpsdm: alpha must be in [0,1]");
  mats_.assign(num_bins, Eigen::MatrixXcd::Identity(num_mics, num_mics) * init_scale);
}

void Cpsdm::update_bin(int bin, const Eigen::VectorXcd& y) {
  if (y.size() != num_mics_) throw std::invalid_argument("Cpsdm: frame channel count mismatch");
  Eigen::MatrixXcd& C = mats_[bin];
  C = alpha_ * C + (1.0 - alpha_) * (y * y.adjoint());
  C = 0.5 * (C + C.adjoint().eval());
}

void Cpsdm::update(const Eigen::MatrixXcd& frame) {
  if (frame.rows() != num_mics_ || frame.cols() != num_bins())
    throw std::invalid_argument("Cpsdm: frame dimensions mismatch");
  for (int k = 0; k < num_bins(); ++k) update_bin(k, frame.col(k));
  ++frames_seen_;
}

int Cpsdm::warmup_frames() const {
  if (alpha_ >= 1.0) return 0;
  return static_cast<int>(std::ceil(3.0 / (1.0 - alpha_)));
}

Eigen::VectorXcd solve_hermitian(const Eigen::MatrixXcd& C, const Eigen::VectorXcd& b,
                                 double loading) {
  if (C.rows() != C.cols() || C.rows() != b.size())
    throw std::invalid_argument("solve_hermitian: dimension mismatch");
  if (loading < 0.0) throw std::invalid_argument("solve_hermitian: loading must be >= 0");

  const int m = static_cast<int>(C.rows());
  Eigen::MatrixXcd A = C;
  if (loading > 0.0) {
    const double tr = C.trace().real();
    A += (loading * tr / m) * Eigen::MatrixXcd::Identity(m, m);
  }
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("solve_hermitian: factorization failed");
  Eigen::VectorXcd x = ldlt.solve(b);
  if (!x.allFinite()) throw NumericalError("solve_hermitian: non-finite solution");
  return x;
}

}  // namespace chansel
