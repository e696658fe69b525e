// Test-only oracles, independent of the library's statistic path.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "chansel/rng.hpp"
#include "chansel/selector.hpp"

namespace chansel::testutil {

// One random hypothesis-test instance: per (frame j, bin k) a noise
// covariance, an HA snapshot, and per channel a remote coefficient.
struct LikelihoodInstance {
  int num_mics, num_bins, num_frames, num_channels;
  std::vector<std::vector<Eigen::MatrixXcd>> C_v;  // [j][k] M x M HPD
  std::vector<std::vector<Eigen::VectorXcd>> y;    // [j][k] M
  Eigen::MatrixXcd d;                              // M x K, reference row 1
  std::vector<Eigen::MatrixXcd> remotes;           // [j] R x K

  // Derived beamformer-domain quantities (the implementation's inputs).
  std::vector<std::vector<cdouble>> y_mvdr;        // [j][k]
  std::vector<std::vector<double>> sigma2;         // [j][k]
};

inline LikelihoodInstance random_instance(int m, int k_bins, int d_frames, int r_channels,
                                          Rng& rng) {
  LikelihoodInstance inst;
  inst.num_mics = m;
  inst.num_bins = k_bins;
  inst.num_frames = d_frames;
  inst.num_channels = r_channels;

  inst.d.resize(m, k_bins);
  for (int k = 0; k < k_bins; ++k) {
    for (int i = 0; i < m; ++i) inst.d(i, k) = rng.circular_gaussian() + cdouble(1.5, 0.0);
    inst.d.col(k) /= inst.d(0, k);
    inst.d(0, k) = cdouble(1.0, 0.0);
  }

  inst.C_v.resize(d_frames);
  inst.y.resize(d_frames);
  inst.remotes.resize(d_frames);
  inst.y_mvdr.resize(d_frames);
  inst.sigma2.resize(d_frames);
  for (int j = 0; j < d_frames; ++j) {
    inst.C_v[j].resize(k_bins);
    inst.y[j].resize(k_bins);
    inst.remotes[j].resize(r_channels, k_bins);
    inst.y_mvdr[j].resize(k_bins);
    inst.sigma2[j].resize(k_bins);
    for (int k = 0; k < k_bins; ++k) {
      Eigen::MatrixXcd a(m, m);
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) a(p, q) = rng.circular_gaussian();
      inst.C_v[j][k] = a * a.adjoint() + 0.2 * Eigen::MatrixXcd::Identity(m, m);

      Eigen::VectorXcd snapshot(m);
      for (int p = 0; p < m; ++p) snapshot(p) = rng.circular_gaussian();
      inst.y[j][k] = snapshot;

      for (int r = 0; r < r_channels; ++r) inst.remotes[j](r, k) = rng.circular_gaussian();

      const Eigen::VectorXcd dk = inst.d.col(k);
      const Eigen::VectorXcd ci_d = inst.C_v[j][k].ldlt().solve(dk);
      const double denom = dk.dot(ci_d).real();
      inst.y_mvdr[j][k] = ci_d.dot(snapshot) / denom;
      inst.sigma2[j][k] = 1.0 / denom;
    }
  }
  return inst;
}

// Eq.-(7)-style Gaussian log-likelihood of the whole window for channel r,
// with per-bin complex scales A(k); evaluated straight through the matrix
// quadratic forms (no beamformer-domain shortcuts).
inline double window_log_likelihood(const LikelihoodInstance& inst, int r,
                                    const Eigen::VectorXcd& scales) {
  double ll = 0.0;
  for (int j = 0; j < inst.num_frames; ++j) {
    for (int k = 0; k < inst.num_bins; ++k) {
      const Eigen::MatrixXcd& C = inst.C_v[j][k];
      const Eigen::VectorXcd residual =
          inst.y[j][k] - inst.d.col(k) * (scales(k) * inst.remotes[j](r, k));
      const Eigen::VectorXcd ci_res = C.ldlt().solve(residual);
      const double quad = residual.dot(ci_res).real();
      const double logdet = std::log(C.determinant().real());
      ll += -inst.num_mics * std::log(kPi) - logdet - quad;
    }
  }
  return ll;
}

// The r-independent part of the same log-likelihood (scales = 0).
inline double constant_log_likelihood(const LikelihoodInstance& inst) {
  return window_log_likelihood(inst, 0, Eigen::VectorXcd::Zero(inst.num_bins));
}

struct GridMaxResult {
  double value = 0.0;
  Eigen::VectorXcd argmax;
  bool interior = true;
};

// Dense zoomed grid maximization of the log-likelihood over the per-bin
// complex scale. Separable across bins, so each bin is scanned on its own
// grid; the search radius comes from the Cauchy-Schwarz bound on the
// maximizer, not from the implementation's estimate.
inline GridMaxResult grid_maximize_log_likelihood(const LikelihoodInstance& inst, int r,
                                                  int levels = 5, int points = 41) {
  GridMaxResult result;
  result.argmax = Eigen::VectorXcd::Zero(inst.num_bins);

  for (int k = 0; k < inst.num_bins; ++k) {
    double s_rr = 0.0, s_bb = 0.0;
    for (int j = 0; j < inst.num_frames; ++j) {
      s_rr += std::norm(inst.remotes[j](r, k)) / inst.sigma2[j][k];
      s_bb += std::norm(inst.y_mvdr[j][k]) / inst.sigma2[j][k];
    }
    // Per-bin quadratic gain term; separable evaluation.
    const auto bin_term = [&](cdouble a) {
      double t = 0.0;
      for (int j = 0; j < inst.num_frames; ++j) {
        const cdouble g = std::conj(inst.remotes[j](r, k)) * inst.y_mvdr[j][k];
        t += 2.0 * std::real(std::conj(a) * g) / inst.sigma2[j][k];
      }
      t -= std::norm(a) * s_rr;
      return t;
    };

    double radius = s_rr > 0.0 ? 2.0 * std::sqrt(s_bb / s_rr) : 1.0;
    cdouble center(0.0, 0.0);
    cdouble best = center;
    double best_val = bin_term(center);
    bool interior = true;
    for (int level = 0; level < levels; ++level) {
      const double step = 2.0 * radius / (points - 1);
      cdouble level_best = best;
      double level_val = best_val;
      int best_i = -1, best_j = -1;
      for (int i = 0; i < points; ++i) {
        for (int jj = 0; jj < points; ++jj) {
          const cdouble a(center.real() - radius + i * step,
                          center.imag() - radius + jj * step);
          const double v = bin_term(a);
          if (v > level_val) {
            level_val = v;
            level_best = a;
            best_i = i;
            best_j = jj;
          }
        }
      }
      best = level_best;
      best_val = level_val;
      if (level == levels - 1 && best_i >= 0)
        interior = best_i > 0 && best_i < points - 1 && best_j > 0 && best_j < points - 1;
      center = best;
      radius = 2.0 * step;
    }
    result.argmax(k) = best;
    result.interior = result.interior && interior;
  }
  result.value = window_log_likelihood(inst, r, result.argmax);
  return result;
}

// Feed an instance's beamformer-domain data into a fresh selector window.
inline SelectorState selector_from_instance(const LikelihoodInstance& inst) {
  SelectorConfig cfg;
  cfg.integration_time_s =
      inst.num_frames * 256.0 / 16000.0;  // D frames at the default cadence
  cfg.bin_mask.assign(inst.num_bins, 1);
  SelectorState state(inst.num_channels, inst.num_bins, cfg);
  std::vector<cdouble> y_bf(inst.num_bins);
  std::vector<double> sigma2(inst.num_bins);
  for (int j = 0; j < inst.num_frames; ++j) {
    for (int k = 0; k < inst.num_bins; ++k) {
      y_bf[k] = inst.y_mvdr[j][k];
      sigma2[k] = inst.sigma2[j][k];
    }
    state.push_frame(y_bf, inst.remotes[j], sigma2);
  }
  return state;
}

}  // namespace chansel::testutil
