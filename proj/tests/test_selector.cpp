#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chansel/rng.hpp"
#include "chansel/selector.hpp"
#include "oracle_util.hpp"

using namespace chansel;

namespace {

SelectorConfig all_bins_config(int num_bins, int window_frames) {
  SelectorConfig cfg;
  cfg.integration_time_s = window_frames * 256.0 / 16000.0;
  cfg.bin_mask.assign(num_bins, 1);
  return cfg;
}

struct FrameData {
  std::vector<cdouble> y_bf;
  Eigen::MatrixXcd remotes;
  std::vector<double> sigma2;
};

FrameData random_frame(int r_channels, int k_bins, Rng& rng) {
  FrameData f;
  f.y_bf.resize(k_bins);
  f.sigma2.resize(k_bins);
  f.remotes.resize(r_channels, k_bins);
  for (int k = 0; k < k_bins; ++k) {
    f.y_bf[k] = rng.circular_gaussian();
    f.sigma2[k] = rng.uniform(0.2, 3.0);
    for (int r = 0; r < r_channels; ++r) f.remotes(r, k) = rng.circular_gaussian();
  }
  return f;
}

}  // namespace

TEST_CASE("window of one frame keeps only the newest contribution") {
  Rng rng(41);
  SelectorState state(2, 3, all_bins_config(3, 1));
  const auto f1 = random_frame(2, 3, rng);
  const auto f2 = random_frame(2, 3, rng);
  state.push_frame(f1.y_bf, f1.remotes, f1.sigma2);
  state.push_frame(f2.y_bf, f2.remotes, f2.sigma2);
  for (int k = 0; k < 3; ++k) {
    const cdouble expected = std::conj(f2.remotes(0, k)) * f2.y_bf[k] / f2.sigma2[k];
    CHECK(std::abs(state.sum_cross(0, k) - expected) <= 1e-14);
    CHECK(state.sum_rr(0, k) ==
          doctest::Approx(std::norm(f2.remotes(0, k)) / f2.sigma2[k]).epsilon(1e-13));
  }
}

TEST_CASE("all-zero remotes zero the channel sums") {
  Rng rng(42);
  SelectorState state(3, 4, all_bins_config(4, 8));
  for (int j = 0; j < 8; ++j) {
    auto f = random_frame(3, 4, rng);
    f.remotes.setZero();
    state.push_frame(f.y_bf, f.remotes, f.sigma2);
  }
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 4; ++k) {
      CHECK(state.sum_cross(r, k) == cdouble(0.0, 0.0));
      CHECK(state.sum_rr(r, k) == 0.0);
      CHECK(state.channel_score(r) == 0.0);
    }
}

TEST_CASE("sliding sums match brute-force recomputation over the window") {
  Rng rng(43);
  const int R = 3, K = 5, D = 16, total = 100;
  SelectorState state(R, K, all_bins_config(K, D));
  std::vector<FrameData> history;
  for (int j = 0; j < total; ++j) {
    history.push_back(random_frame(R, K, rng));
    const auto& f = history.back();
    state.push_frame(f.y_bf, f.remotes, f.sigma2);

    const int lo = std::max(0, j - D + 1);
    for (int r = 0; r < R; ++r) {
      for (int k = 0; k < K; ++k) {
        cdouble cross(0.0, 0.0);
        double rr = 0.0, bb = 0.0;
        for (int jj = lo; jj <= j; ++jj) {
          const auto& h = history[jj];
          cross += std::conj(h.remotes(r, k)) * h.y_bf[k] / h.sigma2[k];
          rr += std::norm(h.remotes(r, k)) / h.sigma2[k];
          bb += std::norm(h.y_bf[k]) / h.sigma2[k];
        }
        CHECK(std::abs(state.sum_cross(r, k) - cross) <= 1e-10 * std::max(1.0, std::abs(cross)));
        CHECK(state.sum_rr(r, k) == doctest::Approx(rr).epsilon(1e-10));
        if (r == 0) CHECK(state.sum_bb(k) == doctest::Approx(bb).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("perfect correlation reaches the S_bb ceiling") {
  Rng rng(44);
  const int K = 6, D = 12;
  SelectorState state(1, K, all_bins_config(K, D));
  for (int j = 0; j < D; ++j) {
    auto f = random_frame(1, K, rng);
    for (int k = 0; k < K; ++k) f.remotes(0, k) = f.y_bf[k];
    for (auto& s : f.sigma2) s = 1.7;  // constant PSD
    state.push_frame(f.y_bf, f.remotes, f.sigma2);
  }
  double bb_sum = 0.0;
  for (int k = 0; k < K; ++k) bb_sum += state.sum_bb(k);
  CHECK(state.channel_score(0) == doctest::Approx(bb_sum).epsilon(1e-12));
  const auto dec = state.select();
  for (int k = 0; k < K; ++k) CHECK(dec.rho2(0, k) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("independent channel scores far below a matched channel") {
  Rng rng(45);
  const int K = 8, D = 512;
  SelectorState state(2, K, all_bins_config(K, D));
  for (int j = 0; j < D; ++j) {
    auto f = random_frame(2, K, rng);
    for (int k = 0; k < K; ++k) {
      f.remotes(0, k) = 2.0 * f.y_bf[k];          // matched up to scale
      f.remotes(1, k) = rng.circular_gaussian();  // independent
      f.sigma2[k] = 1.0;
    }
    state.push_frame(f.y_bf, f.remotes, f.sigma2);
  }
  CHECK(state.channel_score(1) < 0.05 * state.channel_score(0));
  CHECK(state.select().channel == 0);
}

TEST_CASE("two-bin two-frame hand case confirms scale cancellation") {
  // Per bin, Y_bf across frames is (1,0) and (0,1); Y_r = 2*Y_bf.
  // score = |2|^2/4 + |2|^2/4 = 2 = sum_k S_bb.
  SelectorState state(1, 2, all_bins_config(2, 2));
  Eigen::MatrixXcd remotes(1, 2);
  std::vector<double> sigma2{1.0, 1.0};

  std::vector<cdouble> y1{cdouble(1.0, 0.0), cdouble(1.0, 0.0)};
  remotes << cdouble(2.0, 0.0), cdouble(2.0, 0.0);
  state.push_frame(y1, remotes, sigma2);

  std::vector<cdouble> y2{cdouble(0.0, 0.0), cdouble(0.0, 0.0)};
  remotes << cdouble(0.0, 0.0), cdouble(0.0, 0.0);
  state.push_frame(y2, remotes, sigma2);

  CHECK(state.channel_score(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(state.sum_bb(0) + state.sum_bb(1) == doctest::Approx(2.0));
}

TEST_CASE("scale estimate recovers an exact linear relation") {
  Rng rng(46);
  const int K = 4, D = 10;
  const cdouble c(0.8, -1.3);
  SelectorState state(1, K, all_bins_config(K, D));
  for (int j = 0; j < D; ++j) {
    auto f = random_frame(1, K, rng);
    for (int k = 0; k < K; ++k) f.y_bf[k] = c * f.remotes(0, k);
    state.push_frame(f.y_bf, f.remotes, f.sigma2);
  }
  for (int k = 0; k < K; ++k) CHECK(std::abs(state.estimate_scale(0, k) - c) <= 1e-12);
}

TEST_CASE("scale estimate of independent signals shrinks toward zero") {
  Rng rng(47);
  const int K = 2, D = 4096;
  SelectorState state(1, K, all_bins_config(K, D));
  for (int j = 0; j < D; ++j) {
    auto f = random_frame(1, K, rng);
    for (auto& s : f.sigma2) s = 1.0;
    state.push_frame(f.y_bf, f.remotes, f.sigma2);
  }
  for (int k = 0; k < K; ++k) CHECK(std::abs(state.estimate_scale(0, k)) < 0.1);
}

TEST_CASE("zero-denominator scale raises an undefined-scale error") {
  SelectorState state(1, 2, all_bins_config(2, 2));
  Eigen::MatrixXcd remotes = Eigen::MatrixXcd::Zero(1, 2);
  std::vector<cdouble> y{cdouble(1.0, 0.0), cdouble(1.0, 0.0)};
  std::vector<double> sigma2{1.0, 1.0};
  state.push_frame(y, remotes, sigma2);
  CHECK_THROWS_AS(state.estimate_scale(0, 0), NumericalError);
}

TEST_CASE("substituting the ML scale into the likelihood reproduces the score") {
  Rng rng(48);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = testutil::random_instance(2, 4, 8, 3, rng);
    const auto state = testutil::selector_from_instance(inst);
    const double constant = testutil::constant_log_likelihood(inst);
    for (int r = 0; r < 3; ++r) {
      Eigen::VectorXcd scales(4);
      for (int k = 0; k < 4; ++k) scales(k) = state.estimate_scale(r, k);
      const double ll = testutil::window_log_likelihood(inst, r, scales);
      CHECK(ll - constant ==
            doctest::Approx(state.channel_score(r)).epsilon(1e-9));
    }
  }
}

TEST_CASE("concentrated statistic equals the grid-maximized joint likelihood") {
  Rng rng(49);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = testutil::random_instance(2, 4, 8, 3, rng);
    const auto state = testutil::selector_from_instance(inst);
    const double constant = testutil::constant_log_likelihood(inst);
    for (int r = 0; r < 3; ++r) {
      const auto grid = testutil::grid_maximize_log_likelihood(inst, r);
      CHECK(grid.interior);
      const double score = state.channel_score(r);
      CHECK(std::abs(grid.value - constant - score) <= 1e-6 * std::abs(score));
    }
  }
}

TEST_CASE("channel scaling changes neither scores nor decisions") {
  Rng rng(50);
  const int R = 4, K = 6, D = 16;
  std::vector<FrameData> frames;
  for (int j = 0; j < D; ++j) frames.push_back(random_frame(R, K, rng));

  SelectorState base(R, K, all_bins_config(K, D));
  for (const auto& f : frames) base.push_frame(f.y_bf, f.remotes, f.sigma2);

  const cdouble c(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
  SelectorState scaled(R, K, all_bins_config(K, D));
  for (auto f : frames) {
    f.remotes.row(2) *= c;
    scaled.push_frame(f.y_bf, f.remotes, f.sigma2);
  }

  for (int r = 0; r < R; ++r)
    CHECK(scaled.channel_score(r) ==
          doctest::Approx(base.channel_score(r)).epsilon(1e-10));
  CHECK(scaled.select().channel == base.select().channel);
  // The scale estimate itself transforms by 1/c.
  for (int k = 0; k < K; ++k)
    CHECK(std::abs(scaled.estimate_scale(2, k) - base.estimate_scale(2, k) / c) <= 1e-10);
}

TEST_CASE("correlation diagnostics stay in the unit interval") {
  Rng rng(51);
  const int R = 3, K = 5, D = 8;
  SelectorState state(R, K, all_bins_config(K, D));
  for (int j = 0; j < 50; ++j) {
    const auto f = random_frame(R, K, rng);
    state.push_frame(f.y_bf, f.remotes, f.sigma2);
    const auto dec = state.select();
    for (int r = 0; r < R; ++r)
      for (int k = 0; k < K; ++k) {
        CHECK(dec.rho2(r, k) >= 0.0);
        CHECK(dec.rho2(r, k) <= 1.0);
      }
  }
}

TEST_CASE("ratio statistic and weighted-correlation form rank channels identically") {
  // With constant sigma2 across the window the Eq-12-style score is a
  // channel-independent multiple of gamma * |rho|^2.
  Rng rng(52);
  const int R = 4, K = 6, D = 24;
  SelectorState state(R, K, all_bins_config(K, D));
  const double sigma_const = 0.9;
  for (int j = 0; j < D; ++j) {
    auto f = random_frame(R, K, rng);
    for (auto& s : f.sigma2) s = sigma_const;
    state.push_frame(f.y_bf, f.remotes, f.sigma2);
  }
  const auto dec = state.select();

  std::vector<double> corr_form(R, 0.0);
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < K; ++k) corr_form[r] += state.sum_bb(k) * dec.rho2(r, k);
  const int corr_argmax =
      static_cast<int>(std::max_element(corr_form.begin(), corr_form.end()) - corr_form.begin());
  CHECK(corr_argmax == dec.channel);
}

TEST_CASE("approximation mode weights every bin equally") {
  Rng rng(53);
  SelectorState state(2, 4, all_bins_config(4, 8));
  for (int j = 0; j < 8; ++j) {
    const auto f = random_frame(2, 4, rng);
    state.push_frame(f.y_bf, f.remotes, f.sigma2);
  }
  const auto dec = state.select();
  for (double gamma : dec.gamma) CHECK(gamma == 1.0);
}

TEST_CASE("single channel is selected unconditionally and ties break low") {
  Rng rng(54);
  SelectorState one(1, 3, all_bins_config(3, 4));
  const auto f = random_frame(1, 3, rng);
  one.push_frame(f.y_bf, f.remotes, f.sigma2);
  CHECK(one.select().channel == 0);

  // Identical channels tie exactly; the lowest index wins.
  SelectorState tied(3, 3, all_bins_config(3, 4));
  auto g = random_frame(3, 3, rng);
  g.remotes.row(1) = g.remotes.row(0);
  g.remotes.row(2) = g.remotes.row(0);
  tied.push_frame(g.y_bf, g.remotes, g.sigma2);
  CHECK(tied.select().channel == 0);

  // All-zero scores also resolve to channel 0.
  SelectorState zeros(2, 3, all_bins_config(3, 4));
  auto z = random_frame(2, 3, rng);
  z.remotes.setZero();
  zeros.push_frame(z.y_bf, z.remotes, z.sigma2);
  CHECK(zeros.select().channel == 0);
}

TEST_CASE("non-positive PSD on a masked bin is rejected") {
  SelectorState state(1, 3, all_bins_config(3, 2));
  Eigen::MatrixXcd remotes = Eigen::MatrixXcd::Zero(1, 3);
  std::vector<cdouble> y(3, cdouble(1.0, 0.0));
  std::vector<double> sigma2{1.0, 0.0, 1.0};
  CHECK_THROWS_WITH_AS(state.push_frame(y, remotes, sigma2), doctest::Contains("invalid PSD"),
                       std::invalid_argument);
}

TEST_CASE("default mask drops DC and Nyquist") {
  const auto mask = SelectorConfig::default_mask(257);
  CHECK(mask[0] == 0);
  CHECK(mask[256] == 0);
  for (int k = 1; k < 256; ++k) CHECK(mask[k] == 1);
}
