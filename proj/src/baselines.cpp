#include "chansel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chansel {

double vad_cross_correlation(const VadSequence& v0, const VadSequence& vr, int frame,
                             int window_frames, int lag) {
  const int n0 = v0.num_frames();
  const int nr = vr.num_frames();
  if (frame < 0 || frame >= n0) throw std::invalid_argument("vad_cross_correlation: bad frame");

  // Valid j: inside the window, inside v0, and j - lag inside vr.
  int lo = std::max(frame - window_frames + 1, 0);
  lo = std::max(lo, lag);              // j - lag >= 0
  int hi = std::min(frame, nr - 1 + lag);  // j - lag <= nr - 1
  const int count = hi - lo + 1;
  if (count < 2) return 0.0;

  double s0 = 0.0, sr = 0.0;
  for (int j = lo; j <= hi; ++j) {
    s0 += v0.values[j];
    sr += vr.values[j - lag];
  }
  const double m0 = s0 / count;
  const double mr = sr / count;
  double c0 = 0.0, cr = 0.0, cc = 0.0;
  for (int j = lo; j <= hi; ++j) {
    const double a = v0.values[j] - m0;
    const double b = vr.values[j - lag] - mr;
    c0 += a * a;
    cr += b * b;
    cc += a * b;
  }
  if (c0 <= 0.0 || cr <= 0.0) return 0.0;
  return cc / std::sqrt(c0 * cr);
}

std::vector<double> ncc_scores(const VadSequence& v0, const std::vector<VadSequence>& candidates,
                               int frame, int window_frames, int lag_range_frames) {
  if (candidates.empty()) throw std::invalid_argument("ncc_scores: no candidates");
  std::vector<double> scores(candidates.size());
  for (size_t r = 0; r < candidates.size(); ++r) {
    double min_corr = 1.0;
    for (int p = -lag_range_frames; p <= lag_range_frames; ++p)
      min_corr = std::min(min_corr, vad_cross_correlation(v0, candidates[r], frame, window_frames, p));
    scores[r] = (1.0 - min_corr) / 2.0;
  }
  return scores;
}

int ncc_select(const VadSequence& v0, const std::vector<VadSequence>& candidates, int frame,
               int window_frames, int lag_range_frames) {
  const auto scores = ncc_scores(v0, candidates, frame, window_frames, lag_range_frames);
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::vector<double> mog_scores(const VadSequence& v0, const std::vector<VadSequence>& candidates,
                               int frame, int window_frames) {
  if (candidates.empty()) throw std::invalid_argument("mog_scores: no candidates");
  const int lo = std::max(frame - window_frames + 1, 0);
  std::vector<double> scores(candidates.size(), 0.0);
  for (size_t r = 0; r < candidates.size(); ++r) {
    const VadSequence& vr = candidates[r];
    long acc = 0;
    int count = 0;
    for (int j = lo; j <= frame; ++j) {
      if (j >= vr.num_frames() || j >= v0.num_frames()) break;
      const int d = static_cast<int>(v0.values[j]) - static_cast<int>(vr.values[j]);
      acc += d * d;
      ++count;
    }
    scores[r] = count > 0 ? static_cast<double>(acc) / count : 0.0;
  }
  return scores;
}

int mog_select(const VadSequence& v0, const std::vector<VadSequence>& candidates, int frame,
               int window_frames) {
  const auto scores = mog_scores(v0, candidates, frame, window_frames);
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

int random_select(int num_channels, Rng& rng) {
  if (num_channels < 1) throw std::invalid_argument("random_select: need at least one channel");
  return rng.uniform_int(0, num_channels - 1);
}

}  // namespace chansel
