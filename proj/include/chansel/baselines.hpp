#pragma once

#include <vector>

#include "chansel/rng.hpp"
#include "chansel/vad.hpp"

namespace chansel {

// Windowed Pearson correlation between v0(j) and vr(j - lag) over
// j in [frame - window + 1, frame], clipped to the available history.
// Returns 0 when either windowed sequence has zero variance (0/0 := 0).
double vad_cross_correlation(const VadSequence& v0, const VadSequence& vr, int frame,
                             int window_frames, int lag);

// Turn-taking selector: argmax_r of (1 - min_lag R_{0,r}(lag)) / 2 over
// lags in [-lag_range, +lag_range].
int ncc_select(const VadSequence& v0, const std::vector<VadSequence>& candidates, int frame,
               int window_frames, int lag_range_frames);
std::vector<double> ncc_scores(const VadSequence& v0, const std::vector<VadSequence>& candidates,
                               int frame, int window_frames, int lag_range_frames);

// Turn-taking selector: argmax_r of the windowed mean of (V_0 - V_r)^2.
int mog_select(const VadSequence& v0, const std::vector<VadSequence>& candidates, int frame,
               int window_frames);
std::vector<double> mog_scores(const VadSequence& v0, const std::vector<VadSequence>& candidates,
                               int frame, int window_frames);

// Uniform floor; P_C = 1/R.
int random_select(int num_channels, Rng& rng);

}  // namespace chansel
