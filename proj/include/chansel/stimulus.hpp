#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "chansel/rng.hpp"

namespace chansel {

// Utterance-structured synthetic speech surrogate: SSN-shaped carriers with
// syllabic amplitude modulation, grouped into utterances with gaps.
struct TalkerModel {
  double utterance_min_s = 1.2;
  double utterance_max_s = 2.5;
  double gap_min_s = 0.15;
  double gap_max_s = 0.4;
  double syllable_rate_hz = 4.0;
  double modulation_depth = 0.85;
  double fade_s = 0.02;
};

struct ConversationParams {
  double mean_turn_s = 2.0;
  double turn_min_s = 0.5;
  double turn_max_s = 6.0;
  double gap_s = 0.2;
  double overlap_prob = 0.05;
  double overlap_s = 0.2;
};

// Speech material pool: either synthetic (template-driven) or utterance
// WAVs imported through a corpus manifest.
class SpeechSource {
 public:
  // Synthetic pool.
  SpeechSource(std::vector<double> mag_template, int fft_size, double fs,
               TalkerModel model = {});
  // Corpus pool: per-talker utterance lists at the working sample rate.
  SpeechSource(std::vector<std::vector<std::vector<double>>> corpus_utterances, double fs);

  // Continuous utterance stream of the given duration for one talker.
  std::vector<double> talker_stream(double duration_s, Rng& rng) const;
  // Speech placed only inside the given active intervals (samples),
  // silence elsewhere.
  std::vector<double> gated_stream(double duration_s, Rng& rng,
                                   const std::vector<std::pair<long, long>>& intervals) const;

  double sample_rate() const { return fs_; }

 private:
  std::vector<double> one_utterance(double duration_s, Rng& rng) const;

  bool synthetic_ = true;
  std::vector<double> template_;
  int fft_size_ = 512;
  double fs_ = 16000.0;
  TalkerModel model_;
  std::vector<std::vector<std::vector<double>>> corpus_;  // [talker][utterance][sample]
};

// Corpus manifest: {"sample_rate": hz, "talkers": [{"id", "utterances": [wav...]}]}.
SpeechSource load_speech_corpus(const std::filesystem::path& manifest_path, double expected_fs);

struct ConversationStimuli {
  std::vector<double> own_voice;
  std::vector<double> target;
  std::vector<std::vector<double>> competing;
};

// Two-party turn-taking between the user and the target talker; competing
// talkers hold independent pairwise conversations among themselves.
ConversationStimuli synth_conversation(const SpeechSource& source, double duration_s,
                                       int n_competing, Rng& rng,
                                       const ConversationParams& params = {});

}  // namespace chansel
