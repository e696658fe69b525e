#include "chansel/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "chansel/common.hpp"
#include "chansel/noise.hpp"
#include "chansel/wav.hpp"

namespace chansel {

SpeechSource::SpeechSource(std::vector<double> mag_template, int fft_size, double fs,
                           TalkerModel model)
    : synthetic_(true),
      template_(std::move(mag_template)),
      fft_size_(fft_size),
      fs_(fs),
      model_(model) {
  if (template_.size() != static_cast<size_t>(fft_size / 2 + 1))
    throw std::invalid_argument("SpeechSource: template size must be fft_size/2+1");
}

SpeechSource::SpeechSource(std::vector<std::vector<std::vector<double>>> corpus_utterances,
                           double fs)
    : synthetic_(false), fs_(fs), corpus_(std::move(corpus_utterances)) {
  if (corpus_.empty()) throw std::invalid_argument("SpeechSource: empty corpus");
  for (const auto& talker : corpus_)
    if (talker.empty()) throw std::invalid_argument("SpeechSource: talker with no utterances");
}

std::vector<double> SpeechSource::one_utterance(double duration_s, Rng& rng) const {
  const long n = std::max<long>(static_cast<long>(std::llround(duration_s * fs_)), 1);
  if (!synthetic_) {
    // Seeded utterance from a seeded talker pool, looped/truncated to fit.
    const auto& talker = corpus_[rng.uniform_int(0, static_cast<int>(corpus_.size()) - 1)];
    const auto& utt = talker[rng.uniform_int(0, static_cast<int>(talker.size()) - 1)];
    std::vector<double> out(n);
    for (long i = 0; i < n; ++i) out[i] = utt[i % utt.size()];
    return out;
  }

  std::vector<double> carrier = synth_ssn(template_, fft_size_, fs_, duration_s, rng);
  carrier.resize(n);
  // Syllabic envelope: raised-cosine modulation with jittered rate/phase.
  const double rate = model_.syllable_rate_hz * rng.uniform(0.7, 1.3);
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  const double depth = model_.modulation_depth;
  for (long i = 0; i < n; ++i) {
    const double env =
        (1.0 - depth) + depth * 0.5 * (1.0 + std::sin(2.0 * kPi * rate * i / fs_ + phase));
    carrier[i] *= env;
  }
  // Edge fades keep utterance boundaries click-free.
  const long fade = std::min<long>(static_cast<long>(model_.fade_s * fs_), n / 2);
  for (long i = 0; i < fade; ++i) {
    const double g = 0.5 * (1.0 - std::cos(kPi * i / fade));
    carrier[i] *= g;
    carrier[n - 1 - i] *= g;
  }
  return carrier;
}

std::vector<double> SpeechSource::talker_stream(double duration_s, Rng& rng) const {
  const long total = static_cast<long>(std::llround(duration_s * fs_));
  std::vector<double> out(total, 0.0);
  long pos = 0;
  while (pos < total) {
    const double utt_s = rng.uniform(model_.utterance_min_s, model_.utterance_max_s);
    const auto utt = one_utterance(utt_s, rng);
    const long n = std::min<long>(static_cast<long>(utt.size()), total - pos);
    std::copy_n(utt.begin(), n, out.begin() + pos);
    pos += n;
    pos += static_cast<long>(rng.uniform(model_.gap_min_s, model_.gap_max_s) * fs_);
  }
  return out;
}

std::vector<double> SpeechSource::gated_stream(
    double duration_s, Rng& rng, const std::vector<std::pair<long, long>>& intervals) const {
  const long total = static_cast<long>(std::llround(duration_s * fs_));
  std::vector<double> out(total, 0.0);
  for (const auto& [start, end] : intervals) {
    if (start >= total || end <= start) continue;
    const long n = std::min(end, total) - start;
    const auto utt = one_utterance(static_cast<double>(n) / fs_, rng);
    std::copy_n(utt.begin(), std::min<long>(n, static_cast<long>(utt.size())),
                out.begin() + start);
  }
  return out;
}

SpeechSource load_speech_corpus(const std::filesystem::path& manifest_path, double expected_fs) {
  std::ifstream f(manifest_path);
  if (!f) throw SchemaError("cannot open corpus manifest: " + manifest_path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("corpus manifest parse error: " + std::string(e.what()));
  }
  if (!j.contains("talkers") || !j["talkers"].is_array() || j["talkers"].empty())
    throw SchemaError("corpus manifest: missing non-empty 'talkers' array");

  const auto base = manifest_path.parent_path();
  std::vector<std::vector<std::vector<double>>> corpus;
  for (const auto& talker : j["talkers"]) {
    if (!talker.contains("utterances") || !talker["utterances"].is_array() ||
        talker["utterances"].empty())
      throw SchemaError("corpus manifest: talker without utterances");
    std::vector<std::vector<double>> utts;
    for (const auto& path : talker["utterances"]) {
      WavData wav = read_wav(base / path.get<std::string>());
      if (wav.num_channels() != 1)
        throw SchemaError("corpus utterance must be mono: " + path.get<std::string>());
      if (wav.sample_rate != expected_fs)
        throw SchemaError("corpus utterance sample rate mismatch: " + path.get<std::string>());
      utts.push_back(std::move(wav.channels[0]));
    }
    corpus.push_back(std::move(utts));
  }
  return SpeechSource(std::move(corpus), expected_fs);
}

namespace {

// Alternating turn intervals for a two-party conversation.
void two_party_turns(double duration_s, double fs, Rng& rng, const ConversationParams& p,
                     std::vector<std::pair<long, long>>& a,
                     std::vector<std::pair<long, long>>& b) {
  const long total = static_cast<long>(duration_s * fs);
  long t = 0;
  bool a_speaks = rng.uniform() < 0.5;
  while (t < total) {
    const double turn_s = std::clamp(rng.exponential(p.mean_turn_s), p.turn_min_s, p.turn_max_s);
    const long n = static_cast<long>(turn_s * fs);
    auto& cur = a_speaks ? a : b;
    cur.push_back({t, std::min(t + n, total)});
    long next = t + n;
    if (rng.uniform() < p.overlap_prob) {
      next -= static_cast<long>(p.overlap_s * fs);  // next turn starts early
    } else {
      next += static_cast<long>(p.gap_s * fs);
    }
    t = std::max(next, t + 1);
    a_speaks = !a_speaks;
  }
}

}  // namespace

ConversationStimuli synth_conversation(const SpeechSource& source, double duration_s,
                                       int n_competing, Rng& rng,
                                       const ConversationParams& params) {
  if (n_competing < 0) throw std::invalid_argument("synth_conversation: bad competing count");
  ConversationStimuli out;

  std::vector<std::pair<long, long>> user_turns, target_turns;
  Rng conv_rng = rng.fork(0);
  two_party_turns(duration_s, source.sample_rate(), conv_rng, params, user_turns, target_turns);
  Rng own_rng = rng.fork(1);
  Rng tgt_rng = rng.fork(2);
  out.own_voice = source.gated_stream(duration_s, own_rng, user_turns);
  out.target = source.gated_stream(duration_s, tgt_rng, target_turns);

  // Competing talkers converse pairwise; an odd leftover talker gets a
  // silent partner.
  out.competing.resize(n_competing);
  for (int pair = 0; pair * 2 < n_competing; ++pair) {
    std::vector<std::pair<long, long>> ta, tb;
    Rng pair_rng = rng.fork(100 + pair);
    two_party_turns(duration_s, source.sample_rate(), pair_rng, params, ta, tb);
    Rng ra = rng.fork(200 + pair * 2);
    out.competing[pair * 2] = source.gated_stream(duration_s, ra, ta);
    if (pair * 2 + 1 < n_competing) {
      Rng rb = rng.fork(201 + pair * 2);
      out.competing[pair * 2 + 1] = source.gated_stream(duration_s, rb, tb);
    }
  }
  return out;
}

}  // namespace chansel
