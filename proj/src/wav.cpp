#include "chansel/wav.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace chansel {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void append_u32(std::vector<uint8_t>& buf, uint32_t v) {
  buf.push_back(v & 0xff);
  buf.push_back((v >> 8) & 0xff);
  buf.push_back((v >> 16) & 0xff);
  buf.push_back((v >> 24) & 0xff);
}
void append_u16(std::vector<uint8_t>& buf, uint16_t v) {
  buf.push_back(v & 0xff);
  buf.push_back((v >> 8) & 0xff);
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SchemaError("cannot open WAV file: " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw SchemaError("not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, num_channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const uint8_t* data = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = read_u32(bytes.data() + pos + 4);
    if (pos + 8 + len > bytes.size()) throw SchemaError("truncated WAV chunk: " + path.string());
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw SchemaError("malformed fmt chunk: " + path.string());
      const uint8_t* p = bytes.data() + pos + 8;
      format = read_u16(p);
      num_channels = read_u16(p + 2);
      sample_rate = read_u32(p + 4);
      bits = read_u16(p + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (!data || num_channels == 0) throw SchemaError("WAV missing fmt/data chunk: " + path.string());

  WavData out;
  out.sample_rate = sample_rate;
  out.channels.resize(num_channels);

  if (format == kFormatPcm && bits == 16) {
    const long frames = data_len / (2L * num_channels);
    for (auto& ch : out.channels) ch.resize(frames);
    for (long i = 0; i < frames; ++i) {
      for (int c = 0; c < num_channels; ++c) {
        int16_t s;
        std::memcpy(&s, data + (i * num_channels + c) * 2, 2);
        out.channels[c][i] = static_cast<double>(s) / 32768.0;
      }
    }
  } else if (format == kFormatFloat && bits == 32) {
    const long frames = data_len / (4L * num_channels);
    for (auto& ch : out.channels) ch.resize(frames);
    for (long i = 0; i < frames; ++i) {
      for (int c = 0; c < num_channels; ++c) {
        float s;
        std::memcpy(&s, data + (i * num_channels + c) * 4, 4);
        out.channels[c][i] = static_cast<double>(s);
      }
    }
  } else {
    throw SchemaError("unsupported WAV encoding (need PCM16 or float32): " + path.string());
  }
  return out;
}

void write_wav(const std::filesystem::path& path,
               const std::vector<std::vector<double>>& channels, double sample_rate,
               WavFormat format) {
  if (channels.empty()) throw std::invalid_argument("write_wav: no channels");
  const size_t frames = channels[0].size();
  for (const auto& ch : channels)
    if (ch.size() != frames) throw std::invalid_argument("write_wav: channel length mismatch");

  const uint16_t nch = static_cast<uint16_t>(channels.size());
  const uint16_t bytes_per = format == WavFormat::pcm16 ? 2 : 4;
  const uint32_t data_len = static_cast<uint32_t>(frames * nch * bytes_per);

  std::vector<uint8_t> buf;
  buf.reserve(44 + data_len);
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  append_u32(buf, 36 + data_len);
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  append_u32(buf, 16);
  append_u16(buf, format == WavFormat::pcm16 ? kFormatPcm : kFormatFloat);
  append_u16(buf, nch);
  append_u32(buf, static_cast<uint32_t>(sample_rate));
  append_u32(buf, static_cast<uint32_t>(sample_rate) * nch * bytes_per);
  append_u16(buf, static_cast<uint16_t>(nch * bytes_per));
  append_u16(buf, static_cast<uint16_t>(bytes_per * 8));
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  append_u32(buf, data_len);

  for (size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < nch; ++c) {
      if (format == WavFormat::pcm16) {
        const double clamped = std::clamp(channels[c][i], -1.0, 32767.0 / 32768.0);
        const int16_t s = static_cast<int16_t>(std::lrint(clamped * 32768.0));
        append_u16(buf, static_cast<uint16_t>(s));
      } else {
        const float s = static_cast<float>(channels[c][i]);
        uint32_t raw;
        std::memcpy(&raw, &s, 4);
        append_u32(buf, raw);
      }
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw SchemaError("cannot write WAV file: " + path.string());
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw SchemaError("short write to WAV file: " + path.string());
}

}  // namespace chansel
