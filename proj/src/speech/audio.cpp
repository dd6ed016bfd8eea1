#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "teleop/speech.hpp"

namespace teleop::speech {

namespace {

constexpr float kPcmScale = 32767.0f;

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

std::int16_t quantize(float x) {
  return static_cast<std::int16_t>(std::lround(std::clamp(x, -1.0f, 1.0f) * kPcmScale));
}

}  // namespace

bool supported_rate(int sample_rate) {
  return sample_rate == 8000 || sample_rate == 16000 || sample_rate == 44100 ||
         sample_rate == 48000;
}

void validate(const AudioClip& clip) {
  if (!supported_rate(clip.sample_rate)) {
    throw Error(ErrorCode::kAudioFormat,
                "unsupported sample rate " + std::to_string(clip.sample_rate));
  }
  for (float s : clip.samples) {
    if (!std::isfinite(s) || s < -1.0f || s > 1.0f) {
      throw Error(ErrorCode::kAudioFormat, "samples must lie in [-1, 1]");
    }
  }
}

AudioClip decode_wav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    throw Error(ErrorCode::kAudioFormat, "not a RIFF/WAVE file");
  }
  std::optional<int> rate;
  std::optional<std::string_view> data;
  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const auto id = bytes.substr(at, 4);
    const std::size_t size = read_u32(bytes, at + 4);
    const std::size_t body = at + 8;
    if (size > bytes.size() - body) throw Error(ErrorCode::kAudioFormat, "truncated WAV chunk");
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorCode::kAudioFormat, "short fmt chunk");
      const auto format = read_u16(bytes, body);
      const auto channels = read_u16(bytes, body + 2);
      const auto bits = read_u16(bytes, body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error(ErrorCode::kAudioFormat, "only PCM 16-bit mono WAV is supported");
      }
      rate = static_cast<int>(read_u32(bytes, body + 4));
    } else if (id == "data") {
      data = bytes.substr(body, size);
    }
    at = body + size + (size & 1);  // chunks are word aligned
  }
  if (!rate || !data) throw Error(ErrorCode::kAudioFormat, "WAV lacks fmt or data chunk");
  if (data->size() % 2 != 0) throw Error(ErrorCode::kAudioFormat, "odd PCM data length");

  AudioClip clip;
  clip.sample_rate = *rate;
  clip.samples.resize(data->size() / 2);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16(*data, 2 * i));
    clip.samples[i] = std::max(-1.0f, static_cast<float>(raw) / kPcmScale);
  }
  validate(clip);
  return clip;
}

std::string encode_wav(const AudioClip& clip) {
  validate(clip);
  const auto data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_size);
  for (float s : clip.samples) put_u16(out, static_cast<std::uint16_t>(quantize(s)));
  return out;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kAudioFormat, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  AudioClip clip = decode_wav(buffer.str());
  clip.id = path.stem().string();
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const std::string bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kAudioFormat, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void validate(const SegmenterConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(c.frame) || !positive(c.start_threshold) || !positive(c.end_threshold) ||
      !positive(c.silence_duration) || c.start_frames <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "segmenter settings must be positive");
  }
  if (c.end_threshold > c.start_threshold) {
    throw Error(ErrorCode::kInvalidArgument, "end threshold must not exceed start threshold");
  }
}

std::optional<Segment> find_segment(const AudioClip& clip, const SegmenterConfig& config) {
  validate(config);
  validate(clip);
  const auto frame_len = static_cast<std::size_t>(
      std::max(1L, std::lround(config.frame * clip.sample_rate)));
  if (clip.samples.size() < frame_len) {
    throw Error(ErrorCode::kInvalidArgument, "clip is shorter than one frame");
  }

  // Per-frame RMS; a trailing partial frame is measured over what it has.
  const std::size_t n_frames = (clip.samples.size() + frame_len - 1) / frame_len;
  std::vector<double> rms(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t lo = f * frame_len;
    const std::size_t hi = std::min(lo + frame_len, clip.samples.size());
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += double(clip.samples[i]) * clip.samples[i];
    rms[f] = std::sqrt(sum / static_cast<double>(hi - lo));
  }

  const auto start_run = static_cast<std::size_t>(config.start_frames);
  std::optional<std::size_t> onset;
  for (std::size_t f = 0, run = 0; f < n_frames; ++f) {
    run = rms[f] > config.start_threshold ? run + 1 : 0;
    if (run == start_run) {
      onset = f + 1 - start_run;
      break;
    }
  }
  if (!onset) return std::nullopt;

  const auto silence_run =
      static_cast<std::size_t>(std::ceil(config.silence_duration / config.frame - 1e-9));
  std::size_t end_frame = n_frames;
  for (std::size_t f = *onset, run = 0; f < n_frames; ++f) {
    run = rms[f] < config.end_threshold ? run + 1 : 0;
    if (run == silence_run) {
      end_frame = f + 1;
      break;
    }
  }
  return Segment{*onset * frame_len, std::min(end_frame * frame_len, clip.samples.size()),
                 clip.sample_rate};
}

std::optional<AudioClip> segment(const AudioClip& clip, const SegmenterConfig& config) {
  const auto span = find_segment(clip, config);
  if (!span) return std::nullopt;
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.id = clip.id;
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(span->begin),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(span->end));
  return out;
}

std::string fingerprint(const AudioClip& clip) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](std::uint8_t byte) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  };
  const auto rate = static_cast<std::uint32_t>(clip.sample_rate);
  for (int i = 0; i < 4; ++i) mix(static_cast<std::uint8_t>(rate >> (8 * i)));
  for (float s : clip.samples) {
    const auto q = static_cast<std::uint16_t>(quantize(s));
    mix(static_cast<std::uint8_t>(q & 0xff));
    mix(static_cast<std::uint8_t>(q >> 8));
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

}  // namespace teleop::speech
