#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/error.hpp"

namespace teleop::speech {

/// Mono PCM normalized to [-1, 1].
struct AudioClip {
  int sample_rate = 16000;
  std::vector<float> samples;
  /// Optional identifier, e.g. the file stem a clip was read from.
  std::string id;

  double duration() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

bool supported_rate(int sample_rate);

/// Throws kAudioFormat for an unsupported rate or out-of-range samples.
void validate(const AudioClip& clip);

/// PCM 16-bit little-endian mono WAV. Throws kAudioFormat on anything else.
AudioClip decode_wav(std::string_view bytes);
std::string encode_wav(const AudioClip& clip);
AudioClip read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

struct SegmenterConfig {
  double frame = 0.03;             // s
  double start_threshold = 0.02;   // RMS
  int start_frames = 3;
  double end_threshold = 0.01;     // RMS
  double silence_duration = 1.0;   // s
};

void validate(const SegmenterConfig& config);

/// Sample range [begin, end) of the detected utterance.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  int sample_rate = 16000;

  double start_time() const { return static_cast<double>(begin) / sample_rate; }
  double end_time() const { return static_cast<double>(end) / sample_rate; }
};

/// Starts at the first run of `start_frames` frames above start_threshold and
/// ends after `silence_duration` of frames below end_threshold (the trailing
/// silence is kept). Without sustained silence the segment runs to the end of
/// the clip. nullopt means no speech. Throws kInvalidArgument for a clip
/// shorter than one frame.
std::optional<Segment> find_segment(const AudioClip& clip, const SegmenterConfig& config = {});
std::optional<AudioClip> segment(const AudioClip& clip, const SegmenterConfig& config = {});

/// FNV-1a over the rate and the 16-bit quantized samples, as 16 hex digits.
std::string fingerprint(const AudioClip& clip);

enum class TranscriptStatus { kOk, kNotUnderstood, kServiceError };

std::string_view to_string(TranscriptStatus status);

struct TranscriptResult {
  TranscriptStatus status = TranscriptStatus::kOk;
  std::string text;
  std::string detail;

  bool ok() const { return status == TranscriptStatus::kOk; }
};

/// Both failure kinds are reported, not thrown: the command loop carries on.
class Transcriber {
 public:
  virtual ~Transcriber() = default;
  virtual TranscriptResult transcribe(const AudioClip& clip, std::string_view language) = 0;
  virtual std::string name() const = 0;
};

/// Looks clips up by id, then by fingerprint, in an `id<TAB>text` manifest.
class MockTranscriber final : public Transcriber {
 public:
  MockTranscriber() = default;
  explicit MockTranscriber(std::map<std::string, std::string> entries)
      : entries_(std::move(entries)) {}

  static MockTranscriber from_manifest(std::string_view text);
  static MockTranscriber load(const std::filesystem::path& path);

  void add(std::string key, std::string text) { entries_[std::move(key)] = std::move(text); }
  std::size_t size() const { return entries_.size(); }

  TranscriptResult transcribe(const AudioClip& clip, std::string_view language) override;
  std::string name() const override { return "mock"; }

 private:
  std::map<std::string, std::string> entries_;
};

struct HttpTranscriberConfig {
  std::string base_url = "https://api.openai.com";
  std::optional<std::string> api_key;
  std::string model = "whisper-1";
  double timeout = 30.0;  // s
};

/// Whisper-style multipart upload to `<base_url>/v1/audio/transcriptions`.
class HttpTranscriber final : public Transcriber {
 public:
  explicit HttpTranscriber(HttpTranscriberConfig config);

  TranscriptResult transcribe(const AudioClip& clip, std::string_view language) override;
  std::string name() const override { return "http"; }

 private:
  HttpTranscriberConfig config_;
};

/// Acknowledgement lines spoken (or printed) after a command is accepted.
std::vector<std::string> default_feedback_messages();

/// Uniform choice from a fixed list; seeded runs repeat exactly.
class FeedbackSelector {
 public:
  explicit FeedbackSelector(std::vector<std::string> messages = default_feedback_messages(),
                            std::uint64_t seed = 0);

  const std::string& next();
  std::size_t index_next();
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
  std::mt19937_64 rng_;
};

/// One-off draw. Throws kInvalidArgument for an empty list.
std::string select_feedback(const std::vector<std::string>& messages, std::uint64_t seed);

}  // namespace teleop::speech
