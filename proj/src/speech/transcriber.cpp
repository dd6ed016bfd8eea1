#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "teleop/speech.hpp"
#include "teleop/url.hpp"

namespace teleop::speech {

std::string_view to_string(TranscriptStatus status) {
  switch (status) {
    case TranscriptStatus::kOk: return "ok";
    case TranscriptStatus::kNotUnderstood: return "not_understood";
    case TranscriptStatus::kServiceError: return "service_error";
  }
  return "unknown";
}

MockTranscriber MockTranscriber::from_manifest(std::string_view text) {
  MockTranscriber out;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::kConfig,
                  "manifest line " + std::to_string(number) + " is not 'id<TAB>text'");
    }
    out.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

MockTranscriber MockTranscriber::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open manifest '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_manifest(buffer.str());
}

TranscriptResult MockTranscriber::transcribe(const AudioClip& clip, std::string_view) {
  if (!clip.id.empty()) {
    if (auto it = entries_.find(clip.id); it != entries_.end()) return {TranscriptStatus::kOk, it->second, {}};
  }
  const std::string key = fingerprint(clip);
  if (auto it = entries_.find(key); it != entries_.end()) return {TranscriptStatus::kOk, it->second, {}};
  return {TranscriptStatus::kNotUnderstood, {}, "clip " + key + " is not in the manifest"};
}

HttpTranscriber::HttpTranscriber(HttpTranscriberConfig config) : config_(std::move(config)) {
  if (!(config_.timeout > 0.0)) throw Error(ErrorCode::kConfig, "transcriber timeout must be positive");
  (void)split_base_url(config_.base_url);
}

TranscriptResult HttpTranscriber::transcribe(const AudioClip& clip, std::string_view language) {
  const BaseUrl url = split_base_url(config_.base_url);
  httplib::Client client(url.origin);
  if (!client.is_valid()) {
    return {TranscriptStatus::kServiceError, {}, "cannot create a client for " + url.origin};
  }
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (config_.api_key) client.set_bearer_token_auth(*config_.api_key);

  // Whisper takes ISO-639-1 codes; "en-US" becomes "en".
  const std::string lang(language.substr(0, language.find_first_of("-_")));
  httplib::MultipartFormDataItems items{
      {"file", encode_wav(clip), "clip.wav", "audio/wav"},
      {"model", config_.model, "", ""},
      {"response_format", "json", "", ""},
  };
  if (!lang.empty()) items.push_back({"language", lang, "", ""});

  auto res = client.Post(url.prefix + "/v1/audio/transcriptions", items);
  if (!res) {
    return {TranscriptStatus::kServiceError, {}, httplib::to_string(res.error())};
  }
  if (res->status >= 400) {
    return {TranscriptStatus::kServiceError, {}, "HTTP " + std::to_string(res->status)};
  }
  const auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("text") || !doc["text"].is_string()) {
    return {TranscriptStatus::kServiceError, {}, "malformed transcription response"};
  }
  std::string text = doc["text"].get<std::string>();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {TranscriptStatus::kNotUnderstood, {}, "empty transcript"};
  text = text.substr(first, text.find_last_not_of(" \t\r\n") - first + 1);
  return {TranscriptStatus::kOk, std::move(text), {}};
}

}  // namespace teleop::speech
