#include "teleop/speech.hpp"

namespace teleop::speech {

std::vector<std::string> default_feedback_messages() {
  return {
      "On it.",
      "Command received.",
      "Moving now.",
      "Understood, executing.",
      "Got it.",
  };
}

FeedbackSelector::FeedbackSelector(std::vector<std::string> messages, std::uint64_t seed)
    : messages_(std::move(messages)), rng_(seed) {
  if (messages_.empty()) throw Error(ErrorCode::kInvalidArgument, "feedback list is empty");
}

std::size_t FeedbackSelector::index_next() {
  return std::uniform_int_distribution<std::size_t>(0, messages_.size() - 1)(rng_);
}

const std::string& FeedbackSelector::next() { return messages_[index_next()]; }

std::string select_feedback(const std::vector<std::string>& messages, std::uint64_t seed) {
  return FeedbackSelector(messages, seed).next();
}

}  // namespace teleop::speech
