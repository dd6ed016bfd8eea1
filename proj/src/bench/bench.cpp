#include <algorithm>
#include <cmath>
#include <numeric>

#include "teleop/bench.hpp"

namespace teleop::bench {

Stats summarize(const std::vector<double>& latencies, std::size_t successes) {
  if (latencies.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to summarize");
  Stats s;
  s.count = latencies.size();
  s.successes = successes;
  s.raw_mean = std::accumulate(latencies.begin(), latencies.end(), 0.0) /
               static_cast<double>(latencies.size());
  s.mean = std::round(s.raw_mean * 1e4) / 1e4;
  const auto [lo, hi] = std::minmax_element(latencies.begin(), latencies.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

Stats summarize(const ReferenceColumn& column) {
  const auto ok = static_cast<std::size_t>(
      std::count(column.success.begin(), column.success.end(), true));
  return summarize(column.latency, ok);
}

Stats summarize(const std::vector<llm::LatencyRecord>& records) {
  std::vector<double> latencies;
  std::size_t ok = 0;
  for (const auto& r : records) {
    latencies.push_back(r.latency());
    ok += r.success ? 1 : 0;
  }
  return summarize(latencies, ok);
}

Comparison compare_means(double mean_a, double mean_b) {
  if (mean_b == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "percent reduction is undefined for a zero baseline");
  }
  Comparison c;
  c.mean_a = mean_a;
  c.mean_b = mean_b;
  c.delta = mean_b - mean_a;
  c.percent_reduction = c.delta / mean_b * 100.0;
  return c;
}

Comparison compare(const Stats& a, const Stats& b) {
  if (a.count == 0 || b.count == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot compare empty statistics");
  }
  return compare_means(a.mean, b.mean);
}

bool intents_match(const CommandIntent& a, const CommandIntent& b, double tolerance) {
  return a.action == b.action && std::abs(a.magnitude - b.magnitude) <= tolerance &&
         std::abs(a.speed - b.speed) <= tolerance;
}

std::vector<llm::LatencyRecord> run_bench(const std::vector<CommandCase>& corpus,
                                          llm::ChatProvider& provider,
                                          const BenchPolicy& policy) {
  std::vector<llm::LatencyRecord> records;
  records.reserve(corpus.size());
  for (const auto& c : corpus) {
    llm::LatencyRecord rec;
    rec.command = c.transcript;
    rec.provider = provider.name();
    rec.model = provider.model();
    for (int attempt = 0; attempt <= policy.retries; ++attempt) {
      rec.error.reset();
      rec.detail.clear();
      try {
        const auto completion = provider.complete(interp::build_prompts(c.transcript, policy.defaults));
        rec.t_request = completion.t_request;
        rec.t_response = completion.t_response;
        rec.detail = completion.content;
        rec.intent = interp::parse_response(completion.content);
        rec.success = intents_match(*rec.intent, c.expected, policy.match_tolerance);
        if (!rec.success) rec.error = ErrorCode::kInvalidIntent;
        break;
      } catch (const llm::ProviderFailure& e) {
        rec.t_request = e.t_request();
        rec.t_response = e.t_response();
        rec.error = e.code();
        rec.detail = e.what();
      } catch (const Error& e) {
        // Parse failures are the model's answer, not a transport fault: no retry.
        rec.error = e.code();
        rec.detail += rec.detail.empty() ? e.what() : std::string(" | ") + e.what();
        break;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

llm::LatencySchedule column_schedule(const ReferenceColumn& column) {
  return llm::LatencySchedule(llm::LatencySchedule::Sequence{column.latency});
}

}  // namespace teleop::bench
