#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/core.hpp"
#include "teleop/interpreter.hpp"
#include "teleop/llm_gateway.hpp"

namespace teleop::bench {

struct CommandCase {
  std::string id;
  std::string transcript;
  CommandIntent expected;
};

/// Tab-separated, header `id transcript action magnitude speed`, '#' comments.
std::vector<CommandCase> parse_corpus(std::string_view text);
std::vector<CommandCase> load_corpus(const std::filesystem::path& path);
std::vector<CommandCase> bundled_corpus();
std::string_view bundled_corpus_text();

struct ReferenceColumn {
  std::string key;  // gpt35, gpt4, rosgpt
  std::string label;
  std::vector<double> latency;  // s
  std::vector<bool> success;
  std::optional<double> reported_mean;
  std::optional<int> reported_successes;
};

/// Figures quoted next to the table, stored as given.
struct ReferenceClaims {
  std::map<std::string, double> mean;  // by column key
  std::optional<double> reduction_percent;
  std::string reduction_subject;   // column key that is claimed faster
  std::string reduction_baseline;  // column key it is compared against
  std::optional<int> lower_latency_cases;
  std::optional<int> misinterpreted;
  std::string misinterpreted_column;
};

inline constexpr std::size_t kReferenceRows = 20;

struct ReferenceTable {
  int version = 0;
  std::string caption;
  std::string checksum;
  std::vector<ReferenceColumn> columns;
  ReferenceClaims claims;

  const ReferenceColumn& column(std::string_view key) const;
};

/// Verifies the row count and the FNV-1a checksum; throws kDataIntegrity.
ReferenceTable parse_reference_table(std::string_view text);
ReferenceTable bundled_reference_table();
std::string_view bundled_reference_text();

/// FNV-1a 64 as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct Stats {
  double mean = 0.0;  // rounded to 4 decimals
  double raw_mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  std::size_t successes = 0;
};

/// Throws kInvalidArgument when empty.
Stats summarize(const std::vector<double>& latencies, std::size_t successes);
Stats summarize(const ReferenceColumn& column);
Stats summarize(const std::vector<llm::LatencyRecord>& records);

struct Comparison {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double delta = 0.0;              // mean_b - mean_a
  double percent_reduction = 0.0;  // delta / mean_b * 100
};

/// How much lower `a` is than `b`. Throws kInvalidArgument when b's mean is 0.
Comparison compare(const Stats& a, const Stats& b);
Comparison compare_means(double mean_a, double mean_b);

/// Action equal; magnitude and speed within `tolerance`.
bool intents_match(const CommandIntent& a, const CommandIntent& b, double tolerance = 1e-9);

struct BenchPolicy {
  /// Extra attempts after a provider failure. Zero keeps latency honest.
  int retries = 0;
  double match_tolerance = 1e-9;
  interp::DefaultsConfig defaults{};
};

/// Runs the cases one after another, never in parallel. Failures become
/// FAIL rows and the run continues.
std::vector<llm::LatencyRecord> run_bench(const std::vector<CommandCase>& corpus,
                                          llm::ChatProvider& provider,
                                          const BenchPolicy& policy = {});

/// One consistency check between the table's numbers and what they imply.
struct Finding {
  std::string check;
  std::string computed;
  std::string reported;
  bool consistent = true;
  std::string note;
};

std::vector<Finding> check_reference(const ReferenceTable& table);

/// Human-readable views.
std::string format_reference_summary(const ReferenceTable& table);
std::string format_findings(const std::vector<Finding>& findings);
std::string format_records(const std::vector<llm::LatencyRecord>& records);

/// Machine-readable summary: one `key<TAB>value` per line.
std::string summary_tsv(const std::vector<llm::LatencyRecord>& records);
/// Per-row records as TSV with a header.
std::string records_tsv(const std::vector<llm::LatencyRecord>& records);

/// Latency column as a mock schedule, e.g. for replaying the baseline.
llm::LatencySchedule column_schedule(const ReferenceColumn& column);

}  // namespace teleop::bench
