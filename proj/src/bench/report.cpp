#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "teleop/bench.hpp"

namespace teleop::bench {

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Table summaries are printed to two decimals, by rounding or truncation.
bool printed_matches(double computed, double printed) {
  const double truncated = std::floor(computed * 100.0 + 1e-9) / 100.0;
  const double rounded = std::round(computed * 100.0) / 100.0;
  return std::abs(printed - truncated) < 1e-9 || std::abs(printed - rounded) < 1e-9;
}

}  // namespace

std::vector<Finding> check_reference(const ReferenceTable& table) {
  std::vector<Finding> out;
  std::map<std::string, Stats> stats;
  for (const auto& col : table.columns) stats[col.key] = summarize(col);

  for (const auto& col : table.columns) {
    const Stats& s = stats[col.key];
    if (col.reported_mean) {
      Finding f{"mean " + col.key, fixed(s.mean, 4), fixed(*col.reported_mean, 2),
                printed_matches(s.mean, *col.reported_mean), ""};
      if (!f.consistent) {
        f.note = "summary row differs from the mean of its own " + std::to_string(s.count) +
                 " values; both kept as given";
      }
      out.push_back(std::move(f));
    }
    if (col.reported_successes) {
      Finding f{"successes " + col.key, std::to_string(s.successes),
                std::to_string(*col.reported_successes),
                static_cast<int>(s.successes) == *col.reported_successes, ""};
      out.push_back(std::move(f));
    }
  }

  for (const auto& [key, claimed] : table.claims.mean) {
    if (!stats.count(key)) continue;
    Finding f{"claimed mean " + key, fixed(stats[key].mean, 4), fixed(claimed, 4),
              std::abs(stats[key].mean - claimed) < 5e-5, ""};
    if (!f.consistent) {
      for (const auto& [other, s] : stats) {
        if (other != key && std::abs(s.mean - claimed) < 5e-5) {
          f.note = "value equals the computed mean of '" + other + "'";
        }
      }
      for (const auto& col : table.columns) {
        if (f.note.empty() && col.key != key && col.reported_mean &&
            std::abs(*col.reported_mean - claimed) < 0.005) {
          f.note = "value is close to the printed summary of '" + col.key + "'";
        }
      }
    }
    out.push_back(std::move(f));
  }

  const auto& subject = table.claims.reduction_subject;
  const auto& baseline = table.claims.reduction_baseline;
  if (table.claims.reduction_percent && stats.count(subject) && stats.count(baseline)) {
    const double claimed = *table.claims.reduction_percent;
    const double from_columns = compare(stats[subject], stats[baseline]).percent_reduction;
    out.push_back({"reduction from column means", fixed(from_columns, 2), fixed(claimed, 2),
                   std::abs(from_columns - claimed) < 0.05,
                   subject + " mean " + fixed(stats[subject].mean, 4) + " vs " + baseline +
                       " mean " + fixed(stats[baseline].mean, 4)});
    if (table.claims.mean.count(subject) && table.claims.mean.count(baseline)) {
      const double a = table.claims.mean.at(subject);
      const double b = table.claims.mean.at(baseline);
      // The claimed means run the wrong way for a reduction, so take the
      // lower one against the higher one.
      const double lo = std::min(a, b);
      const double hi = std::max(a, b);
      const double from_claims = compare_means(lo, hi).percent_reduction;
      out.push_back({"reduction from claimed means", fixed(from_claims, 2), fixed(claimed, 2),
                     std::abs(from_claims - claimed) < 0.05,
                     fixed(lo, 4) + " vs " + fixed(hi, 4)});
    }
  }

  if (table.claims.lower_latency_cases && stats.count(subject) && stats.count(baseline)) {
    const auto& a = table.column(subject).latency;
    const auto& b = table.column(baseline).latency;
    int lower = 0;
    for (std::size_t i = 0; i < a.size(); ++i) lower += a[i] < b[i] ? 1 : 0;
    out.push_back({"rows where " + subject + " is faster than " + baseline,
                   std::to_string(lower), std::to_string(*table.claims.lower_latency_cases),
                   lower == *table.claims.lower_latency_cases, ""});
  }

  if (table.claims.misinterpreted && stats.count(table.claims.misinterpreted_column)) {
    const Stats& s = stats[table.claims.misinterpreted_column];
    const auto fails = static_cast<int>(s.count - s.successes);
    out.push_back({"misinterpreted " + table.claims.misinterpreted_column, std::to_string(fails),
                   std::to_string(*table.claims.misinterpreted), fails == *table.claims.misinterpreted,
                   "computed value counts FAIL rows"});
  }
  return out;
}

std::string format_reference_summary(const ReferenceTable& table) {
  std::ostringstream os;
  os << table.caption << " (reference data v" << table.version << ")\n";
  os << std::left << std::setw(26) << "configuration" << std::right << std::setw(9) << "mean"
     << std::setw(9) << "printed" << std::setw(7) << "min" << std::setw(7) << "max"
     << std::setw(11) << "successes" << '\n';
  for (const auto& col : table.columns) {
    const Stats s = summarize(col);
    os << std::left << std::setw(26) << col.label << std::right << std::setw(9) << fixed(s.mean, 4)
       << std::setw(9) << (col.reported_mean ? fixed(*col.reported_mean, 2) : "-") << std::setw(7)
       << fixed(s.min, 2) << std::setw(7) << fixed(s.max, 2) << std::setw(8) << s.successes << '/'
       << s.count << '\n';
  }
  return os.str();
}

std::string format_findings(const std::vector<Finding>& findings) {
  std::ostringstream os;
  for (const auto& f : findings) {
    os << (f.consistent ? "[ok]       " : "[mismatch] ") << f.check << ": computed " << f.computed
       << ", reported " << f.reported;
    if (!f.note.empty()) os << " (" << f.note << ")";
    os << '\n';
  }
  return os.str();
}

std::string format_records(const std::vector<llm::LatencyRecord>& records) {
  std::ostringstream os;
  os << std::right << std::setw(3) << "#" << std::setw(11) << "latency_s" << "  " << std::left
     << std::setw(6) << "result" << "command\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    os << std::right << std::setw(3) << (i + 1) << std::setw(11) << fixed(r.latency(), 4) << "  "
       << std::left << std::setw(6) << (r.success ? "OK" : "FAIL") << r.command;
    if (!r.success) {
      os << "  [" << (r.error ? to_string(*r.error) : std::string_view("mismatch")) << ": "
         << r.detail << "]";
    }
    os << '\n';
  }
  if (!records.empty()) {
    const Stats s = summarize(records);
    os << "mean " << fixed(s.mean, 4) << " s, min " << fixed(s.min, 4) << " s, max "
       << fixed(s.max, 4) << " s, successes " << s.successes << '/' << s.count << '\n';
  }
  return os.str();
}

std::string summary_tsv(const std::vector<llm::LatencyRecord>& records) {
  const Stats s = summarize(records);
  std::ostringstream os;
  os << "key\tvalue\n";
  os << "provider\t" << (records.empty() ? "" : records.front().provider) << '\n';
  os << "model\t" << (records.empty() ? "" : records.front().model) << '\n';
  os << "count\t" << s.count << '\n';
  os << "successes\t" << s.successes << '\n';
  os << "mean_s\t" << fixed(s.mean, 4) << '\n';
  os << "raw_mean_s\t" << fixed(s.raw_mean, 6) << '\n';
  os << "min_s\t" << fixed(s.min, 6) << '\n';
  os << "max_s\t" << fixed(s.max, 6) << '\n';
  return os.str();
}

std::string records_tsv(const std::vector<llm::LatencyRecord>& records) {
  std::ostringstream os;
  os << "row\tcommand\tlatency_s\tsuccess\terror\tresponse\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), '\t', ' ');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    os << (i + 1) << '\t' << r.command << '\t' << fixed(r.latency(), 6) << '\t'
       << (r.success ? "OK" : "FAIL") << '\t' << (r.error ? to_string(*r.error) : std::string_view(""))
       << '\t' << detail << '\n';
  }
  return os.str();
}

}  // namespace teleop::bench
