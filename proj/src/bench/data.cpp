#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "teleop/bench.hpp"

namespace teleop::bench {

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  while (true) {
    const auto tab = line.find('\t');
    out.emplace_back(line.substr(0, tab));
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  return out;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(std::move(line));
  }
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kDataIntegrity, where + ": '" + s + "' is not a number");
  }
  return v;
}

int to_int(const std::string& s, const std::string& where) {
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw Error(ErrorCode::kDataIntegrity, where + ": '" + s + "' is not an integer");
  }
  return v;
}

bool to_flag(const std::string& s, const std::string& where) {
  if (s == "OK") return true;
  if (s == "FAIL") return false;
  throw Error(ErrorCode::kDataIntegrity, where + ": success flag must be OK or FAIL");
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

std::vector<CommandCase> parse_corpus(std::string_view text) {
  std::vector<CommandCase> out;
  bool header_seen = false;
  int number = 0;
  for (const auto& line : lines_of(text)) {
    ++number;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    const std::string where = "corpus line " + std::to_string(number);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"id", "transcript", "action", "magnitude", "speed"}) {
        throw Error(ErrorCode::kDataIntegrity, where + ": unexpected header");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) throw Error(ErrorCode::kDataIntegrity, where + ": expected 5 fields");
    const double magnitude = to_double(fields[3], where);
    const double speed = to_double(fields[4], where);
    CommandIntent expected;
    if (fields[2] == "move") {
      expected = CommandIntent::move(magnitude, speed);
    } else if (fields[2] == "rotate") {
      expected = CommandIntent::rotate(magnitude, speed);
    } else {
      throw Error(ErrorCode::kDataIntegrity, where + ": action must be move or rotate");
    }
    try {
      validate_intent(expected);
    } catch (const Error& e) {
      throw Error(ErrorCode::kDataIntegrity, where + ": " + e.what());
    }
    out.push_back({fields[0], fields[1], expected});
  }
  if (!header_seen) throw Error(ErrorCode::kDataIntegrity, "corpus has no header");
  return out;
}

std::vector<CommandCase> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open corpus '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus(buffer.str());
}

std::vector<CommandCase> bundled_corpus() { return parse_corpus(bundled_corpus_text()); }

const ReferenceColumn& ReferenceTable::column(std::string_view key) const {
  for (const auto& c : columns) {
    if (c.key == key) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "no reference column '" + std::string(key) + "'");
}

ReferenceTable parse_reference_table(std::string_view text) {
  ReferenceTable table;
  std::string checked;  // header + data rows joined by LF
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> labels;
  std::map<std::string, double> reported_mean;
  std::map<std::string, int> reported_successes;

  for (const auto& line : lines_of(text)) {
    if (line.empty()) continue;
    if (line.rfind("#@", 0) == 0) {
      const auto f = split_tabs(std::string_view(line).substr(2));
      const std::string& key = f[0];
      const std::string where = "reference metadata '" + key + "'";
      auto need = [&](std::size_t n) {
        if (f.size() != n) throw Error(ErrorCode::kDataIntegrity, where + ": wrong field count");
      };
      if (key == "version") {
        need(2);
        table.version = to_int(f[1], where);
      } else if (key == "caption") {
        need(2);
        table.caption = f[1];
      } else if (key == "label") {
        need(3);
        labels[f[1]] = f[2];
      } else if (key == "reported_mean") {
        need(3);
        reported_mean[f[1]] = to_double(f[2], where);
      } else if (key == "reported_successes") {
        need(3);
        reported_successes[f[1]] = to_int(f[2], where);
      } else if (key == "claim_mean") {
        need(3);
        table.claims.mean[f[1]] = to_double(f[2], where);
      } else if (key == "claim_reduction_percent") {
        need(4);
        table.claims.reduction_subject = f[1];
        table.claims.reduction_baseline = f[2];
        table.claims.reduction_percent = to_double(f[3], where);
      } else if (key == "claim_lower_latency_cases") {
        need(4);
        table.claims.lower_latency_cases = to_int(f[3], where);
      } else if (key == "claim_misinterpreted") {
        need(3);
        table.claims.misinterpreted_column = f[1];
        table.claims.misinterpreted = to_int(f[2], where);
      } else if (key == "checksum") {
        need(3);
        if (f[1] != "fnv1a64") throw Error(ErrorCode::kDataIntegrity, "unknown checksum kind");
        table.checksum = f[2];
      }
      continue;
    }
    if (line.front() == '#') continue;
    if (!checked.empty()) checked += '\n';
    checked += line;
    if (header.empty()) {
      header = split_tabs(line);
    } else {
      rows.push_back(split_tabs(line));
    }
  }

  if (table.checksum.empty()) throw Error(ErrorCode::kDataIntegrity, "reference table has no checksum");
  if (fnv1a_hex(checked) != table.checksum) {
    throw Error(ErrorCode::kDataIntegrity, "reference table checksum mismatch");
  }
  if (rows.size() != kReferenceRows) {
    throw Error(ErrorCode::kDataIntegrity, "reference table must have exactly 20 rows");
  }
  if (header.empty() || header[0] != "row" || header.size() % 2 != 1) {
    throw Error(ErrorCode::kDataIntegrity, "reference header must be row, then latency/success pairs");
  }

  for (std::size_t c = 1; c < header.size(); c += 2) {
    const std::string& lat = header[c];
    const std::string& ok = header[c + 1];
    const auto suffix = lat.rfind("_latency");
    if (suffix == std::string::npos || ok != lat.substr(0, suffix) + "_success") {
      throw Error(ErrorCode::kDataIntegrity, "bad reference column pair '" + lat + "'");
    }
    ReferenceColumn col;
    col.key = lat.substr(0, suffix);
    col.label = labels.count(col.key) ? labels[col.key] : col.key;
    if (reported_mean.count(col.key)) col.reported_mean = reported_mean[col.key];
    if (reported_successes.count(col.key)) col.reported_successes = reported_successes[col.key];
    table.columns.push_back(std::move(col));
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = "reference row " + std::to_string(r + 1);
    if (rows[r].size() != header.size()) throw Error(ErrorCode::kDataIntegrity, where + ": field count");
    if (to_int(rows[r][0], where) != static_cast<int>(r + 1)) {
      throw Error(ErrorCode::kDataIntegrity, where + ": rows out of order");
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const double latency = to_double(rows[r][1 + 2 * c], where);
      if (latency < 0.0) throw Error(ErrorCode::kDataIntegrity, where + ": negative latency");
      table.columns[c].latency.push_back(latency);
      table.columns[c].success.push_back(to_flag(rows[r][2 + 2 * c], where));
    }
  }
  return table;
}

ReferenceTable bundled_reference_table() { return parse_reference_table(bundled_reference_text()); }

}  // namespace teleop::bench
