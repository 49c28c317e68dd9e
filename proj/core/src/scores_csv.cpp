#include "frodo/scores_csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "frodo/error.hpp"

namespace frodo {

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

double parse_number(std::string_view token) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size() || token.empty()) {
    fail(ErrorCode::MalformedRow, "not a number: '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string> score_methods() {
  std::vector<std::string> methods;
  for (Layer layer : kAllLayers) methods.emplace_back(layer_name(layer));
  methods.emplace_back("fused");
  methods.emplace_back("baseline");
  return methods;
}

std::optional<double> score_column(const ScoreRow& row, std::string_view method) {
  if (method == "fused") return row.fused;
  if (method == "baseline") return row.baseline;
  if (const auto layer = parse_layer(method)) {
    if (auto it = row.per_layer.find(*layer); it != row.per_layer.end()) return it->second;
    return std::nullopt;
  }
  fail(ErrorCode::InvalidArgument, "unknown score column '" + std::string(method) + "'");
}

void write_scores_csv(const std::vector<ScoreRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << kScoresHeader << '\n';
  const auto methods = score_methods();
  for (const auto& row : rows) {
    out << row.sample_id << ',' << label_name(row.label);
    for (const auto& method : methods) {
      out << ',';
      if (const auto v = score_column(row, method)) out << format_number(*v);
    }
    out << '\n';
  }
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed on " + path.string());
}

std::vector<ScoreRow> parse_scores_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  if (lines.empty() || lines.front() != kScoresHeader) {
    fail(ErrorCode::MissingColumn, "scores header must be '" + std::string(kScoresHeader) + "'");
  }
  const auto methods = score_methods();
  std::vector<ScoreRow> rows;
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const std::size_t comma = lines[i].find(',', start);
      fields.push_back(lines[i].substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 2 + methods.size()) {
      fail(ErrorCode::MalformedRow, "scores line " + std::to_string(i + 1) + " has " +
                                        std::to_string(fields.size()) + " fields");
    }
    ScoreRow row;
    row.sample_id = std::string(fields[0]);
    if (!seen.insert(row.sample_id).second) {
      fail(ErrorCode::DuplicateSample, "sample_id '" + row.sample_id + "' appears twice");
    }
    const auto label = parse_label(fields[1]);
    if (!label) fail(ErrorCode::BadLabel, "unknown label '" + std::string(fields[1]) + "'");
    row.label = *label;
    for (Layer layer : kAllLayers) {
      const auto cell = fields[2 + static_cast<std::size_t>(layer)];
      if (!cell.empty()) row.per_layer.emplace(layer, parse_number(cell));
    }
    if (!fields[7].empty()) row.fused = parse_number(fields[7]);
    if (!fields[8].empty()) row.baseline = parse_number(fields[8]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open scores " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scores_csv(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace frodo
