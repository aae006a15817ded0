#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "netpath/errors.hpp"
#include "netpath/network.hpp"

namespace netpath {
namespace detail {

struct CsvField {
  std::string text;
  std::size_t column = 0;  // 1-based character column of the field start
};

/// Splits one CSV record. Handles double-quoted fields with embedded
/// commas and doubled quotes; trims unquoted whitespace.
inline std::vector<CsvField> split_csv_record(std::string_view line, std::size_t line_no) {
  std::vector<CsvField> fields;
  std::size_t pos = 0;
  const std::size_t n = line.size();
  while (true) {
    CsvField field;
    field.column = pos + 1;
    std::string value;
    if (pos < n && line[pos] == '"') {
      ++pos;
      bool closed = false;
      while (pos < n) {
        if (line[pos] == '"') {
          if (pos + 1 < n && line[pos + 1] == '"') {
            value.push_back('"');
            pos += 2;
          } else {
            ++pos;
            closed = true;
            break;
          }
        } else {
          value.push_back(line[pos++]);
        }
      }
      if (!closed) {
        throw ParseError("line " + std::to_string(line_no) + ", column " +
                         std::to_string(field.column) + ": unterminated quoted field");
      }
      while (pos < n && line[pos] != ',') ++pos;  // ignore stray trailing spaces
    } else {
      const std::size_t start = pos;
      while (pos < n && line[pos] != ',') ++pos;
      value.assign(line.substr(start, pos - start));
      const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
      while (!value.empty() && is_space(static_cast<unsigned char>(value.front()))) {
        value.erase(value.begin());
        ++field.column;
      }
      while (!value.empty() && is_space(static_cast<unsigned char>(value.back()))) {
        value.pop_back();
      }
    }
    field.text = std::move(value);
    fields.push_back(std::move(field));
    if (pos >= n) break;
    ++pos;  // consume the comma
  }
  return fields;
}

inline double parse_double_field(const CsvField& field, std::size_t line_no,
                                 const char* what) {
  const std::string& s = field.text;
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || s.empty() || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ", column " +
                     std::to_string(field.column) + ": malformed " + what + " '" + s + "'");
  }
  return value;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Groups rows by unordered pair (first-appearance order) and pools each
/// group to a single comparison.
inline std::vector<DirectComparison> pool_rows(std::vector<DirectComparison> rows) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<Estimate>> groups;
  for (auto& r : rows) {
    auto key = std::make_pair(r.t1.label, r.t2.label);
    double effect = r.effect;
    if (key.second < key.first) {
      std::swap(key.first, key.second);
      effect = -effect;
    }
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(Estimate{effect, r.variance});
  }
  std::vector<DirectComparison> pooled;
  pooled.reserve(order.size());
  for (const auto& key : order) {
    const auto& contrasts = groups.at(key);
    const Estimate est = pool_pairwise(contrasts);
    pooled.push_back(DirectComparison{TreatmentId{key.first}, TreatmentId{key.second},
                                      est.effect, est.variance,
                                      static_cast<int>(contrasts.size())});
  }
  return pooled;
}

}  // namespace detail

/// Parses contrast-level rows from CSV text with the header
/// `treat1,treat2,effect,variance` and an optional trailing `studlab`
/// column. Rows for the same unordered pair are pooled into one
/// comparison. Failures carry the 1-based line and column.
inline std::vector<DirectComparison> parse_contrast_csv(const std::string& text) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest = text;
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }

  std::size_t header_line = 0;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (!lines[k].empty()) {
      header_line = k + 1;
      break;
    }
  }
  if (header_line == 0) {
    throw ParseError("empty input: expected header treat1,treat2,effect,variance");
  }

  const auto header = detail::split_csv_record(lines[header_line - 1], header_line);
  static const char* expected[] = {"treat1", "treat2", "effect", "variance"};
  if (header.size() < 4 || header.size() > 5) {
    throw ParseError("line " + std::to_string(header_line) +
                     ": expected header treat1,treat2,effect,variance[,studlab], got " +
                     std::to_string(header.size()) + " columns");
  }
  for (std::size_t c = 0; c < 4; ++c) {
    if (detail::lower(header[c].text) != expected[c]) {
      throw ParseError("line " + std::to_string(header_line) + ", column " +
                       std::to_string(header[c].column) + ": expected header field '" +
                       expected[c] + "', got '" + header[c].text + "'");
    }
  }
  const bool has_studlab = header.size() == 5;
  if (has_studlab && detail::lower(header[4].text) != "studlab") {
    throw ParseError("line " + std::to_string(header_line) + ", column " +
                     std::to_string(header[4].column) +
                     ": expected header field 'studlab', got '" + header[4].text + "'");
  }

  std::vector<DirectComparison> rows;
  for (std::size_t k = header_line; k < lines.size(); ++k) {
    const std::size_t line_no = k + 1;
    if (lines[k].empty()) continue;
    const auto fields = detail::split_csv_record(lines[k], line_no);
    if (fields.size() < 4 || fields.size() > header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " columns, got " +
                       std::to_string(fields.size()));
    }
    DirectComparison row;
    row.t1.label = fields[0].text;
    row.t2.label = fields[1].text;
    if (row.t1.label.empty() || row.t2.label.empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty treatment label");
    }
    row.effect = detail::parse_double_field(fields[2], line_no, "effect");
    row.variance = detail::parse_double_field(fields[3], line_no, "variance");
    if (!(row.variance > 0.0)) {
      throw ParseError("line " + std::to_string(line_no) + ", column " +
                       std::to_string(fields[3].column) + ": variance must be > 0, got " +
                       fields[3].text);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ParseError("no data rows after the header");
  }
  return detail::pool_rows(std::move(rows));
}

/// Parses the JSON equivalent of the CSV schema: an array of objects
/// with fields treat1, treat2, effect, variance and optional studlab.
/// A top-level object holding that array under "comparisons" is also
/// accepted.
inline std::vector<DirectComparison> parse_contrast_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  const nlohmann::json* arr = &doc;
  if (doc.is_object()) {
    if (!doc.contains("comparisons")) {
      throw ParseError("JSON object lacks a 'comparisons' array");
    }
    arr = &doc.at("comparisons");
  }
  if (!arr->is_array()) {
    throw ParseError("expected a JSON array of comparison objects");
  }
  std::vector<DirectComparison> rows;
  std::size_t index = 0;
  for (const auto& item : *arr) {
    ++index;
    const std::string where = "comparison #" + std::to_string(index);
    if (!item.is_object()) {
      throw ParseError(where + ": expected an object");
    }
    for (const char* key : {"treat1", "treat2", "effect", "variance"}) {
      if (!item.contains(key)) {
        throw ParseError(where + ": missing field '" + key + "'");
      }
    }
    DirectComparison row;
    if (!item.at("treat1").is_string() || !item.at("treat2").is_string()) {
      throw ParseError(where + ": treat1/treat2 must be strings");
    }
    row.t1.label = item.at("treat1").get<std::string>();
    row.t2.label = item.at("treat2").get<std::string>();
    if (row.t1.label.empty() || row.t2.label.empty()) {
      throw ParseError(where + ": empty treatment label");
    }
    if (!item.at("effect").is_number() || !item.at("variance").is_number()) {
      throw ParseError(where + ": effect/variance must be numbers");
    }
    row.effect = item.at("effect").get<double>();
    row.variance = item.at("variance").get<double>();
    if (!(row.variance > 0.0)) {
      throw ParseError(where + ": variance must be > 0");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ParseError("no comparisons in JSON input");
  }
  return detail::pool_rows(std::move(rows));
}

/// Dispatches on the first non-whitespace byte: '[' or '{' means JSON,
/// anything else is treated as CSV.
inline std::vector<DirectComparison> parse_contrasts(const std::string& text) {
  for (const char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '[' || c == '{') return parse_contrast_json(text);
    break;
  }
  return parse_contrast_csv(text);
}

/// Reads and parses a network file; parse failures are rethrown with the
/// path prefixed.
inline EvidenceNetwork load_network_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return build_network(parse_contrasts(buf.str()));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  const bool needs_quotes =
      s.find_first_of(",\"\r\n") != std::string::npos ||
      (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                      std::isspace(static_cast<unsigned char>(s.back()))));
  if (!needs_quotes) return s;
  std::string quoted = "\"";
  for (const char c : s) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace detail

/// Serializes a network back to the input CSV schema. Numbers use %.17g,
/// so parsing the output reproduces every effect and variance bit for
/// bit.
inline std::string network_to_csv(const EvidenceNetwork& net) {
  std::string out = "treat1,treat2,effect,variance\n";
  char buf[64];
  for (const auto& e : net.edges()) {
    out += detail::csv_escape(e.t1.label);
    out += ',';
    out += detail::csv_escape(e.t2.label);
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", e.effect, e.variance);
    out += buf;
  }
  return out;
}

}  // namespace netpath
