#include "rar/io.hpp"

#include "rar/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace rar {

namespace {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::string at_line(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Non-blank lines split into fields; a UTF-8 byte-order mark is dropped.
std::vector<Row> read_rows(std::string_view text, char delimiter, const std::string& source) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<Row> rows;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto raw = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    ++line;
    if (!trim(raw).empty()) {
      try {
        rows.push_back({line, split_record(raw, delimiter)});
      } catch (const ValidationError& e) {
        throw ValidationError(at_line(source, line) + e.what());
      }
    }
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return rows;
}

double parse_number(const std::string& cell, const std::string& column, const std::string& source,
                    std::size_t line) {
  const std::string_view s = trim(cell);
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (s.empty() || ec != std::errc() || ptr != last)
    throw ValidationError(at_line(source, line) + "non-numeric value '" + cell + "' in column '" +
                          column + "'");
  return value;
}

std::unordered_map<std::string, Index> index_ids(const std::vector<std::string>& unit_ids) {
  std::unordered_map<std::string, Index> index;
  for (std::size_t i = 0; i < unit_ids.size(); ++i) index.emplace(unit_ids[i], static_cast<Index>(i));
  return index;
}

void require_header(const std::vector<Row>& rows, std::size_t min_columns,
                    const std::string& what, const std::string& source) {
  if (rows.empty()) throw ValidationError(source + ": empty " + what + " file (header row required)");
  if (rows.front().fields.size() < min_columns)
    throw ValidationError(at_line(source, rows.front().line) + what + " header needs at least " +
                          std::to_string(min_columns) + " columns");
}

void check_width(const Row& row, std::size_t width, const std::string& source) {
  if (row.fields.size() != width)
    throw ValidationError(at_line(source, row.line) + "expected " + std::to_string(width) +
                          " fields, found " + std::to_string(row.fields.size()));
}

std::string quote_if_needed(const std::string& s, char delimiter) {
  if (s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<std::string> split_record(std::string_view line, char delimiter) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == delimiter) {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted field");
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

Dataset parse_dataset(std::string_view text, Family family, const CsvOptions& options,
                      const std::string& source) {
  const auto rows = read_rows(text, options.delimiter, source);
  require_header(rows, 3, "dataset", source);
  const auto& header = rows.front().fields;
  const bool has_offset = header.size() >= 4 && header[2] == "offset";
  const std::size_t exposure_col = has_offset ? 3 : 2;
  if (header.size() <= exposure_col)
    throw ValidationError(at_line(source, rows.front().line) + "missing column 'exposure'");
  const std::size_t width = header.size();
  const auto n = static_cast<Index>(rows.size() - 1);
  const auto q = static_cast<Index>(width - exposure_col - 1);

  Dataset data;
  data.unit_ids.reserve(static_cast<std::size_t>(n));
  data.y.resize(n);
  data.exposure.resize(n);
  if (has_offset) data.offset.resize(n);
  data.covariates.resize(n, q);
  data.covariate_names.assign(header.begin() + static_cast<std::ptrdiff_t>(exposure_col + 1),
                              header.end());

  std::unordered_map<std::string, std::size_t> first_seen;
  for (Index r = 0; r < n; ++r) {
    const Row& row = rows[static_cast<std::size_t>(r + 1)];
    check_width(row, width, source);
    const std::string& id = row.fields[0];
    if (id.empty()) throw ValidationError(at_line(source, row.line) + "empty unit_id");
    if (auto [it, fresh] = first_seen.emplace(id, row.line); !fresh)
      throw ValidationError(at_line(source, row.line) + "duplicate unit_id '" + id +
                            "' (first seen on line " + std::to_string(it->second) + ")");
    data.unit_ids.push_back(id);
    data.y[r] = parse_number(row.fields[1], header[1], source, row.line);
    if (has_offset) data.offset[r] = parse_number(row.fields[2], header[2], source, row.line);
    data.exposure[r] = parse_number(row.fields[exposure_col], header[exposure_col], source, row.line);
    for (Index j = 0; j < q; ++j) {
      const auto col = exposure_col + 1 + static_cast<std::size_t>(j);
      data.covariates(r, j) = parse_number(row.fields[col], header[col], source, row.line);
    }
  }
  data.validate(family);
  return data;
}

Dataset load_dataset(const std::string& path, Family family, const CsvOptions& options) {
  return parse_dataset(read_text_file(path), family, options, path);
}

AdjacencyMatrix parse_adjacency(std::string_view text, const std::vector<std::string>& unit_ids,
                                const CsvOptions& options, const std::string& source) {
  const auto rows = read_rows(text, options.delimiter, source);
  require_header(rows, 2, "adjacency", source);
  std::vector<IdEdge> edges;
  edges.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    check_width(rows[r], 2, source);
    edges.emplace_back(rows[r].fields[0], rows[r].fields[1]);
  }
  try {
    return build_adjacency(edges, unit_ids);
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

AdjacencyMatrix load_adjacency(const std::string& path, const std::vector<std::string>& unit_ids,
                               const CsvOptions& options) {
  return parse_adjacency(read_text_file(path), unit_ids, options, path);
}

std::string render_adjacency(const AdjacencyMatrix& w, const std::vector<std::string>& unit_ids,
                             const CsvOptions& options) {
  if (static_cast<Index>(unit_ids.size()) != w.n)
    throw ValidationError("unit id count does not match adjacency size");
  const char d = options.delimiter;
  std::string out = std::string("unit_id_a") + d + "unit_id_b\n";
  for (const auto& [a, b] : w.edges) {
    out += quote_if_needed(unit_ids[static_cast<std::size_t>(a)], d);
    out += d;
    out += quote_if_needed(unit_ids[static_cast<std::size_t>(b)], d);
    out += '\n';
  }
  return out;
}

void write_adjacency(const std::string& path, const AdjacencyMatrix& w,
                     const std::vector<std::string>& unit_ids, const CsvOptions& options) {
  write_text_file(path, render_adjacency(w, unit_ids, options));
}

Partition parse_labels(std::string_view text, const std::vector<std::string>& unit_ids,
                       const CsvOptions& options, const std::string& source) {
  const auto rows = read_rows(text, options.delimiter, source);
  require_header(rows, 2, "labels", source);
  const auto index = index_ids(unit_ids);
  std::vector<int> raw(unit_ids.size(), 0);
  std::vector<std::size_t> seen_on(unit_ids.size(), 0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    check_width(row, 2, source);
    const auto it = index.find(row.fields[0]);
    if (it == index.end())
      throw ValidationError(at_line(source, row.line) + "unknown unit_id '" + row.fields[0] + "'");
    const auto i = static_cast<std::size_t>(it->second);
    if (seen_on[i] != 0)
      throw ValidationError(at_line(source, row.line) + "duplicate unit_id '" + row.fields[0] +
                            "' (first seen on line " + std::to_string(seen_on[i]) + ")");
    seen_on[i] = row.line;
    const double v = parse_number(row.fields[1], rows.front().fields[1], source, row.line);
    if (v != static_cast<double>(static_cast<int>(v)))
      throw ValidationError(at_line(source, row.line) + "region label must be an integer");
    raw[i] = static_cast<int>(v);
  }
  for (std::size_t i = 0; i < unit_ids.size(); ++i)
    if (seen_on[i] == 0)
      throw ValidationError(source + ": no label for unit '" + unit_ids[i] + "'");
  return Partition::from_labels(raw);
}

Partition load_labels(const std::string& path, const std::vector<std::string>& unit_ids,
                      const CsvOptions& options) {
  return parse_labels(read_text_file(path), unit_ids, options, path);
}

std::string render_labels(const Partition& partition, const std::vector<std::string>& unit_ids,
                          const CsvOptions& options) {
  if (partition.size() != static_cast<Index>(unit_ids.size()))
    throw ValidationError("partition size does not match unit id count");
  const char d = options.delimiter;
  std::string out = std::string("unit_id") + d + "region\n";
  for (std::size_t i = 0; i < unit_ids.size(); ++i) {
    out += quote_if_needed(unit_ids[i], d);
    out += d;
    out += std::to_string(partition.labels[i]);
    out += '\n';
  }
  return out;
}

void write_labels(const std::string& path, const Partition& partition,
                  const std::vector<std::string>& unit_ids, const CsvOptions& options) {
  write_text_file(path, render_labels(partition, unit_ids, options));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

}  // namespace rar
