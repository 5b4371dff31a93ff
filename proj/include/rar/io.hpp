#pragma once

#include "rar/affinity.hpp"
#include "rar/dataset.hpp"
#include "rar/partition.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rar {

struct CsvOptions {
  char delimiter = ',';
};

/// Splits one delimited line. Fields may be double-quoted; "" inside quotes
/// is a literal quote. Throws ValidationError on an unterminated quote.
std::vector<std::string> split_record(std::string_view line, char delimiter);

/// Header row then one row per unit: unit_id, y, [offset,] exposure,
/// covariates... The offset column is recognized by its header name
/// "offset". Row order becomes the canonical unit order. Parse errors carry
/// the 1-based line number; the result is validated for `family`.
Dataset load_dataset(const std::string& path, Family family, const CsvOptions& options = {});
Dataset parse_dataset(std::string_view text, Family family, const CsvOptions& options = {},
                      const std::string& source = "<input>");

/// Header row then one undirected edge per row: unit_id_a, unit_id_b.
AdjacencyMatrix load_adjacency(const std::string& path, const std::vector<std::string>& unit_ids,
                               const CsvOptions& options = {});
AdjacencyMatrix parse_adjacency(std::string_view text, const std::vector<std::string>& unit_ids,
                                const CsvOptions& options = {},
                                const std::string& source = "<input>");
std::string render_adjacency(const AdjacencyMatrix& w, const std::vector<std::string>& unit_ids,
                             const CsvOptions& options = {});
void write_adjacency(const std::string& path, const AdjacencyMatrix& w,
                     const std::vector<std::string>& unit_ids, const CsvOptions& options = {});

/// Header row then unit_id, region. Every unit must appear exactly once;
/// region values are arbitrary integers renumbered by first appearance in
/// canonical unit order.
Partition load_labels(const std::string& path, const std::vector<std::string>& unit_ids,
                      const CsvOptions& options = {});
Partition parse_labels(std::string_view text, const std::vector<std::string>& unit_ids,
                       const CsvOptions& options = {}, const std::string& source = "<input>");
std::string render_labels(const Partition& partition, const std::vector<std::string>& unit_ids,
                          const CsvOptions& options = {});
void write_labels(const std::string& path, const Partition& partition,
                  const std::vector<std::string>& unit_ids, const CsvOptions& options = {});

/// Whole-file read and write; failures raise IoError naming the path.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace rar
