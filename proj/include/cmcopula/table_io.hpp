#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "cmcopula/empirical.hpp"

namespace cmcopula {

/// Formats with 10 significant digits (shortest of fixed/scientific).
std::string format_number(double value);

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  Matrix data;
};

/// Reads a comma-separated numeric table with an optional single header row.
/// A first row containing any non-numeric field is taken as the header.
/// Blank lines are skipped. Throws ParseError (with the 1-based line number)
/// on ragged rows, non-numeric cells or an empty table.
CsvTable read_numeric_csv(std::istream& in);
CsvTable read_numeric_csv_file(const std::string& path);  // IoError if unreadable

void write_numeric_csv(std::ostream& out, const Matrix& data,
                       const std::vector<std::string>& header = {});

/// Writes `content` to `path` through a sibling temporary file and rename.
void write_file_atomically(const std::string& path, const std::string& content);

}  // namespace cmcopula
