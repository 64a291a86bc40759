// SPDX-License-Identifier: Apache-2.0

#include "ironstream/columnar.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace ironstream {

void write_columnar(const std::string& path, const ColumnarTable& table) {
  if (table.names.size() != table.columns.size())
    throw CodecError("columnar: name/column count mismatch");
  for (const auto& c : table.columns)
    if (c.size() != table.rows()) throw CodecError("columnar: ragged columns");

  std::ofstream out(path);
  if (!out) throw IoError("columnar: cannot open '" + path + "' for writing");
  out << "#";
  for (const auto& n : table.names) out << " " << n;
  out << "\n";
  out << std::setprecision(12);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << "\t";
      out << table.columns[c][r];
    }
    out << "\n";
  }
  if (!out) throw IoError("columnar: write failed for '" + path + "'");
}

ColumnarTable read_columnar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("columnar: cannot open '" + path + "'");
  ColumnarTable table;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  bool saw_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!saw_header && !saw_data) {
        std::istringstream is(line.substr(1));
        std::string name;
        while (is >> name) table.names.push_back(name);
        table.columns.assign(table.names.size(), {});
        saw_header = true;
      }
      continue;
    }
    std::istringstream is(line);
    double v;
    std::size_t c = 0;
    while (is >> v) {
      if (c >= table.columns.size()) {
        if (!saw_header && !saw_data) {
          // headerless file: synthesize names on the first data row
          table.names.push_back("c" + std::to_string(table.names.size()));
          table.columns.emplace_back();
        } else {
          throw CodecError("columnar: line " + std::to_string(lineno) + " has extra columns");
        }
      }
      table.columns[c].push_back(v);
      ++c;
    }
    saw_data = true;
    if (c != table.columns.size())
      throw CodecError("columnar: line " + std::to_string(lineno) + " has " + std::to_string(c) +
                       " columns, expected " + std::to_string(table.columns.size()));
  }
  return table;
}

}  // namespace ironstream
