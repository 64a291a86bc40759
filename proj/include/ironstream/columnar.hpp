// SPDX-License-Identifier: Apache-2.0
#pragma once

// Plot-ready columnar text: '#'-prefixed header line with column names,
// then one whitespace-separated row per record.

#include <string>
#include <vector>

#include "ironstream/errors.hpp"

namespace ironstream {

struct ColumnarTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // one vector per name

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

void write_columnar(const std::string& path, const ColumnarTable& table);
ColumnarTable read_columnar(const std::string& path);  // throws IoError / CodecError

}  // namespace ironstream
