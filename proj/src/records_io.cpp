// Copyright 2026 The gmedian Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gmedian/error.hpp"
#include "gmedian/experiments.hpp"

namespace gmedian {
namespace {

constexpr std::array<std::string_view, 8> kColumns = {
    "dist", "p", "replicate", "n", "l2_bias", "component_dev_1", "residual_1", "wall_time_s"};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& text, std::string_view column, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw SchemaError("line " + std::to_string(line_no) + ": cannot parse column '" +
                      std::string(column) + "' from '" + text + "'");
  }
  return value;
}

}  // namespace

void write_records(std::span<const RunRecord> records, std::ostream& out) {
  out << kRecordsHeader << '\n';
  for (const auto& rec : records) {
    if (rec.dist.find_first_of(",\n\r") != std::string::npos) {
      throw SchemaError("distribution id '" + rec.dist + "' cannot be written to CSV");
    }
    out << rec.dist << ',' << rec.p << ',' << rec.replicate << ',' << rec.n << ','
        << format_double(rec.l2_bias) << ',' << format_double(rec.component_dev_1) << ','
        << format_double(rec.residual_1) << ',' << format_double(rec.wall_time_s) << '\n';
  }
  if (!out) throw IoError("failed writing records");
}

void write_records(std::span<const RunRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_records(records, out);
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);

  std::array<int, kColumns.size()> index{};
  index.fill(-1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto it = std::find(kColumns.begin(), kColumns.end(), header[c]);
    if (it == kColumns.end()) throw SchemaError("unknown column '" + header[c] + "'");
    auto& slot = index[static_cast<std::size_t>(it - kColumns.begin())];
    if (slot >= 0) throw SchemaError("duplicate column '" + header[c] + "'");
    slot = static_cast<int>(c);
  }
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    if (index[k] < 0) throw SchemaError("missing column '" + std::string(kColumns[k]) + "'");
  }

  std::vector<RunRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    auto col = [&](std::size_t k) -> const std::string& {
      return fields[static_cast<std::size_t>(index[k])];
    };
    RunRecord rec;
    rec.dist = col(0);
    rec.p = parse_field<Eigen::Index>(col(1), kColumns[1], line_no);
    rec.replicate = parse_field<int>(col(2), kColumns[2], line_no);
    rec.n = parse_field<std::int64_t>(col(3), kColumns[3], line_no);
    rec.l2_bias = parse_field<double>(col(4), kColumns[4], line_no);
    rec.component_dev_1 = parse_field<double>(col(5), kColumns[5], line_no);
    rec.residual_1 = parse_field<double>(col(6), kColumns[6], line_no);
    rec.wall_time_s = parse_field<double>(col(7), kColumns[7], line_no);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_records(in);
}

}  // namespace gmedian
