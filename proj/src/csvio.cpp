#include "kappatune/csvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "kappatune/errors.hpp"

namespace kappatune {

std::string format_double(double value) {
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  if (std::isnan(value)) {
    return "nan";
  }
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) {
    throw FormatError("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path parent = path.parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw FormatError("cannot open '" + tmp.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw FormatError("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw FormatError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                      "': " + ec.message());
  }
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) {
      out << ',';
    }
    out << header[i];
  }
  out << '\n';
  for (const std::vector<std::string>& row : rows) {
    if (row.size() != header.size()) {
      throw FormatError("csv row has " + std::to_string(row.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) {
        out << ',';
      }
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

void write_csv_with_sidecar(const std::filesystem::path& path, const CsvTable& table,
                            const nlohmann::json& meta) {
  write_file_atomic(path, table.to_string());
  std::filesystem::path side = path;
  side += ".meta.json";
  write_file_atomic(side, meta.dump(2) + "\n");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open '" + path.string() + "' for reading");
  }
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw FormatError("'" + path.string() + "': row with " + std::to_string(fields.size()) +
                          " fields, expected " + std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) {
    throw FormatError("'" + path.string() + "': empty csv");
  }
  return table;
}

void append_csv_row(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::string>& row) {
  if (row.size() != header.size()) {
    throw FormatError("append_csv_row: row/header width mismatch");
  }
  CsvTable table;
  if (std::filesystem::exists(path)) {
    table = read_csv(path);
    if (table.header != header) {
      throw FormatError("'" + path.string() + "': existing header does not match");
    }
  } else {
    table.header = header;
  }
  table.rows.push_back(row);
  write_file_atomic(path, table.to_string());
}

}  // namespace kappatune
