#pragma once

// CSV and sidecar output. All writes are atomic (temp file + rename) so a
// crash mid-run never leaves a truncated artifact, and all number formatting
// is shortest-round-trip so re-running a job reproduces files byte for byte.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace kappatune {

// Shortest decimal string that parses back to exactly the same double.
// Infinities render as "inf"/"-inf".
std::string format_double(double value);

// Writes content to path via a sibling temp file and an atomic rename.
// Parent directories are created as needed.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
};

// Writes table to path atomically, plus a "<path>.meta.json" sidecar holding
// the supplied metadata (tool version, config echo, seeds -- never wall-clock
// time, which would break byte-identical reruns).
void write_csv_with_sidecar(const std::filesystem::path& path, const CsvTable& table,
                            const nlohmann::json& meta);

// Appends one row to an existing CSV, validating that the header matches.
// Creates the file (with header) when it does not exist yet. The rewrite is
// atomic like every other write here.
void append_csv_row(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::string>& row);

// Minimal CSV reader for our own output (no quoting: none of our fields
// contain commas). Throws FormatError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace kappatune
