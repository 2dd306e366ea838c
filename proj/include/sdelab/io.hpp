#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sdelab {

/// Format a double with 9 significant digits (round-trippable for the
/// magnitudes handled here, stable across platforms for CSV output).
std::string format_double(double x);

/// FNV-1a 64-bit hash of a byte string; used to fingerprint resolved
/// configurations in output provenance blocks.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hex rendering of a 64-bit hash (16 lowercase hex digits).
std::string hex64(std::uint64_t value);

/// Write `content` to `path` atomically: write to a sibling temp file,
/// fsync, then rename over the target.  Throws std::runtime_error on any
/// filesystem failure; on failure the target is left untouched.
void atomic_write_file(const std::string& path, std::string_view content);

/// Minimal CSV assembly: escape-free writer for numeric tables.  Rows are
/// joined with '\n'; a trailing newline terminates the file.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace sdelab
