#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pinn {

/// Shortest decimal form that round-trips the exact double (via to_chars).
std::string fmt_double(double v);

double parse_double(std::string_view text, bool* ok = nullptr);

/// Comma-delimited writer: period decimal separator, one header row.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void header(std::span<const std::string> columns);
  void row(std::span<const double> values);
  void raw_row(const std::string& line);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

/// metrics.txt style files: one `key=value` per line, insertion-ordered.
class KeyValueFile {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value) { set(key, fmt_double(value)); }
  const std::string* find(const std::string& key) const;
  double get_double(const std::string& key) const;  // IoError when missing
  std::string to_string() const;
  void save(const std::filesystem::path& path) const;
  static KeyValueFile load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace pinn
