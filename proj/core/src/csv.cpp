#include "pinn/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "pinn/errors.hpp"

namespace pinn {

std::string fmt_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, bool* ok) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  bool good = res.ec == std::errc() && res.ptr == text.data() + text.size();
  if (ok != nullptr) {
    *ok = good;
    return good ? value : 0.0;
  }
  if (!good) throw IoError("malformed number: '" + std::string(text) + "'");
  return value;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw IoError("cannot open for writing: " + path.string());
}

void CsvWriter::header(std::span<const std::string> columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << fmt_double(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << '\n'; }

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  for (auto& kv : entries_) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

const std::string* KeyValueFile::find(const std::string& key) const {
  for (const auto& kv : entries_) {
    if (kv.first == key) return &kv.second;
  }
  return nullptr;
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr) throw IoError("missing key: " + key);
  return parse_double(*v);
}

std::string KeyValueFile::to_string() const {
  std::ostringstream os;
  for (const auto& kv : entries_) os << kv.first << '=' << kv.second << '\n';
  return os.str();
}

void KeyValueFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << to_string();
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  KeyValueFile kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw IoError("malformed line in " + path.string() + ": " + line);
    kv.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

}  // namespace pinn
