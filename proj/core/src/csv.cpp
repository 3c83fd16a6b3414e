#include "mfgcn/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mfgcn::csv {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{}) {
    throw std::invalid_argument("csv: cannot parse number from '" + s + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("csv: cannot write " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("csv: cannot read " + path.string());
  return f;
}

}  // namespace

void write(const std::filesystem::path& path, const Table& table) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) f << ',';
    f << table.header[i];
  }
  f << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) f << ',';
      f << row[i];
    }
    f << '\n';
  }
}

Table read(const std::filesystem::path& path) {
  auto f = open_in(path);
  Table t;
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("csv: empty file " + path.string());
  t.header = split_line(line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_line(line));
  }
  return t;
}

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& header,
                  const std::vector<std::vector<double>>& rows) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) f << ',';
    f << header[i];
  }
  f << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) f << ',';
      f << format_double(row[i]);
    }
    f << '\n';
  }
}

NumericTable read_matrix(const std::filesystem::path& path) {
  Table t = read(path);
  NumericTable out;
  out.header = t.header;
  out.rows.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size()) {
      throw std::runtime_error("csv: row " + std::to_string(r + 1) + " of " + path.string() +
                               " has " + std::to_string(t.rows[r].size()) + " fields, expected " +
                               std::to_string(t.header.size()));
    }
    std::vector<double> row;
    row.reserve(t.rows[r].size());
    for (const auto& cell : t.rows[r]) row.push_back(parse_double(cell));
    out.rows.push_back(std::move(row));
  }
  return out;
}

void write_plain_matrix(const std::filesystem::path& path,
                        const std::vector<std::vector<double>>& rows) {
  auto f = open_out(path);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) f << ',';
      f << format_double(row[i]);
    }
    f << '\n';
  }
}

std::vector<std::vector<double>> read_plain_matrix(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::vector<std::vector<double>> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    if (!out.empty() && out.back().size() != row.size()) {
      throw std::runtime_error("csv: ragged matrix in " + path.string());
    }
    out.push_back(std::move(row));
  }
  if (out.empty()) throw std::runtime_error("csv: empty matrix " + path.string());
  return out;
}

}  // namespace mfgcn::csv
