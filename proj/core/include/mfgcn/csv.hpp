#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mfgcn::csv {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write(const std::filesystem::path& path, const Table& table);
Table read(const std::filesystem::path& path);

/// Headered numeric matrix, the on-disk form of feature matrices and maps.
void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& header,
                  const std::vector<std::vector<double>>& rows);

struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
NumericTable read_matrix(const std::filesystem::path& path);

/// Dense matrix with no header (fixation / saliency maps).
void write_plain_matrix(const std::filesystem::path& path,
                        const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> read_plain_matrix(const std::filesystem::path& path);

double parse_double(const std::string& s);

}  // namespace mfgcn::csv
