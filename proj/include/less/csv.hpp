#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "less/dataset.hpp"
#include "less/matrix.hpp"

namespace less {

// Comma-separated, header row required, '.' decimal point. Surrounding
// whitespace and double quotes are stripped from every cell.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

// Throws DataError naming the file and line on unreadable input, ragged rows
// or non-numeric cells.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<input>");

// Splits off `target` as y; every other column becomes a feature.
Dataset dataset_from_table(const CsvTable& table, const std::string& target);
Dataset load_dataset(const std::string& path, const std::string& target);

// Reorders the table's columns to `feature_names`. A column named `target`
// is ignored if present; any other unknown or missing column is a DataError.
Matrix select_features(const CsvTable& table, std::span<const std::string> feature_names,
                       const std::string& target = {});

void write_csv(const std::string& path, const Dataset& data);
// One value per line, printed with enough digits to round-trip.
void write_predictions(const std::string& path, std::span<const double> values);
std::vector<double> read_predictions(const std::string& path);

// 64-bit FNV-1a over the file's bytes, as 16 hex digits.
std::string file_fingerprint(const std::string& path);

}  // namespace less
