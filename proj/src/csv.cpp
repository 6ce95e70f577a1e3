#include "less/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "less/errors.hpp"

namespace less {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::string_view rest(text);
  if (rest.size() >= 3 && rest.substr(0, 3) == "\xEF\xBB\xBF") rest.remove_prefix(3);
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<double> row;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (!have_header) {
      for (auto c : cells) {
        if (c.empty()) throw DataError(source + ":" + std::to_string(line_no) + ": empty column name");
        table.header.emplace_back(c);
      }
      table.values = Matrix(0, table.header.size());
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " cells, found " + std::to_string(cells.size()));
    }
    row.assign(cells.size(), 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string_view cell = cells[c];
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[c]);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(row[c])) {
        throw DataError(source + ":" + std::to_string(line_no) + ": column '" + table.header[c] +
                        "': non-numeric cell '" + std::string(cells[c]) + "'");
      }
    }
    table.values.append_row(row);
  }
  if (!have_header) throw DataError(source + ": missing header row");
  return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path), path); }

Dataset dataset_from_table(const CsvTable& table, const std::string& target) {
  std::size_t t = table.header.size();
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == target) t = c;
  }
  if (t == table.header.size()) throw DataError("target column '" + target + "' not found");
  if (table.header.size() < 2) throw DataError("no feature columns besides the target");
  Dataset data;
  data.target_name = target;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c != t) data.feature_names.push_back(table.header[c]);
  }
  data.X = Matrix(table.values.rows(), table.header.size() - 1);
  data.y.resize(table.values.rows());
  for (std::size_t r = 0; r < table.values.rows(); ++r) {
    std::size_t j = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == t) {
        data.y[r] = table.values(r, c);
      } else {
        data.X(r, j++) = table.values(r, c);
      }
    }
  }
  return data;
}

Dataset load_dataset(const std::string& path, const std::string& target) {
  Dataset data = dataset_from_table(read_csv(path), target);
  data.validate();
  return data;
}

Matrix select_features(const CsvTable& table, std::span<const std::string> feature_names,
                       const std::string& target) {
  std::vector<std::size_t> source(feature_names.size(), table.header.size());
  std::string missing;
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (table.header[c] == feature_names[j]) source[j] = c;
    }
    if (source[j] == table.header.size()) missing += (missing.empty() ? "" : ", ") + feature_names[j];
  }
  std::string extra;
  for (const auto& name : table.header) {
    if (name == target) continue;
    bool known = false;
    for (const auto& f : feature_names) known = known || f == name;
    if (!known) extra += (extra.empty() ? "" : ", ") + name;
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "column mismatch:";
    if (!missing.empty()) msg += " missing [" + missing + "]";
    if (!extra.empty()) msg += " extra [" + extra + "]";
    throw DataError(msg);
  }
  Matrix X(table.values.rows(), feature_names.size());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t j = 0; j < X.cols(); ++j) X(r, j) = table.values(r, source[j]);
  }
  return X;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < data.p(); ++j) {
    out << (data.feature_names.size() == data.p() ? data.feature_names[j] : "x" + std::to_string(j)) << ',';
  }
  out << (data.target_name.empty() ? "y" : data.target_name) << '\n';
  for (std::size_t r = 0; r < data.n(); ++r) {
    for (std::size_t j = 0; j < data.p(); ++j) out << format_g17(data.X(r, j)) << ',';
    out << format_g17(data.y[r]) << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

void write_predictions(const std::string& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (double v : values) out << format_g17(v) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::vector<double> read_predictions(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<double> out;
  std::string_view rest(text);
  std::size_t line_no = 0;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = trim(rest.substr(0, nl));
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": not a number");
    }
    out.push_back(v);
  }
  return out;
}

std::string file_fingerprint(const std::string& path) {
  const std::string bytes = read_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace less
