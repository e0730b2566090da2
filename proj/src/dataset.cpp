#include "corona/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "corona/error.hpp"

namespace corona {

Dataset::Dataset(std::vector<std::string> variable_names, std::vector<std::vector<double>> columns,
                 std::string target_name, std::vector<double> target)
    : names_(std::move(variable_names)),
      columns_(std::move(columns)),
      target_name_(std::move(target_name)),
      target_(std::move(target)) {
  if (names_.size() != columns_.size()) {
    throw Error(ErrorKind::InvalidInput, "variable name count does not match column count");
  }
  std::set<std::string> unique(names_.begin(), names_.end());
  if (unique.size() != names_.size()) throw Error(ErrorKind::InvalidInput, "duplicate column name");
  if (has_target() && unique.count(target_name_)) {
    throw Error(ErrorKind::InvalidInput, "target name collides with a variable");
  }

  rows_ = has_target() ? target_.size() : (columns_.empty() ? 0 : columns_.front().size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != rows_) {
      throw Error(ErrorKind::InvalidInput, "column '" + names_[j] + "' has a different length");
    }
    for (double v : columns_[j]) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::InvalidInput, "column '" + names_[j] + "' has a non-finite value");
      }
    }
  }
  for (double v : target_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "target has a non-finite value");
  }
}

bool Dataset::has_variable(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::span<const double> Dataset::column(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw Error(ErrorKind::UnboundVariable, "dataset has no column '" + std::string(name) + "'");
  }
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

double Dataset::median(std::string_view name) const {
  auto values = std::vector<double>(column(name).begin(), column(name).end());
  if (values.empty()) throw Error(ErrorKind::EmptyDataset, "median of an empty column");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double Dataset::min(std::string_view name) const {
  const auto col = column(name);
  if (col.empty()) throw Error(ErrorKind::EmptyDataset, "min of an empty column");
  return *std::min_element(col.begin(), col.end());
}

double Dataset::max(std::string_view name) const {
  const auto col = column(name);
  if (col.empty()) throw Error(ErrorKind::EmptyDataset, "max of an empty column");
  return *std::max_element(col.begin(), col.end());
}

Dataset Dataset::subset(std::span<const std::size_t> row_indices) const {
  std::vector<std::vector<double>> cols(columns_.size());
  std::vector<double> target;
  for (auto r : row_indices) {
    for (std::size_t j = 0; j < columns_.size(); ++j) cols[j].push_back(columns_[j].at(r));
    if (has_target()) target.push_back(target_.at(r));
  }
  return Dataset(names_, std::move(cols), target_name_, std::move(target));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

Dataset read_csv(std::string_view text, std::optional<std::string> target) {
  // Strip a UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto cells = split_commas(line);
    if (header.empty()) {
      for (auto c : cells) {
        if (c.empty()) {
          throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ": empty column name");
        }
        header.emplace_back(c);
      }
      columns.resize(header.size());
      continue;
    }
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(header.size()) + " cells, found " +
                                               std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto v = parse_number(cells[j]);
      if (!v) {
        throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ", column '" +
                                                 header[j] + "': missing or non-numeric cell '" +
                                                 std::string(cells[j]) + "'");
      }
      columns[j].push_back(*v);
    }
    if (end == text.size()) break;
  }
  if (header.empty()) throw Error(ErrorKind::EmptyDataset, "CSV has no header row");

  std::size_t target_col = header.size() - 1;
  if (target) {
    const auto it = std::find(header.begin(), header.end(), *target);
    if (it == header.end()) {
      throw Error(ErrorKind::InvalidInput, "target column '" + *target + "' not in header");
    }
    target_col = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::string> names;
  std::vector<std::vector<double>> vars;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == target_col) continue;
    names.push_back(header[j]);
    vars.push_back(std::move(columns[j]));
  }
  return Dataset(std::move(names), std::move(vars), header[target_col], std::move(columns[target_col]));
}

Dataset read_csv_file(const std::filesystem::path& path, std::optional<std::string> target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_csv(buf.str(), std::move(target));
}

}  // namespace corona
