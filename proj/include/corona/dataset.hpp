#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corona {

/// Column-oriented table of named input variables plus an optional target.
/// Columns share one length and hold only finite values.
class Dataset {
 public:
  Dataset() = default;

  /// Throws Error(InvalidInput) on ragged columns, duplicate names or
  /// non-finite entries.
  Dataset(std::vector<std::string> variable_names, std::vector<std::vector<double>> columns,
          std::string target_name = {}, std::vector<double> target = {});

  std::size_t rows() const noexcept { return rows_; }
  const std::vector<std::string>& variable_names() const noexcept { return names_; }

  bool has_variable(std::string_view name) const;
  /// Throws Error(UnboundVariable) when absent.
  std::span<const double> column(std::string_view name) const;

  bool has_target() const noexcept { return !target_name_.empty(); }
  const std::string& target_name() const noexcept { return target_name_; }
  std::span<const double> target() const noexcept { return target_; }

  /// Per-variable median, used for monotonicity nominal values.
  double median(std::string_view name) const;
  double min(std::string_view name) const;
  double max(std::string_view name) const;

  Dataset subset(std::span<const std::size_t> row_indices) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::string target_name_;
  std::vector<double> target_;
  std::size_t rows_ = 0;
};

/// CSV ingestion: UTF-8, comma separated, '.' decimal, header row first.
/// The target column is `target` when given, otherwise the last column.
/// Malformed rows raise Error(InvalidInput) whose message names the 1-based
/// line number.
Dataset read_csv(std::string_view text, std::optional<std::string> target = std::nullopt);
Dataset read_csv_file(const std::filesystem::path& path,
                      std::optional<std::string> target = std::nullopt);

}  // namespace corona
