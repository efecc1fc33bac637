#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dynnet::eval {

/// Accuracies of one method under one scheme: accuracy[s][r] is subject
/// subjects[s] in repetition r.
struct ResultColumn {
  std::string name;
  std::vector<int> subjects;
  std::vector<std::vector<double>> accuracy;
  std::optional<double> p_value;  // against a paired column, if tested

  double subject_mean(std::size_t s) const;
  double subject_std(std::size_t s) const;
  /// Mean of subject means.
  double average() const;
  /// Std over repetitions of the per-repetition subject average.
  double average_std() const;
};

struct ResultsTable {
  std::vector<ResultColumn> columns;
  std::vector<std::string> notes;
};

/// Runs the paired t test on per-subject means of columns a and b (same
/// subjects) and records p on column a.
void mark_significance(ResultsTable& table, std::size_t a, std::size_t b);

inline constexpr double kSignificance = 0.005;

enum class TableFormat { csv, markdown };

/// Rows are subjects then AVG; cells "mean±std" with two decimals and a
/// "*" on AVG when p < 0.005.
std::string emit_table(const ResultsTable& table, TableFormat format);

std::string format_cell(double mean, double std, bool mark = false);

std::string serialize(const ResultsTable& table);
ResultsTable deserialize_results(const std::string& bytes);
void save(const ResultsTable& table, const std::filesystem::path& path);
ResultsTable load_results(const std::filesystem::path& path);

}  // namespace dynnet::eval
