#pragma once

#include <string>
#include <vector>

namespace scod {

enum class Split { kId, kOod, kUnlabeled };

std::string to_string(Split split);
Split split_from_string(const std::string& text);

// Flat per-sample table: fixed id/split/label fields plus named real-valued
// columns (features, scores, losses). Empty CSV cells read back as NaN.
struct SampleTable {
  struct Row {
    std::string id;
    Split split;
    int label;  // -1 for OOD/UNLABELED
    std::vector<double> values;
  };

  std::vector<std::string> columns;
  std::vector<Row> rows;

  // index into Row::values; throws DataError when the column is missing
  std::size_t column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::size_t count(Split split) const;
};

SampleTable read_table_csv(const std::string& path);
void write_table_csv(const SampleTable& table, const std::string& path);

// 17-significant-digit serialization used in all data files
std::string format_value(double v);

}  // namespace scod
