#include "wapss/detail/json_util.hpp"

#include <fstream>
#include <sstream>

namespace wapss::detail {

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const ordered_json& j, Eigen::Index rows,
                        Eigen::Index cols, const std::string& key) {
  if (!j.is_array())
    throw ParseError("field \"" + key + "\" must be an array of rows");
  if (static_cast<Eigen::Index>(j.size()) != rows)
    throw DimensionMismatch("field \"" + key + "\" has " +
                            std::to_string(j.size()) + " rows, expected " +
                            std::to_string(rows));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const ordered_json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array())
      throw ParseError("row " + std::to_string(i) + " of \"" + key +
                       "\" is not an array");
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw DimensionMismatch("row " + std::to_string(i) + " of \"" + key +
                              "\" has " + std::to_string(row.size()) +
                              " entries, expected " + std::to_string(cols));
    for (Eigen::Index k = 0; k < cols; ++k) {
      const ordered_json& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_number())
        throw ParseError("entry (" + std::to_string(i) + "," +
                         std::to_string(k) + ") of \"" + key +
                         "\" is not a number");
      m(i, k) = cell.get<double>();
    }
  }
  return m;
}

Matrix matrix_from_json_any(const ordered_json& j, const std::string& key) {
  if (!j.is_array())
    throw ParseError("field \"" + key + "\" must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const ordered_json& first = j[0];
  if (!first.is_array())
    throw ParseError("rows of \"" + key + "\" must be arrays");
  return matrix_from_json(j, rows, static_cast<Eigen::Index>(first.size()),
                          key);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open \"" + path + "\" for writing");
  out << text;
  if (!out) throw ParseError("failed to write \"" + path + "\"");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace wapss::detail
