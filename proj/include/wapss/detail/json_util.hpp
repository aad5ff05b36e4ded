#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "wapss/model.hpp"

namespace wapss::detail {

using ordered_json = nlohmann::ordered_json;

ordered_json matrix_to_json(const Matrix& m);

// Parses a rows x cols matrix, checking the declared shape.
Matrix matrix_from_json(const ordered_json& j, Eigen::Index rows,
                        Eigen::Index cols, const std::string& key);

// Parses a matrix whose shape is taken from the document itself (array of
// equal-length rows).
Matrix matrix_from_json_any(const ordered_json& j, const std::string& key);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace wapss::detail
