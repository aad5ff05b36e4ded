#include "wapss/model.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "wapss/detail/json_util.hpp"

namespace wapss {

using json = nlohmann::ordered_json;
using detail::matrix_from_json;
using detail::matrix_to_json;

std::string to_string(StateLabel::Kind kind) {
  switch (kind) {
    case StateLabel::Kind::Delta:
      return "delta";
    case StateLabel::Kind::Omega:
      return "omega";
    case StateLabel::Kind::Other:
      return "other";
  }
  return "other";
}

StateLabel::Kind kind_from_string(const std::string& text) {
  if (text == "delta") return StateLabel::Kind::Delta;
  if (text == "omega") return StateLabel::Kind::Omega;
  if (text == "other") return StateLabel::Kind::Other;
  throw ParseError("unknown state kind \"" + text +
                   "\" (expected delta, omega, or other)");
}

namespace {

Eigen::Index read_size(const json& j, const std::string& key) {
  if (!j.contains(key))
    throw ParseError("missing required field \"" + key + "\"");
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ParseError("field \"" + key + "\" must be a non-negative integer");
  return static_cast<Eigen::Index>(v.get<long long>());
}

void require_only_keys(const json& j, std::initializer_list<const char*> keys,
                       const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ParseError("unknown field \"" + item.key() + "\" in " + where);
  }
}

void check_finite_or_throw(const Matrix& m, const std::string& key) {
  if (!m.allFinite())
    throw NonFinite("matrix \"" + key + "\" contains a non-finite entry");
}

}  // namespace

LtiModel model_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("top-level JSON value must be an object");
  require_only_keys(
      j, {"n", "m", "q", "p_l", "p_r", "A", "B", "E", "Cl", "Cr", "state_labels"},
      "model document");
  const Eigen::Index n = read_size(j, "n");
  const Eigen::Index m = read_size(j, "m");
  const Eigen::Index q = read_size(j, "q");
  const Eigen::Index p_l = read_size(j, "p_l");
  const Eigen::Index p_r = read_size(j, "p_r");
  for (const char* key : {"A", "B", "E", "Cl", "Cr", "state_labels"})
    if (!j.contains(key))
      throw ParseError("missing required field \"" + std::string(key) + "\"");

  LtiModel model;
  model.A = matrix_from_json(j.at("A"), n, n, "A");
  model.B = matrix_from_json(j.at("B"), n, m, "B");
  model.E = matrix_from_json(j.at("E"), n, q, "E");
  model.Cl = matrix_from_json(j.at("Cl"), p_l, n, "Cl");
  model.Cr = matrix_from_json(j.at("Cr"), p_r, n, "Cr");

  const json& labels = j.at("state_labels");
  if (!labels.is_array())
    throw ParseError("field \"state_labels\" must be an array");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw DimensionMismatch("field \"state_labels\" has " +
                            std::to_string(labels.size()) +
                            " entries, expected " + std::to_string(n));
  for (const json& entry : labels) {
    if (!entry.is_object())
      throw ParseError("each state label must be an object");
    require_only_keys(entry, {"name", "kind", "machine"}, "state label");
    for (const char* key : {"name", "kind", "machine"})
      if (!entry.contains(key))
        throw ParseError("state label missing required field \"" +
                         std::string(key) + "\"");
    if (!entry.at("name").is_string())
      throw ParseError("state label \"name\" must be a string");
    if (!entry.at("kind").is_string())
      throw ParseError("state label \"kind\" must be a string");
    if (!entry.at("machine").is_number_integer())
      throw ParseError("state label \"machine\" must be an integer");
    StateLabel label;
    label.name = entry.at("name").get<std::string>();
    label.kind = kind_from_string(entry.at("kind").get<std::string>());
    label.machine = entry.at("machine").get<int>();
    model.state_labels.push_back(std::move(label));
  }

  for (const auto& [mat, key] :
       std::initializer_list<std::pair<const Matrix*, const char*>>{
           {&model.A, "A"},
           {&model.B, "B"},
           {&model.E, "E"},
           {&model.Cl, "Cl"},
           {&model.Cr, "Cr"}})
    check_finite_or_throw(*mat, key);

  return model;
}

std::string model_to_json_text(const LtiModel& model) {
  for (const auto& [mat, key] :
       std::initializer_list<std::pair<const Matrix*, const char*>>{
           {&model.A, "A"},
           {&model.B, "B"},
           {&model.E, "E"},
           {&model.Cl, "Cl"},
           {&model.Cr, "Cr"}})
    check_finite_or_throw(*mat, key);
  if (static_cast<Eigen::Index>(model.state_labels.size()) != model.n())
    throw DimensionMismatch("model has " +
                            std::to_string(model.state_labels.size()) +
                            " state labels for " + std::to_string(model.n()) +
                            " states");

  json j;
  j["n"] = model.n();
  j["m"] = model.m();
  j["q"] = model.q();
  j["p_l"] = model.p_l();
  j["p_r"] = model.p_r();
  j["A"] = matrix_to_json(model.A);
  j["B"] = matrix_to_json(model.B);
  j["E"] = matrix_to_json(model.E);
  j["Cl"] = matrix_to_json(model.Cl);
  j["Cr"] = matrix_to_json(model.Cr);
  json labels = json::array();
  for (const StateLabel& label : model.state_labels) {
    json entry;
    entry["name"] = label.name;
    entry["kind"] = to_string(label.kind);
    entry["machine"] = label.machine;
    labels.push_back(std::move(entry));
  }
  j["state_labels"] = std::move(labels);
  return j.dump() + "\n";
}

LtiModel load_model(const std::string& path) {
  return model_from_json_text(detail::read_text_file(path));
}

void save_model(const LtiModel& model, const std::string& path) {
  detail::write_text_file(path, model_to_json_text(model));
}

ValidationReport validate_model(const LtiModel& model) {
  ValidationReport report;
  auto add = [&report](const std::string& code, const std::string& message) {
    report.issues.push_back({code, message});
  };

  const Eigen::Index n = model.A.rows();
  if (n == 0) add("empty_state", "state dimension n must be at least 1");
  if (model.A.cols() != n)
    add("A_not_square", "A must be square, got " + std::to_string(n) + "x" +
                            std::to_string(model.A.cols()));
  if (model.B.rows() != n)
    add("B_rows", "B has " + std::to_string(model.B.rows()) +
                      " rows, expected " + std::to_string(n));
  if (model.E.rows() != n)
    add("E_rows", "E has " + std::to_string(model.E.rows()) +
                      " rows, expected " + std::to_string(n));
  if (model.Cl.cols() != n)
    add("Cl_cols", "Cl has " + std::to_string(model.Cl.cols()) +
                       " columns, expected " + std::to_string(n));
  if (model.Cr.cols() != n && model.Cr.rows() > 0)
    add("Cr_cols", "Cr has " + std::to_string(model.Cr.cols()) +
                       " columns, expected " + std::to_string(n));
  if (model.Cl.rows() == 0)
    add("no_local_outputs", "Cl must provide at least one measured row");

  for (const auto& [mat, key] :
       std::initializer_list<std::pair<const Matrix*, const char*>>{
           {&model.A, "A"},
           {&model.B, "B"},
           {&model.E, "E"},
           {&model.Cl, "Cl"},
           {&model.Cr, "Cr"}}) {
    if (!mat->allFinite())
      add(std::string(key) + "_non_finite",
          std::string("matrix ") + key + " contains a non-finite entry");
  }

  if (static_cast<Eigen::Index>(model.state_labels.size()) != n)
    add("label_count", "expected " + std::to_string(n) + " state labels, got " +
                           std::to_string(model.state_labels.size()));
  for (std::size_t i = 0; i < model.state_labels.size(); ++i) {
    const StateLabel& label = model.state_labels[i];
    if (label.name.empty())
      add("label_name_empty",
          "state label " + std::to_string(i) + " has an empty name");
    if ((label.kind == StateLabel::Kind::Delta ||
         label.kind == StateLabel::Kind::Omega) &&
        label.machine < 1)
      add("label_machine",
          "state label " + std::to_string(i) +
              " is an angle/speed state but carries no 1-based machine index");
  }
  return report;
}

std::vector<int> states_of_kind(const LtiModel& model, StateLabel::Kind kind) {
  std::vector<int> out;
  for (std::size_t i = 0; i < model.state_labels.size(); ++i)
    if (model.state_labels[i].kind == kind) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace wapss
