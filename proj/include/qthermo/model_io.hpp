#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qthermo/generator.hpp"

// Model file schema:
//   { "states": ["a", "b", ...],
//     "rates": [[...], ...]                                  // n x n, row-major
//           or [{"from": "a", "to": "b", "rate": 1.0}, ...] } // edge list
// Unlisted edges have rate 0 and the matrix diagonal is ignored.

namespace qthermo {

struct Model {
  std::vector<std::string> states;
  /// Raw off-diagonal rates, diagonal zero.
  Matrix rates;

  Generator generator() const { return validate_generator(rates); }
};

namespace detail {

[[noreturn]] inline void parse_error(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

inline double rate_value(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) parse_error(where + ": rate must be a number");
  return v.get<double>();
}

}  // namespace detail

inline Model parse_model(const nlohmann::json& doc) {
  if (!doc.is_object()) detail::parse_error("model must be a JSON object");
  if (!doc.contains("states") || !doc["states"].is_array()) detail::parse_error("missing \"states\" array");
  if (!doc.contains("rates") || !doc["rates"].is_array()) detail::parse_error("missing \"rates\" array");

  Model model;
  std::map<std::string, std::size_t> index;
  for (const auto& name : doc["states"]) {
    if (!name.is_string()) detail::parse_error("state names must be strings");
    const auto s = name.get<std::string>();
    if (!index.emplace(s, model.states.size()).second) detail::parse_error("duplicate state name \"" + s + "\"");
    model.states.push_back(s);
  }
  const auto n = static_cast<Eigen::Index>(model.states.size());
  model.rates = Matrix::Zero(n, n);

  const auto& rates = doc["rates"];
  const bool matrix_form = !rates.empty() && rates.front().is_array();
  if (matrix_form) {
    if (static_cast<Eigen::Index>(rates.size()) != n) detail::parse_error("rate matrix needs one row per state");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = rates[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
        detail::parse_error("rate matrix row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        const double v = detail::rate_value(row[static_cast<std::size_t>(j)],
                                            "rates[" + std::to_string(i) + "][" + std::to_string(j) + "]");
        if (i != j) model.rates(i, j) = v;
      }
    }
    return model;
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& edge : rates) {
    if (!edge.is_object() || !edge.contains("from") || !edge.contains("to") || !edge.contains("rate")) {
      detail::parse_error("edge entries need \"from\", \"to\" and \"rate\"");
    }
    if (!edge["from"].is_string() || !edge["to"].is_string()) detail::parse_error("edge endpoints must be state names");
    const auto from = edge["from"].get<std::string>();
    const auto to = edge["to"].get<std::string>();
    const auto fi = index.find(from);
    const auto ti = index.find(to);
    if (fi == index.end()) detail::parse_error("edge references unknown state \"" + from + "\"");
    if (ti == index.end()) detail::parse_error("edge references unknown state \"" + to + "\"");
    if (fi->second == ti->second) detail::parse_error("self-loop on state \"" + from + "\"");
    if (!seen.emplace(fi->second, ti->second).second) {
      detail::parse_error("duplicate edge " + from + " -> " + to);
    }
    model.rates(static_cast<Eigen::Index>(fi->second), static_cast<Eigen::Index>(ti->second)) =
        detail::rate_value(edge["rate"], from + " -> " + to);
  }
  return model;
}

inline Model parse_model_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    detail::parse_error(e.what());
  }
  return parse_model(doc);
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::parse_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model_text(buffer.str());
}

/// Matrix form with states named s0, s1, ... unless names are given.
inline nlohmann::json model_to_json(const Matrix& rates, std::vector<std::string> names = {}) {
  const auto n = static_cast<std::size_t>(rates.rows());
  if (names.empty()) {
    for (std::size_t i = 0; i < n; ++i) names.push_back("s" + std::to_string(i));
  }
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < rates.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < rates.cols(); ++j) row.push_back(i == j ? 0.0 : rates(i, j));
    rows.push_back(std::move(row));
  }
  return {{"states", names}, {"rates", rows}};
}

}  // namespace qthermo
