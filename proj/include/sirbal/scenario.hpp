#pragma once

#include "sirbal/error.hpp"
#include "sirbal/model.hpp"
#include "sirbal/utility.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sirbal {

/// Malformed scenario or report text. `line`/`column` are 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct Scenario {
  NetworkModel model;
  ConstraintPolytope poly;
  UtilitySpec utility = UtilitySpec::log();
};

namespace json_io {

using nlohmann::json;

inline Vector to_vector(const json& j, const char* key) {
  if (!j.is_array()) throw ParseError(std::string("'") + key + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ParseError(std::string("'") + key + "[" + std::to_string(i) + "]' is not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Matrix to_matrix(const json& j, const char* key) {
  if (!j.is_array() || j.empty())
    throw ParseError(std::string("'") + key + "' must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ParseError(std::string("'") + key + "' rows must be arrays of equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw ParseError(std::string("'") + key + "[" + std::to_string(r) + "][" +
                         std::to_string(c) + "]' is not a number");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

inline json from_vector(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline json from_matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing required field '") + key + "'");
  return j.at(key);
}

inline UtilitySpec utility_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ParseError("'utility' must be an object with a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "log") return UtilitySpec::log();
  if (kind == "negpow") {
    if (!j.contains("n") || !j.at("n").is_number_integer())
      throw ParseError("negpow utility requires an integer 'n'");
    const int n = j.at("n").get<int>();
    if (n < 1) throw ParseError("negpow exponent must be >= 1");
    return UtilitySpec::neg_pow(n);
  }
  throw ParseError("unknown utility kind '" + kind + "'");
}

inline json utility_to_json(const UtilitySpec& u) {
  if (u.kind() == UtilitySpec::Kind::Log) return json{{"kind", "log"}};
  return json{{"kind", "negpow"}, {"n", u.exponent()}};
}

}  // namespace json_io

/// Builds a scenario from parsed JSON. Accepts normalized ("V", "z") or raw
/// ("G", "sigma2") channels; raw channels are normalized here.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  using namespace json_io;
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");
  const bool normalized = j.contains("V") || j.contains("z");
  const bool raw = j.contains("G") || j.contains("sigma2");
  if (normalized == raw)
    throw ParseError("scenario must give exactly one of (V, z) or (G, sigma2)");
  const Vector gamma = to_vector(require(j, "gamma"), "gamma");
  auto model = [&] {
    if (normalized)
      return NetworkModel(to_matrix(require(j, "V"), "V"), to_vector(require(j, "z"), "z"), gamma);
    return normalize_channel(
        RawChannel{to_matrix(require(j, "G"), "G"), to_vector(require(j, "sigma2"), "sigma2")},
        gamma);
  }();
  ConstraintPolytope poly(to_matrix(require(j, "C"), "C"), to_vector(require(j, "p_hat"), "p_hat"));
  check_compatible(model, poly);
  UtilitySpec utility = j.contains("utility") ? utility_from_json(j.at("utility")) : UtilitySpec::log();
  return Scenario{std::move(model), std::move(poly), utility};
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using namespace json_io;
  nlohmann::json j;
  j["V"] = from_matrix(s.model.gains());
  j["z"] = from_vector(s.model.noise());
  j["gamma"] = from_vector(s.model.targets());
  j["C"] = from_matrix(s.poly.incidence());
  j["p_hat"] = from_vector(s.poly.budgets());
  j["utility"] = utility_to_json(s.utility);
  return j;
}

/// Parses JSON text; syntax errors carry the 1-based line and column.
inline nlohmann::json parse_json_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(e.what(), line, column);
  }
}

inline Scenario parse_scenario(const std::string& text) {
  return scenario_from_json(parse_json_text(text));
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace sirbal
