#pragma once

// State ingestion: numeric expressions ("pi/6"), inline family specs
// ("w_v_theta,V=0.2,theta=pi/6") and the JSON state-file schema
//
//   {"rho":    [[{"re": r, "im": i}, ...] x 4]}
//   {"pauli":  {"a": [3], "b": [3], "T": [[3] x 3]}}
//   {"family": {"name": str, "params": {str: num}}}
//
// with exactly one of the three keys present.

#include <cctype>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "steerkit/qstate.hpp"

namespace steerkit::io {

namespace detail {

// expr   := term (('+'|'-') term)*
// term   := factor (('*'|'/') factor)*
// factor := ('+'|'-') factor | number | 'pi' | 'sqrt' '(' expr ')' | '(' expr ')'
class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : s_(text) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::InvalidArgument,
                "cannot parse number '" + std::string(s_) + "': " + why);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool eat_word(std::string_view w) {
    skip();
    if (s_.substr(pos_, w.size()) == w) {
      pos_ += w.size();
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }
  double term() {
    double v = factor();
    for (;;) {
      if (eat('*')) v *= factor();
      else if (eat('/')) v /= factor();
      else return v;
    }
  }
  double factor() {
    if (eat('-')) return -factor();
    if (eat('+')) return factor();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (eat_word("pi")) return std::numbers::pi;
    if (eat_word("sqrt")) {
      if (!eat('(')) fail("expected '(' after sqrt");
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return std::sqrt(v);
    }
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
            ((s_[pos_] == 'e' || s_[pos_] == 'E') && pos_ > start) ||
            ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > start &&
             (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    if (start == pos_) fail("expected a number");
    const std::string token(s_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      fail("bad number '" + token + "'");
    }
    if (used != token.size()) fail("bad number '" + token + "'");
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Evaluates a small arithmetic expression: numbers, pi, sqrt(), + - * /.
inline double parse_number(std::string_view text) {
  return detail::ExprParser(detail::trim(text)).parse();
}

struct FamilySpec {
  Family family = Family::bell_diagonal;
  FamilyParams params;
};

/// "name,key=value,key=value". The rho_x0 sign may be given as + or -.
inline FamilySpec parse_family_spec(std::string_view text) {
  FamilySpec spec;
  std::size_t comma = text.find(',');
  spec.family = parse_family(detail::trim(text.substr(0, comma)));
  while (comma != std::string_view::npos) {
    const std::size_t next = text.find(',', comma + 1);
    const std::string_view item = detail::trim(text.substr(comma + 1, next - comma - 1));
    comma = next;
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidArgument, "expected key=value, got '" + std::string(item) + "'");
    const std::string key(detail::trim(item.substr(0, eq)));
    const std::string_view value = detail::trim(item.substr(eq + 1));
    if (key == "sign" && (value == "+" || value == "-"))
      spec.params[key] = value == "+" ? 1.0 : -1.0;
    else
      spec.params[key] = parse_number(value);
  }
  return spec;
}

inline std::string format_family_spec(const FamilySpec& spec) {
  std::string out(to_string(spec.family));
  for (const auto& [k, v] : spec.params) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out += "," + k + "=" + buf;
  }
  return out;
}

/// A state together with what is known about its structure.
struct LoadedState {
  DensityMatrix rho;
  std::optional<FamilySpec> family;
  /// Set when the state is (local-unitarily) an X-state.
  std::optional<XStateParams> x_state;
};

inline LoadedState load_state(const FamilySpec& spec, const Tolerances& tol = {}) {
  DensityMatrix rho = make_family(spec.family, spec.params, tol);
  return {rho, spec, family_x_params(spec.family, spec.params)};
}

inline LoadedState load_state(const DensityMatrix& rho, const Tolerances& tol = {}) {
  return {rho, std::nullopt, as_x_state(to_pauli(rho), tol)};
}

namespace detail {

inline double number_at(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_number(j.get<std::string>());
  throw Error(ErrorCode::InvalidArgument, where + ": expected a number");
}

inline Vector3 vector3_at(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::InvalidArgument, where + ": expected an array of 3 numbers");
  return {number_at(j[0], where), number_at(j[1], where), number_at(j[2], where)};
}

}  // namespace detail

inline LoadedState parse_state_json(const nlohmann::json& doc, const Tolerances& tol = {}) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "state document must be an object");
  const int keys = static_cast<int>(doc.contains("rho")) + static_cast<int>(doc.contains("pauli")) +
                   static_cast<int>(doc.contains("family"));
  if (keys != 1)
    throw Error(ErrorCode::InvalidArgument,
                "state document needs exactly one of \"rho\", \"pauli\", \"family\"");

  if (doc.contains("rho")) {
    const auto& rows = doc["rho"];
    if (!rows.is_array() || rows.size() != 4)
      throw Error(ErrorCode::InvalidArgument, "rho: expected 4 rows");
    Matrix4c m;
    for (int i = 0; i < 4; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || row.size() != 4)
        throw Error(ErrorCode::InvalidArgument, "rho: expected 4 entries per row");
      for (int k = 0; k < 4; ++k) {
        const auto& e = row[static_cast<std::size_t>(k)];
        if (e.is_object()) {
          const double re = e.contains("re") ? detail::number_at(e["re"], "rho.re") : 0.0;
          const double im = e.contains("im") ? detail::number_at(e["im"], "rho.im") : 0.0;
          m(i, k) = Complex(re, im);
        } else {
          m(i, k) = detail::number_at(e, "rho");
        }
      }
    }
    return load_state(validate_density(m, tol), tol);
  }
  if (doc.contains("pauli")) {
    const auto& p = doc["pauli"];
    PauliRepresentation rep;
    rep.a = detail::vector3_at(p.at("a"), "pauli.a");
    rep.b = detail::vector3_at(p.at("b"), "pauli.b");
    const auto& t = p.at("T");
    if (!t.is_array() || t.size() != 3)
      throw Error(ErrorCode::InvalidArgument, "pauli.T: expected 3 rows");
    for (int i = 0; i < 3; ++i)
      rep.T.row(i) = detail::vector3_at(t[static_cast<std::size_t>(i)], "pauli.T").transpose();
    return load_state(from_pauli(rep, tol), tol);
  }
  const auto& f = doc["family"];
  FamilySpec spec;
  spec.family = parse_family(f.at("name").get<std::string>());
  if (f.contains("params"))
    for (const auto& [k, v] : f["params"].items()) {
      if (k == "sign" && v.is_string() && (v == "+" || v == "-"))
        spec.params[k] = v == "+" ? 1.0 : -1.0;
      else
        spec.params[k] = detail::number_at(v, "family.params." + k);
    }
  return load_state(spec, tol);
}

/// Reads a state file. I/O and JSON syntax failures surface as
/// InvalidArgument; physicality failures keep their own codes.
inline LoadedState load_state_file(const std::string& path, const Tolerances& tol = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open state file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "state file '" + path + "': " + e.what());
  }
  try {
    return parse_state_json(doc, tol);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "state file '" + path + "': " + e.what());
  }
}

inline nlohmann::json to_json(const PauliRepresentation& p) {
  nlohmann::json t = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) t.push_back({p.T(i, 0), p.T(i, 1), p.T(i, 2)});
  return {{"a", {p.a(0), p.a(1), p.a(2)}}, {"b", {p.b(0), p.b(1), p.b(2)}}, {"T", t}};
}

inline nlohmann::json to_json(const DensityMatrix& rho) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < 4; ++k) row.push_back({{"re", rho(i, k).real()}, {"im", rho(i, k).imag()}});
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json to_json(const XStateParams& x) {
  return {{"a3", x.a3}, {"b3", x.b3}, {"c1", x.c1}, {"c2", x.c2}, {"c3", x.c3}};
}

}  // namespace steerkit::io
