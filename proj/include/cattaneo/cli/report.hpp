#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace cattaneo::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// One numeric claim and the tolerance it was tested against. `pass` is
/// always computed from (value, tolerance, comparison).
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string comparison;  // "<=", "<", ">=", ">"
  bool pass = false;
};

inline bool compare(double value, const std::string& op, double bound) {
  if (!std::isfinite(value) && !std::isinf(value)) return false;  // NaN never passes
  if (op == "<=") return value <= bound;
  if (op == "<") return value < bound;
  if (op == ">=") return value >= bound;
  if (op == ">") return value > bound;
  return false;
}

/// Non-finite doubles serialize as strings so the report stays valid JSON
/// without silently turning into null.
inline json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

class Section {
 public:
  explicit Section(std::string name) : name_(std::move(name)) {}

  json& data() { return data_; }
  const std::string& name() const { return name_; }
  const std::vector<Check>& checks() const { return checks_; }

  bool check(const std::string& name, double value, const std::string& op, double tolerance) {
    Check c{name, value, tolerance, op, compare(value, op, tolerance)};
    checks_.push_back(c);
    return c.pass;
  }
  /// Boolean claims are recorded as a 0/1 value that must equal 1.
  bool require(const std::string& name, bool ok) {
    return check(name, ok ? 1.0 : 0.0, ">=", 1.0);
  }

  bool pass() const {
    for (const auto& c : checks_)
      if (!c.pass) return false;
    return true;
  }

  json to_json() const {
    json out = data_;
    if (out.is_null()) out = json::object();
    json cs = json::array();
    for (const auto& c : checks_) {
      cs.push_back({{"name", c.name},
                    {"value", number(c.value)},
                    {"tolerance", number(c.tolerance)},
                    {"comparison", c.comparison},
                    {"pass", c.pass}});
    }
    out["checks"] = cs;
    out["pass"] = pass();
    return out;
  }

 private:
  std::string name_;
  json data_ = json::object();
  std::vector<Check> checks_;
};

/// Matrix as an array of rows.
template <typename Derived>
json matrix_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(number(static_cast<double>(m(i, j))));
    rows.push_back(row);
  }
  return rows;
}

inline json complex_json(const std::complex<double>& z) {
  return json::array({number(z.real()), number(z.imag())});
}

template <typename Range>
json complex_list(const Range& zs) {
  json out = json::array();
  for (const auto& z : zs) out.push_back(complex_json(z));
  return out;
}

inline json vec_to_json(const Eigen::Vector3d& v) {
  return json::array({number(v(0)), number(v(1)), number(v(2))});
}

}  // namespace cattaneo::cli
