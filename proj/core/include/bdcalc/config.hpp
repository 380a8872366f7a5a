#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bdcalc/model.hpp"
#include "bdcalc/types.hpp"

namespace bdcalc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Minimal TOML subset: [table] headers, key = value with strings, numbers,
// booleans and (nested) arrays, # comments.

struct TomlValue;
using TomlArray = std::vector<TomlValue>;

struct TomlValue {
  std::variant<std::string, double, bool, TomlArray> data;

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const { return std::holds_alternative<TomlArray>(data); }
  const std::string& str() const { return std::get<std::string>(data); }
  double num() const { return std::get<double>(data); }
  bool boolean() const { return std::get<bool>(data); }
  const TomlArray& array() const { return std::get<TomlArray>(data); }
};

using TomlTable = std::map<std::string, TomlValue>;
using TomlDocument = std::map<std::string, TomlTable>;

TomlDocument parse_toml(const std::string& text);
TomlDocument parse_toml_file(const std::string& path);

// ---------------------------------------------------------------------------
// Expression grammar: polynomials/rational expressions in the variables
// xi1..xi{n-1}, xin, mu with complex literals (3, 2.5i, 1+2i via arithmetic),
// the constants i and pi, and + - * / ^ with integer powers.

class Expression {
 public:
  struct Node;

  static Expression parse(const std::string& text, int n_xi_vars);

  Complex eval(const RVec& xi, double xin, double mu) const;
  const std::string& source() const { return source_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

// ---------------------------------------------------------------------------
// Scenario configuration driving the CLI commands.

struct ScenarioConfig {
  // [model]
  int n = 2;
  int L = 1;
  double theta = M_PI;
  int d = 2;
  std::optional<Expression> q_expr;  // scalar expression in xi1.., default |xi'|^2

  // [bc]
  std::string bc_kind = "dirichlet";
  std::vector<std::vector<Expression>> pi_entries;  // L x L, optional
  std::optional<Expression> b_expr;                 // scalar, optional

  // [grid]
  int n_laguerre = 128;
  double alpha = 1.0;
  double xi_cutoff_factor = 1e8;
  int xi_points = 4000;  // informative; grid construction is scale-adaptive
  std::vector<double> mu_list;

  // [output]
  std::string out_dir = ".";

  bool allow_theta_zero = false;

  static ScenarioConfig from_toml(const TomlDocument& doc,
                                  bool allow_theta_zero = false);
  static ScenarioConfig load(const std::string& path,
                             bool allow_theta_zero = false);

  LaplaceTypeModel model() const;
  ProjectionBC boundary_condition() const;
};

}  // namespace bdcalc
