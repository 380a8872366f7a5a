#include "bdcalc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bdcalc {

// ---------------------------------------------------------------------------
// TOML subset

namespace {

void skip_ws(const std::string& s, std::size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

std::string parse_bare_key(const std::string& s, std::size_t& i) {
  std::size_t start = i;
  while (i < s.size() &&
         (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' ||
          s[i] == '-'))
    ++i;
  if (i == start) throw ConfigError("toml: expected key");
  return s.substr(start, i - start);
}

TomlValue parse_value(const std::string& s, std::size_t& i);

TomlValue parse_array(const std::string& s, std::size_t& i) {
  TomlArray arr;
  ++i;  // '['
  while (true) {
    skip_ws(s, i);
    if (i >= s.size()) throw ConfigError("toml: unterminated array");
    if (s[i] == ']') {
      ++i;
      break;
    }
    arr.push_back(parse_value(s, i));
    skip_ws(s, i);
    if (i < s.size() && s[i] == ',') {
      ++i;
      continue;
    }
    if (i < s.size() && s[i] == ']') {
      ++i;
      break;
    }
    throw ConfigError("toml: expected ',' or ']' in array");
  }
  return TomlValue{std::move(arr)};
}

TomlValue parse_value(const std::string& s, std::size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) throw ConfigError("toml: missing value");
  if (s[i] == '"') {
    ++i;
    std::string out;
    while (i < s.size() && s[i] != '"') {
      if (s[i] == '\\' && i + 1 < s.size()) {
        ++i;
        switch (s[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: out += s[i];
        }
      } else {
        out += s[i];
      }
      ++i;
    }
    if (i >= s.size()) throw ConfigError("toml: unterminated string");
    ++i;
    return TomlValue{std::move(out)};
  }
  if (s[i] == '[') return parse_array(s, i);
  if (s.compare(i, 4, "true") == 0 &&
      (i + 4 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 4])))) {
    i += 4;
    return TomlValue{true};
  }
  if (s.compare(i, 5, "false") == 0 &&
      (i + 5 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 5])))) {
    i += 5;
    return TomlValue{false};
  }
  std::size_t j = i;
  while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) ||
                          s[j] == '+' || s[j] == '-' || s[j] == '.' ||
                          s[j] == 'e' || s[j] == 'E' || s[j] == '_'))
    ++j;
  if (j == i) throw ConfigError("toml: cannot parse value near '" +
                                s.substr(i, 16) + "'");
  std::string numtxt = s.substr(i, j - i);
  numtxt.erase(std::remove(numtxt.begin(), numtxt.end(), '_'), numtxt.end());
  i = j;
  try {
    return TomlValue{std::stod(numtxt)};
  } catch (const std::exception&) {
    throw ConfigError("toml: bad number '" + numtxt + "'");
  }
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

}  // namespace

TomlDocument parse_toml(const std::string& text) {
  TomlDocument doc;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = strip_comment(raw);
    std::size_t i = 0;
    skip_ws(line, i);
    if (i >= line.size() || line[i] == '\r') continue;
    if (line[i] == '[') {
      const auto close = line.find(']', i);
      if (close == std::string::npos)
        throw ConfigError("toml: missing ']' on line " + std::to_string(lineno));
      current = line.substr(i + 1, close - i - 1);
      doc[current];
      continue;
    }
    const std::string key = parse_bare_key(line, i);
    skip_ws(line, i);
    if (i >= line.size() || line[i] != '=')
      throw ConfigError("toml: expected '=' on line " + std::to_string(lineno));
    ++i;
    TomlValue v = parse_value(line, i);
    skip_ws(line, i);
    if (i < line.size() && line[i] != '\r')
      throw ConfigError("toml: trailing characters on line " +
                        std::to_string(lineno));
    doc[current][key] = std::move(v);
  }
  return doc;
}

TomlDocument parse_toml_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_toml(ss.str());
}

// ---------------------------------------------------------------------------
// Expressions

struct Expression::Node {
  enum class Kind { constant, variable, add, sub, mul, div, pow, neg };
  Kind kind = Kind::constant;
  Complex value{0.0, 0.0};
  int var_index = 0;  // 0..n-2 -> xi{k+1}, -1 -> xin, -2 -> mu
  int exponent = 1;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

struct ExprParser {
  const std::string& s;
  std::size_t i = 0;
  int n_xi;

  using NodePtr = std::shared_ptr<const Expression::Node>;
  using Node = Expression::Node;

  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  NodePtr make_const(Complex v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    return n;
  }

  NodePtr parse_primary() {
    ws();
    if (i >= s.size()) throw ConfigError("expression: unexpected end");
    if (eat('(')) {
      NodePtr e = parse_sum();
      if (!eat(')')) throw ConfigError("expression: missing ')'");
      return e;
    }
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) ||
                              s[j] == '.' || s[j] == 'e' || s[j] == 'E' ||
                              ((s[j] == '+' || s[j] == '-') && j > i &&
                               (s[j - 1] == 'e' || s[j - 1] == 'E'))))
        ++j;
      const double v = std::stod(s.substr(i, j - i));
      i = j;
      if (i < s.size() && s[i] == 'i') {  // imaginary literal like 2i
        ++i;
        return make_const(Complex(0.0, v));
      }
      return make_const(Complex(v, 0.0));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) ||
                              s[j] == '_'))
        ++j;
      const std::string name = s.substr(i, j - i);
      i = j;
      if (name == "i") return make_const(kImagUnit);
      if (name == "pi") return make_const(Complex(M_PI, 0.0));
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::variable;
      if (name == "mu") {
        n->var_index = -2;
      } else if (name == "xin") {
        n->var_index = -1;
      } else if (name.rfind("xi", 0) == 0) {
        int idx = 0;
        try {
          idx = std::stoi(name.substr(2));
        } catch (const std::exception&) {
          throw ConfigError("expression: unknown name '" + name + "'");
        }
        if (idx < 1 || idx > n_xi)
          throw ConfigError("expression: variable '" + name +
                            "' out of range for n");
        n->var_index = idx - 1;
      } else {
        throw ConfigError("expression: unknown name '" + name + "'");
      }
      return n;
    }
    throw ConfigError("expression: unexpected character '" +
                      std::string(1, c) + "'");
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    ws();
    if (eat('^')) {
      ws();
      bool negexp = eat('-');
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j == i) throw ConfigError("expression: integer exponent expected");
      int e = std::stoi(s.substr(i, j - i));
      i = j;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::pow;
      n->lhs = base;
      n->exponent = negexp ? -e : e;
      return n;
    }
    return base;
  }

  NodePtr parse_unary() {
    ws();
    if (eat('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::neg;
      n->lhs = parse_unary();
      return n;
    }
    (void)eat('+');
    return parse_power();
  }

  NodePtr parse_product() {
    NodePtr acc = parse_unary();
    while (true) {
      ws();
      if (eat('*')) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::mul;
        n->lhs = acc;
        n->rhs = parse_unary();
        acc = n;
      } else if (eat('/')) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::div;
        n->lhs = acc;
        n->rhs = parse_unary();
        acc = n;
      } else {
        return acc;
      }
    }
  }

  NodePtr parse_sum() {
    NodePtr acc = parse_product();
    while (true) {
      ws();
      if (eat('+')) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::add;
        n->lhs = acc;
        n->rhs = parse_product();
        acc = n;
      } else if (i < s.size() && s[i] == '-') {
        ++i;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::sub;
        n->lhs = acc;
        n->rhs = parse_product();
        acc = n;
      } else {
        return acc;
      }
    }
  }
};

Complex eval_node(const Expression::Node& n, const RVec& xi, double xin,
                  double mu) {
  using K = Expression::Node::Kind;
  switch (n.kind) {
    case K::constant:
      return n.value;
    case K::variable:
      if (n.var_index == -2) return Complex(mu, 0.0);
      if (n.var_index == -1) return Complex(xin, 0.0);
      if (n.var_index >= xi.size())
        throw ConfigError("expression: xi index out of range at evaluation");
      return Complex(xi[n.var_index], 0.0);
    case K::add:
      return eval_node(*n.lhs, xi, xin, mu) + eval_node(*n.rhs, xi, xin, mu);
    case K::sub:
      return eval_node(*n.lhs, xi, xin, mu) - eval_node(*n.rhs, xi, xin, mu);
    case K::mul:
      return eval_node(*n.lhs, xi, xin, mu) * eval_node(*n.rhs, xi, xin, mu);
    case K::div:
      return eval_node(*n.lhs, xi, xin, mu) / eval_node(*n.rhs, xi, xin, mu);
    case K::neg:
      return -eval_node(*n.lhs, xi, xin, mu);
    case K::pow: {
      const Complex b = eval_node(*n.lhs, xi, xin, mu);
      Complex out(1.0, 0.0);
      const Complex f = n.exponent >= 0 ? b : Complex(1.0, 0.0) / b;
      for (int k = 0; k < std::abs(n.exponent); ++k) out *= f;
      return out;
    }
  }
  throw ConfigError("expression: corrupt node");
}

}  // namespace

Expression Expression::parse(const std::string& text, int n_xi_vars) {
  ExprParser p{text, 0, n_xi_vars};
  Expression e;
  e.root_ = p.parse_sum();
  p.ws();
  if (p.i != text.size())
    throw ConfigError("expression: trailing characters in '" + text + "'");
  e.source_ = text;
  return e;
}

Complex Expression::eval(const RVec& xi, double xin, double mu) const {
  if (!root_) throw ConfigError("expression: empty");
  return eval_node(*root_, xi, xin, mu);
}

// ---------------------------------------------------------------------------
// ScenarioConfig

namespace {

const TomlValue* find(const TomlTable& t, const std::string& key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}

double require_num(const TomlTable& t, const std::string& key, double fallback,
                   bool* present = nullptr) {
  const TomlValue* v = find(t, key);
  if (present) *present = v != nullptr;
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return v->num();
}

}  // namespace

ScenarioConfig ScenarioConfig::from_toml(const TomlDocument& doc,
                                         bool allow_theta_zero) {
  ScenarioConfig cfg;
  cfg.allow_theta_zero = allow_theta_zero;

  auto model_it = doc.find("model");
  if (model_it == doc.end()) throw ConfigError("config: missing [model] table");
  const TomlTable& m = model_it->second;

  cfg.n = static_cast<int>(require_num(m, "n", 2));
  cfg.L = static_cast<int>(require_num(m, "L", 1));
  cfg.theta = require_num(m, "theta", M_PI);
  cfg.d = static_cast<int>(require_num(m, "d", 2));
  if (cfg.n < 1 || cfg.n > 3) throw ConfigError("config: n must be 1, 2 or 3");
  if (cfg.L < 1) throw ConfigError("config: L must be >= 1");
  if (cfg.d != 2) throw ConfigError("config: the model problem has d = 2");
  const bool theta_ok = cfg.theta > 0.0 && cfg.theta < 2.0 * M_PI;
  if (!theta_ok && !allow_theta_zero)
    throw ConfigError(
        "config: theta must lie in (0, 2pi); pass --allow-theta-zero for "
        "negative controls");
  if (const TomlValue* qv = find(m, "q")) {
    if (!qv->is_string()) throw ConfigError("config: model.q must be a string");
    cfg.q_expr = Expression::parse(qv->str(), cfg.n - 1);
  }

  if (auto bc_it = doc.find("bc"); bc_it != doc.end()) {
    const TomlTable& b = bc_it->second;
    if (const TomlValue* kv = find(b, "kind")) {
      if (!kv->is_string()) throw ConfigError("config: bc.kind must be a string");
      cfg.bc_kind = kv->str();
    }
    if (cfg.bc_kind != "dirichlet" && cfg.bc_kind != "neumann" &&
        cfg.bc_kind != "robin" && cfg.bc_kind != "projection")
      throw ConfigError("config: unknown bc.kind '" + cfg.bc_kind + "'");
    if (const TomlValue* pv = find(b, "pi")) {
      if (!pv->is_array()) throw ConfigError("config: bc.pi must be an array");
      for (const auto& row : pv->array()) {
        if (!row.is_array()) throw ConfigError("config: bc.pi rows must be arrays");
        std::vector<Expression> r;
        for (const auto& cell : row.array()) {
          if (cell.is_number())
            r.push_back(Expression::parse(std::to_string(cell.num()), cfg.n - 1));
          else if (cell.is_string())
            r.push_back(Expression::parse(cell.str(), cfg.n - 1));
          else
            throw ConfigError("config: bc.pi entries must be numbers or strings");
        }
        cfg.pi_entries.push_back(std::move(r));
      }
      if (static_cast<int>(cfg.pi_entries.size()) != cfg.L)
        throw ConfigError("config: bc.pi must be L x L");
      for (const auto& r : cfg.pi_entries)
        if (static_cast<int>(r.size()) != cfg.L)
          throw ConfigError("config: bc.pi must be L x L");
    }
    if (const TomlValue* bv = find(b, "b")) {
      if (!bv->is_string()) throw ConfigError("config: bc.b must be a string");
      cfg.b_expr = Expression::parse(bv->str(), cfg.n - 1);
    }
  }

  if (auto g_it = doc.find("grid"); g_it != doc.end()) {
    const TomlTable& g = g_it->second;
    cfg.n_laguerre = static_cast<int>(require_num(g, "N_laguerre", 128));
    cfg.alpha = require_num(g, "alpha", 1.0);
    cfg.xi_cutoff_factor = require_num(g, "xi_cutoff", 1e8);
    cfg.xi_points = static_cast<int>(require_num(g, "xi_points", 4000));
    if (const TomlValue* ml = find(g, "mu_list")) {
      if (!ml->is_array()) throw ConfigError("config: grid.mu_list must be an array");
      for (const auto& v : ml->array()) {
        if (!v.is_number()) throw ConfigError("config: mu_list entries must be numbers");
        cfg.mu_list.push_back(v.num());
      }
    }
    if (cfg.n_laguerre < 8 || cfg.n_laguerre > 512)
      throw ConfigError("config: N_laguerre out of range [8, 512]");
    if (cfg.alpha <= 0.0) throw ConfigError("config: alpha must be > 0");
  }
  if (cfg.mu_list.empty()) cfg.mu_list = {1, 2, 4, 8, 16, 32, 64};

  if (auto o_it = doc.find("output"); o_it != doc.end()) {
    if (const TomlValue* dv = find(o_it->second, "dir")) {
      if (!dv->is_string()) throw ConfigError("config: output.dir must be a string");
      cfg.out_dir = dv->str();
    }
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path,
                                    bool allow_theta_zero) {
  return from_toml(parse_toml_file(path), allow_theta_zero);
}

LaplaceTypeModel ScenarioConfig::model() const {
  LaplaceTypeModel m = LaplaceTypeModel::standard(n, L, theta);
  if (q_expr) {
    const Expression q = *q_expr;
    const int L_ = L;
    m.q = [q, L_](const RVec& xi) {
      return CMat::Identity(L_, L_) * q.eval(xi, 0.0, 0.0);
    };
  }
  return m;
}

ProjectionBC ScenarioConfig::boundary_condition() const {
  const int L_ = L;
  std::function<CMat(const RVec&)> bfun;
  if (b_expr) {
    const Expression b = *b_expr;
    bfun = [b, L_](const RVec& xi) {
      return CMat::Identity(L_, L_) * b.eval(xi, 0.0, 0.0);
    };
  }
  if (bc_kind == "dirichlet") return ProjectionBC::dirichlet();
  if (bc_kind == "neumann") return ProjectionBC::neumann();
  if (bc_kind == "robin")
    return ProjectionBC::robin(bfun ? bfun : [L_](const RVec&) {
      return CMat::Zero(L_, L_);
    });
  // projection
  if (pi_entries.empty())
    throw ConfigError("config: projection bc requires bc.pi");
  auto entries = pi_entries;
  auto pifun = [entries, L_](const RVec& xi) {
    CMat out(L_, L_);
    for (int i = 0; i < L_; ++i)
      for (int j = 0; j < L_; ++j) out(i, j) = entries[i][j].eval(xi, 0.0, 0.0);
    return out;
  };
  return ProjectionBC::projection(pifun, bfun);
}

}  // namespace bdcalc
