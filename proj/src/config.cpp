#include "forch/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace forch {

namespace {

[[noreturn]] void fail_at(const std::string& origin, int line, int col,
                          const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ":" << col << ": " << msg;
  throw InvalidInput(os.str());
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Removes a trailing comment, honoring string literals.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

bool valid_bare_key(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

std::string unescape(const std::string& origin, int line, int col, const std::string& body) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '\\') {
      out += body[i];
      continue;
    }
    if (i + 1 >= body.size()) fail_at(origin, line, col, "dangling escape in string");
    const char c = body[++i];
    switch (c) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default: fail_at(origin, line, col, std::string("unsupported escape \\") + c);
    }
  }
  return out;
}

TomlValue parse_scalar(const std::string& origin, int line, int col, const std::string& raw) {
  TomlValue v;
  v.line = line;
  v.col = col;
  const std::string tok = trim(raw);
  if (tok.empty()) fail_at(origin, line, col, "empty value");
  if (tok.front() == '"') {
    bool closed = false;
    std::string body;
    for (std::size_t i = 1; i < tok.size(); ++i) {
      if (tok[i] == '\\' && i + 1 < tok.size()) {
        body += tok[i];
        body += tok[i + 1];
        ++i;
      } else if (tok[i] == '"') {
        closed = true;
        if (trim(tok.substr(i + 1)).size())
          fail_at(origin, line, col, "trailing characters after string value");
        break;
      } else {
        body += tok[i];
      }
    }
    if (!closed) fail_at(origin, line, col, "unterminated string");
    v.kind = TomlValue::Kind::string;
    v.str = unescape(origin, line, col, body);
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.kind = TomlValue::Kind::boolean;
    v.flag = tok == "true";
    return v;
  }
  char* end = nullptr;
  const double num = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    fail_at(origin, line, col, "invalid value '" + tok + "'");
  v.kind = TomlValue::Kind::number;
  v.num = num;
  return v;
}

// Splits array body on top-level commas (strings respected).
std::vector<std::string> split_elements(const std::string& origin, int line, int col,
                                        const std::string& body) {
  std::vector<std::string> parts;
  std::string cur;
  bool in_str = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (in_str) {
      cur += c;
      if (c == '\\' && i + 1 < body.size()) cur += body[++i];
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
      cur += c;
    } else if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_str) fail_at(origin, line, col, "unterminated string in array");
  if (!trim(cur).empty()) parts.push_back(cur);
  return parts;
}

const char* kind_name(TomlValue::Kind k) {
  switch (k) {
    case TomlValue::Kind::string: return "string";
    case TomlValue::Kind::number: return "number";
    case TomlValue::Kind::boolean: return "boolean";
    case TomlValue::Kind::array: return "array";
  }
  return "?";
}

}  // namespace

bool TomlDocument::has_table(const std::string& table) const {
  return tables_.count(table) > 0;
}

bool TomlDocument::has(const std::string& table, const std::string& key) const {
  return find(table, key) != nullptr;
}

const TomlValue* TomlDocument::find(const std::string& table, const std::string& key) const {
  auto t = tables_.find(table);
  if (t == tables_.end()) return nullptr;
  auto k = t->second.find(key);
  return k == t->second.end() ? nullptr : &k->second;
}

const TomlValue& TomlDocument::at(const std::string& table, const std::string& key) const {
  if (!has_table(table))
    throw InvalidInput(origin_ + ": missing [" + table + "] table");
  const TomlValue* v = find(table, key);
  if (v == nullptr)
    throw InvalidInput(origin_ + ": missing key '" + key + "' in [" + table + "]");
  return *v;
}

double TomlDocument::number(const std::string& table, const std::string& key) const {
  const TomlValue& v = at(table, key);
  if (v.kind != TomlValue::Kind::number)
    fail_at(origin_, v.line, v.col,
            "[" + table + "]." + key + " must be a number, got " + kind_name(v.kind));
  return v.num;
}

double TomlDocument::number_or(const std::string& table, const std::string& key,
                               double dflt) const {
  return has(table, key) ? number(table, key) : dflt;
}

std::string TomlDocument::text(const std::string& table, const std::string& key) const {
  const TomlValue& v = at(table, key);
  if (v.kind != TomlValue::Kind::string)
    fail_at(origin_, v.line, v.col,
            "[" + table + "]." + key + " must be a string, got " + kind_name(v.kind));
  return v.str;
}

std::string TomlDocument::text_or(const std::string& table, const std::string& key,
                                  const std::string& dflt) const {
  return has(table, key) ? text(table, key) : dflt;
}

bool TomlDocument::flag_or(const std::string& table, const std::string& key, bool dflt) const {
  if (!has(table, key)) return dflt;
  const TomlValue& v = at(table, key);
  if (v.kind != TomlValue::Kind::boolean)
    fail_at(origin_, v.line, v.col, "[" + table + "]." + key + " must be true or false");
  return v.flag;
}

std::vector<double> TomlDocument::number_list(const std::string& table,
                                              const std::string& key) const {
  const TomlValue& v = at(table, key);
  if (v.kind == TomlValue::Kind::number) return {v.num};  // scalar promotes
  if (v.kind != TomlValue::Kind::array)
    fail_at(origin_, v.line, v.col, "[" + table + "]." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const TomlValue& e : v.items) {
    if (e.kind != TomlValue::Kind::number)
      fail_at(origin_, e.line, e.col, "[" + table + "]." + key + " must contain only numbers");
    out.push_back(e.num);
  }
  return out;
}

TomlDocument parse_toml(const std::string& text, const std::string& origin) {
  TomlDocument doc;
  doc.origin_ = origin;
  doc.tables_[""];  // root table
  doc.order_.push_back("");
  std::string current;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  // Array values may continue across lines; carry the accumulator.
  bool pending = false;
  std::string pend_key, pend_acc;
  int pend_line = 0, pend_col = 0;

  auto finish_pair = [&](const std::string& key, const std::string& value, int line,
                         int col) {
    const std::string tok = trim(value);
    TomlValue v;
    if (!tok.empty() && tok.front() == '[') {
      if (tok.back() != ']') fail_at(origin, line, col, "unterminated array");
      v.kind = TomlValue::Kind::array;
      v.line = line;
      v.col = col;
      for (const std::string& part :
           split_elements(origin, line, col, tok.substr(1, tok.size() - 2)))
        v.items.push_back(parse_scalar(origin, line, col, part));
    } else {
      v = parse_scalar(origin, line, col, tok);
    }
    auto& tab = doc.tables_[current];
    if (tab.count(key))
      fail_at(origin, line, col, "duplicate key '" + key + "' in [" + current + "]");
    tab[key] = v;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_comment(raw);
    if (pending) {
      pend_acc += " " + trim(line);
      // Closed once the bracket count balances outside strings.
      bool in_str = false;
      int depth = 0;
      for (std::size_t i = 0; i < pend_acc.size(); ++i) {
        const char c = pend_acc[i];
        if (in_str) {
          if (c == '\\') ++i;
          else if (c == '"') in_str = false;
        } else if (c == '"') in_str = true;
        else if (c == '[') ++depth;
        else if (c == ']') --depth;
      }
      if (depth > 0) continue;
      finish_pair(pend_key, pend_acc, pend_line, pend_col);
      pending = false;
      continue;
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        fail_at(origin, line_no, 1, "malformed table header '" + t + "'");
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (!valid_bare_key(name))
        fail_at(origin, line_no, 2, "invalid table name '" + name + "'");
      if (doc.tables_.count(name))
        fail_at(origin, line_no, 1, "duplicate table [" + name + "]");
      doc.tables_[name];
      doc.order_.push_back(name);
      current = name;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail_at(origin, line_no, 1, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_bare_key(key))
      fail_at(origin, line_no, 1, "invalid key '" + key + "'");
    const std::string value = line.substr(eq + 1);
    const int col = static_cast<int>(eq) + 2;
    const std::string vt = trim(value);
    if (!vt.empty() && vt.front() == '[' && vt.back() != ']') {
      pending = true;
      pend_key = key;
      pend_acc = vt;
      pend_line = line_no;
      pend_col = col;
      continue;
    }
    finish_pair(key, value, line_no, col);
  }
  if (pending) fail_at(origin, pend_line, pend_col, "unterminated array at end of file");
  return doc;
}

TomlDocument parse_toml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str(), path);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double VelocitySpec::operator()(double t) const {
  if (family == "zero") return 0.0;
  if (family == "const") return nu0;
  if (family == "exp_decay") return nu0 * std::exp(-rate * t);
  throw InvalidInput("unknown velocity family '" + family + "'");
}

double InitialSpec::operator()(double r) const {
  if (family == "zero") return 0.0;
  if (family == "bump") {
    if (r <= lo || r >= hi) return 0.0;
    const double x = std::sin(M_PI * (r - lo) / (hi - lo));
    return amplitude * x * x;
  }
  throw InvalidInput("unknown initial-profile family '" + family + "'");
}

GridSpec ExperimentConfig::grid() const {
  GridSpec g = solver.spacing == "geometric"
                   ? GridSpec::geometric(flow.n, flow.r0, solver.r_out, solver.cells,
                                         solver.dt, solver.t_final)
                   : GridSpec::uniform(flow.n, flow.r0, solver.r_out, solver.cells,
                                       solver.dt, solver.t_final);
  g.modes = solver.modes;
  g.validate();
  return g;
}

namespace {

GeneralizedPolynomial read_law(const TomlDocument& doc, const std::string& key) {
  const std::string tab = "flow";
  if (doc.has(tab, key + "_exponents") || doc.has(tab, key + "_coefficients")) {
    return GeneralizedPolynomial(doc.number_list(tab, key + "_exponents"),
                                 doc.number_list(tab, key + "_coefficients"));
  }
  const double a = doc.number_or(tab, key + "_a", 1.0);
  const double b = doc.number_or(tab, key + "_b", 1.0);
  const double alpha = doc.number_or(tab, key + "_alpha", 1.0);
  if (b == 0.0) return GeneralizedPolynomial::constant(a);
  return GeneralizedPolynomial::two_term(a, b, alpha);
}

ConstitutiveModel read_model(const TomlDocument& doc) {
  if (!doc.has_table("model"))
    throw InvalidInput(doc.origin() + ": missing [model] table");
  const std::string name = doc.text_or("model", "name", "");
  if (!name.empty()) {
    if (name == "M0" || name == "m0") return ConstitutiveModel::m0();
    throw InvalidInput(doc.origin() + ": unknown model name '" + name +
                       "' (use \"M0\" or a [model] family = \"power\" block)");
  }
  const std::string family = doc.text_or("model", "family", "power");
  if (family != "power")
    throw InvalidInput(doc.origin() + ": unsupported model family '" + family + "'");
  return ConstitutiveModel::power_family(
      doc.number("model", "theta1"), doc.number("model", "theta2"),
      doc.number("model", "a"), doc.number("model", "b"),
      doc.number_or("model", "p0", 1.0));
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  const TomlDocument doc = parse_toml(text, origin);
  ExperimentConfig cfg;
  cfg.config_text = text;
  cfg.config_hash = fnv1a_hex(text);
  cfg.origin = origin;
  cfg.name = doc.text_or("experiment", "name", "unnamed");

  cfg.model = read_model(doc);

  if (!doc.has_table("flow"))
    throw InvalidInput(origin + ": missing [flow] table");
  cfg.flow.n = static_cast<int>(doc.number_or("flow", "n", 2));
  cfg.flow.r0 = doc.number_or("flow", "r0", 1.0);
  cfg.flow.c1 = doc.number_or("flow", "c1", 1.0);
  cfg.flow.c2 = doc.number_or("flow", "c2", 1.0);
  cfg.flow.s0 = doc.number_or("flow", "s0", 0.5);
  cfg.flow.g1 = read_law(doc, "g1");
  cfg.flow.g2 = read_law(doc, "g2");
  cfg.flow.model = cfg.model;
  cfg.normalized = doc.flag_or("flow", "normalized", false);
  if (cfg.normalized && cfg.flow.r0 != 1.0)
    throw InvalidInput(origin + ": normalized = true requires r0 = 1");
  cfg.flow.validate();

  cfg.r_end = doc.number_or("steady", "r_end", 1e4 * cfg.flow.r0);
  cfg.steady_opts.rtol = doc.number_or("steady", "rtol", cfg.steady_opts.rtol);
  cfg.steady_opts.atol = doc.number_or("steady", "atol", cfg.steady_opts.atol);
  cfg.steady_opts.delta_exit =
      doc.number_or("steady", "delta_exit", cfg.steady_opts.delta_exit);
  cfg.steady_opts.max_steps = static_cast<std::size_t>(
      doc.number_or("steady", "max_steps", static_cast<double>(cfg.steady_opts.max_steps)));
  if (cfg.r_end <= cfg.flow.r0)
    throw InvalidInput(origin + ": [steady].r_end must exceed r0");

  cfg.linearize_R = doc.number_or("linearize", "R", 2.0 * cfg.flow.r0);
  if (cfg.linearize_R <= cfg.flow.r0)
    throw InvalidInput(origin + ": [linearize].R must exceed r0");
  if (cfg.linearize_R > cfg.r_end)
    throw InvalidInput(origin + ": [linearize].R exceeds [steady].r_end coverage");

  SolverConfig& s = cfg.solver;
  s.r_out = doc.number_or("solver", "r_out", cfg.linearize_R);
  s.cells = static_cast<std::size_t>(doc.number_or("solver", "cells", 100));
  s.spacing = doc.text_or("solver", "spacing", "uniform");
  if (s.spacing != "uniform" && s.spacing != "geometric")
    throw InvalidInput(origin + ": [solver].spacing must be \"uniform\" or \"geometric\"");
  s.dt = doc.number_or("solver", "dt", 1e-3);
  s.t_final = doc.number_or("solver", "t_final", 1.0);
  s.modes.clear();
  for (double m : doc.has("solver", "modes") ? doc.number_list("solver", "modes")
                                             : std::vector<double>{0.0})
    s.modes.push_back(static_cast<int>(m));
  s.output_stride = doc.number_or("solver", "output_stride", 1);
  if (s.output_stride < 1)
    throw InvalidInput(origin + ": [solver].output_stride must be >= 1");

  s.velocity.family = doc.text_or("solver", "velocity", "zero");
  s.velocity.nu0 = doc.number_or("solver", "nu0", 0.0);
  s.velocity.rate = doc.number_or("solver", "rate", 0.0);
  s.velocity(0.0);  // validates the family name

  s.initial.family = doc.text_or("solver", "w0", "zero");
  s.initial.lo = doc.number_or("solver", "w0_lo", cfg.flow.r0);
  s.initial.hi = doc.number_or("solver", "w0_hi", s.r_out);
  s.initial.amplitude = doc.number_or("solver", "w0_amplitude", 1.0);
  s.initial(cfg.flow.r0);  // validates the family name
  if (s.initial.family == "bump" &&
      !(s.initial.lo >= cfg.flow.r0 && s.initial.hi <= s.r_out && s.initial.lo < s.initial.hi))
    throw InvalidInput(origin + ": [solver].w0 bump must sit inside [r0, r_out]");

  s.forcing.family = doc.text_or("solver", "forcing", "none");
  s.forcing.value = doc.number_or("solver", "forcing_value", 0.0);
  if (s.forcing.family != "none" && s.forcing.family != "const" &&
      s.forcing.family != "velocity")
    throw InvalidInput(origin + ": [solver].forcing must be none, const, or velocity");

  s.shell_width = doc.number_or("solver", "shell_width", kNaN);
  if (!std::isnan(s.shell_width) && s.shell_width <= 0.0)
    throw InvalidInput(origin + ": [solver].shell_width must be positive");

  if (s.r_out > cfg.r_end)
    throw InvalidInput(origin + ": [solver].r_out exceeds [steady].r_end coverage");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void write_csv(const std::string& path, const std::vector<std::string>& preamble,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write file '" + path + "'");
  for (const std::string& p : preamble) out << "# " << p << "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << fmt_double(row[i]) << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
  if (!out.good()) throw InvalidInput("failed writing '" + path + "'");
}

}  // namespace forch
