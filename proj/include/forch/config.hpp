#pragma once

#include <map>
#include <string>
#include <vector>

#include "forch/solver.hpp"
#include "forch/steady.hpp"

namespace forch {

// Minimal TOML subset used by the experiment configs: `[table]` headers,
// `key = value` pairs, `#` comments; values are strings, numbers, booleans,
// or flat arrays of numbers/strings.  Errors carry file:line:col.
struct TomlValue {
  enum class Kind { string, number, boolean, array };
  Kind kind = Kind::number;
  std::string str;
  double num = 0.0;
  bool flag = false;
  std::vector<TomlValue> items;
  int line = 0, col = 0;
};

class TomlDocument {
 public:
  bool has_table(const std::string& table) const;
  bool has(const std::string& table, const std::string& key) const;
  const TomlValue* find(const std::string& table, const std::string& key) const;
  // Throws InvalidInput naming table.key when absent or of the wrong kind.
  const TomlValue& at(const std::string& table, const std::string& key) const;

  double number(const std::string& table, const std::string& key) const;
  double number_or(const std::string& table, const std::string& key, double dflt) const;
  std::string text(const std::string& table, const std::string& key) const;
  std::string text_or(const std::string& table, const std::string& key,
                      const std::string& dflt) const;
  bool flag_or(const std::string& table, const std::string& key, bool dflt) const;
  std::vector<double> number_list(const std::string& table, const std::string& key) const;

  const std::vector<std::string>& table_order() const { return order_; }
  const std::string& origin() const { return origin_; }

 private:
  friend TomlDocument parse_toml(const std::string&, const std::string&);
  std::string origin_;
  std::vector<std::string> order_;
  std::map<std::string, std::map<std::string, TomlValue>> tables_;
};

TomlDocument parse_toml(const std::string& text, const std::string& origin = "<memory>");
TomlDocument parse_toml_file(const std::string& path);

// FNV-1a 64-bit hash of raw bytes, lower-case hex; stamps every artifact so
// `verify` can refuse data produced under a different configuration.
std::string fnv1a_hex(const std::string& bytes);

// Total-velocity family V = nu(t) r^(1-n) e_r with named nu(t).
struct VelocitySpec {
  std::string family = "zero";  // zero | const | exp_decay
  double nu0 = 0.0;
  double rate = 0.0;  // exp_decay: nu(t) = nu0 exp(-rate t)
  double operator()(double t) const;
};

// Named initial profile for w; zero outside [lo, hi].
struct InitialSpec {
  std::string family = "zero";  // zero | bump
  double lo = 0.0, hi = 0.0;
  double amplitude = 1.0;
  double operator()(double r) const;
};

// Forcing family: none, a constant, or the divergence term induced by the
// velocity family through the coefficient field.
struct ForcingSpec {
  std::string family = "none";  // none | const | velocity
  double value = 0.0;
};

struct SolverConfig {
  double r_out = 2.0;
  std::size_t cells = 100;
  std::string spacing = "uniform";  // uniform | geometric
  double dt = 1e-3;
  double t_final = 1.0;
  std::vector<int> modes = {0};
  double output_stride = 1;  // write every k-th time level to field.csv
  VelocitySpec velocity;
  InitialSpec initial;
  ForcingSpec forcing;
  double shell_width = kNaN;  // optional: enables the shell-sequence report
};

struct ExperimentConfig {
  std::string name;
  std::string config_text;  // raw bytes the hash is computed over
  std::string config_hash;
  std::string origin;
  bool normalized = false;

  ConstitutiveModel model = ConstitutiveModel::m0();
  FlowParams flow;
  double r_end = 1e4;  // steady integration extent
  IntegrateOptions steady_opts;
  double linearize_R = 2.0;  // constants window [r0, R]
  SolverConfig solver;

  GridSpec grid() const;  // built from solver + flow
};

// Parses and cross-validates a full experiment configuration.  Messages name
// the offending table/key; a missing required table reads
// "missing [model] table".
ExperimentConfig parse_config(const std::string& text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

// Writes rows as %.17g cells (shortest round-trip layout) so identical
// inputs give byte-identical files.  `preamble` lines are emitted first,
// each prefixed with "# ".
void write_csv(const std::string& path, const std::vector<std::string>& preamble,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace forch
