#pragma once

#include <string>
#include <vector>

#include "forch/config.hpp"
#include "forch/solver.hpp"

namespace forch {

// End-to-end run: steady profile, coefficient field, constants pack, growth
// barrier, initial-boundary-value solve, and every certified measurement.
// Artifacts written into `out_dir`:
//   config.toml  raw config bytes (the hash preimage)
//   field.csv    mode,t,r,w,sigma,v1,v2 at every stored time level
//   report.json  measurement results and pass/fail booleans
//   meta.json    grid echo, constants pack, envelope inputs for re-checking
// `failures` counts violated certified checks (envelope, max principle,
// sigma envelope, compatibility, tridiagonal residual, discrete maximum
// principle, contraction when applicable).
struct RunSummary {
  std::string out_dir;
  std::string config_hash;
  int failures = 0;
  std::vector<std::string> failed_checks;

  DecayReport decay;
  LimsupReport limsup;
  MaxPrincipleReport max_principle;
  DataBounds bounds;
  bool has_sigma = false;
  SigmaEnvelopeReport sigma;
  bool has_shells = false;
  ShellSequence shells;
  DichotomyVerdict dichotomy;
  SpatialDecayReport spatial;

  bool compatibility_ok = true;
  double solve_residual = 0.0;
  bool discrete_mp_ok = true;
};

RunSummary simulate_run(const ExperimentConfig& cfg, const std::string& out_dir);

// Re-derives every envelope and bound from the stored artifacts alone: the
// config hash must match across config.toml, meta.json, report.json, and the
// field.csv preamble (mismatch throws InvalidInput), then the decay envelope,
// maximum principle, sigma envelope, and contraction inequality are re-checked
// at every stored time level using only constants recorded in meta.json.
struct VerifyReport {
  std::string dir;
  std::string config_hash;
  std::size_t levels = 0;
  bool envelope_ok = true;
  bool max_principle_ok = true;
  bool has_sigma = false;
  bool sigma_ok = true;
  bool contraction_checked = false;
  bool contraction_ok = true;
  int failures = 0;
  std::vector<std::string> failed_checks;
};

VerifyReport verify_run_dir(const std::string& dir);

// One classified steady integration of the sweep grid.
struct SweepRow {
  std::size_t index = 0;
  double c1 = kNaN, c2 = kNaN, s0 = kNaN;
  double g1_b = kNaN, g2_b = kNaN;
  std::string global_case, example_case, n2_case, prediction;
  double delta = kNaN, s_star = kNaN;
  double s_infty = kNaN, uncertainty = kNaN;
  double r_detect = kNaN;
  int tail_sign = 0;
  double r_reached = kNaN;
  bool finite_exit = false;
  bool pred_ok = false;
  bool tail_ok = false;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t failures = 0;
};

// Cartesian product over the [sweep] arrays (c1, c2, s0, g1_b, g2_b; absent
// keys pin the base value).  Each tuple is classified, integrated to the
// configured r_end, and its extrapolated limit checked against the predicted
// set (tolerance 1e-4) with the monotone-tail onset required by 1e3 * r0.
// Tuples run independently; `threads` > 1 partitions them across workers
// with deterministic row order.  Per-tuple failures are recorded in the row,
// never thrown.
SweepResult run_sweep(const ExperimentConfig& base, const TomlDocument& doc, int threads);

std::vector<std::string> sweep_csv_header();
std::vector<double> sweep_csv_row(const SweepRow& row);

}  // namespace forch
