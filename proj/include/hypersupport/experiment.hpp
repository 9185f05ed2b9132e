#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypersupport/verify.hpp"

namespace hsup::cli {

using verify::Strategy;

// s0 is either fixed or the 1/(2n) rule; value(n) resolves it per dimension.
struct S0Policy {
  bool dimension_rule = true;  // s0 = 1/(2n)
  double fixed = 0.0;

  double value(std::size_t n) const;
};

struct ExperimentConfig {
  std::vector<std::size_t> n_list{2, 3, 4, 5};
  std::size_t trials = 100;  // generated bodies per dimension
  std::vector<double> s_list{1e-1, 1e-3, 1e-6};
  S0Policy s0;
  std::vector<verify::ThinKind> kinds{verify::ThinKind::box, verify::ThinKind::needle_simplex,
                                      verify::ThinKind::slab_cross};
  std::vector<double> thinness{1.0, 1e-2, 1e-4, 1e-6};
  std::vector<std::string> body_files;  // when set, replaces generation
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::size_t random_dirs = 8;  // per body, added to the vertex directions
  std::size_t oracle_budget = 1024;
  std::size_t threads = 0;  // 0 = hardware
  std::string out;          // report path; empty = stdout only
  std::string format = "csv";
  std::string plotdata;   // optional plot-series JSON path
  std::string trace_dir;  // optional per-selection trace dump directory
  double mvee_eps = 1e-7;
};

// Parses the JSON mirror of ExperimentConfig (same field names as above).
ExperimentConfig config_from_json_text(const std::string& text);

// Throws input_error when s exceeds the applicable s0, no seed is set, or a
// list is malformed.
void validate(const ExperimentConfig& config);

struct ReportRow {
  std::size_t n = 0;
  std::size_t trial_id = 0;
  std::string body_kind;
  double thinness = 0.0;
  double s = 0.0;
  double s0 = 0.0;
  Strategy strategy = Strategy::algorithm;
  double ratio = 0.0;
  double bound = 0.0;
  std::size_t depth = 0;
  std::string case_terminated;  // "I", "terminal_k1", or "-" for non-algorithm rows
  bool perturbed = false;
  double wall_ms = 0.0;
};

struct RunResult {
  std::vector<ReportRow> rows;
  int exit_code = 0;            // 0 ok, 1 bound/invariant violation, 2 usage
  std::string failure;          // names the first failing instance
  std::string failure_trace_json;
};

// Full sweep: generate/load bodies, well-center, vertex + seeded random
// directions, y = (1-s) p, all five strategies per instance. Rows come back
// sorted by (n, trial_id, strategy) regardless of scheduling. Writes the
// report/plotdata/trace files named in the config.
RunResult run(const ExperimentConfig& config);

// Serialization helpers (also used by the round-trip tests). Doubles are
// shortest-round-trip formatted so identical runs emit identical bytes.
std::string format_double(double v);
std::string to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> from_csv(const std::string& text);
std::string to_json_text(const std::vector<ReportRow>& rows);
std::vector<ReportRow> from_json_text(const std::string& text);
std::string plotdata_json(const std::vector<ReportRow>& rows);

// Writes rows to config.out (or stdout when empty) in config.format, plus
// plotdata when configured.
void emit(const std::vector<ReportRow>& rows, const ExperimentConfig& config);

}  // namespace hsup::cli
