#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcr2/params.hpp"
#include "mcr2/solver.hpp"

namespace mcr2 {

inline constexpr const char* kVersion = "0.1.0";

// Raised on malformed or inconsistent configuration; the CLI maps it to
// exit code 2. Nothing is written to disk before configuration passes.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string name;  // must be filesystem-safe: [A-Za-z0-9._-], nonempty
  int d = 0;
  std::vector<int> class_sizes;
  double epsilon = 0.0;
  double lambda = 0.0;
  SolverConfig solver;
  std::vector<std::string> outputs = {"heatmap", "spectra", "convergence", "report"};
  std::string out_dir = "out";
};

// Throws ValidationError on unknown keys in `outputs`, an unsafe name, or a
// JSON document that does not match the schema.
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& config);
ProblemParams params_from_config(const ExperimentConfig& config);

// Named presets: "exp-main", "exp-1", "exp-2", "exp-3". Throws
// ValidationError for anything else ("table-1-theory" is a CLI subcommand,
// not a solver run).
ExperimentConfig builtin_config(const std::string& name);
std::vector<std::string> builtin_config_names();

struct TerminalSummary {
  double value = 0.0;        // F at the terminal iterate
  double optimum = 0.0;      // best stationary value for these params
  double gap = 0.0;          // optimum - value
  double residual = 0.0;     // terminal gradient norm
  std::vector<int> stable_ranks;
  double discrimination = 0.0;
  double max_sigma_deviation = 0.0;  // vs the closed-form sigma_high
  long iterations = 0;
  std::string stop_reason;
  bool failed = false;
  std::string failure;       // divergence message when failed
};

struct FileRecord {
  std::string path;    // relative to the run directory
  std::string sha256;  // lowercase hex
};

struct RunManifest {
  ExperimentConfig config;
  std::string library_version;
  std::string timestamp;  // ISO 8601 UTC; excluded from fingerprints
  std::uint64_t seed = 0;
  TerminalSummary summary;
  std::vector<FileRecord> files;
};

std::string manifest_to_json_text(const RunManifest& manifest);

// SHA-256 of the manifest JSON with the timestamp field cleared; equal for
// byte-identical reruns.
std::string manifest_fingerprint(const RunManifest& manifest);

// Runs one experiment end to end: validate, solve, summarize, write
// trace/spectra/similarity CSVs, requested SVGs, and manifest.json into
// out_dir/name/. A solver divergence still writes the partial trace and a
// manifest with summary.failed = true. Throws ValidationError before any
// file is created when the configuration is invalid.
RunManifest run_experiment(const ExperimentConfig& config, bool write_svg = true);

enum class SweepAxis { VaryD, VaryM };

// One run per value (d or total m; class proportions are preserved when m
// varies). Run i uses seed base.solver.seed + i. Writes each run under
// out_dir/<name>-<axis><value>/ plus a combined CSV
// out_dir/<base.name>-gap.csv with header "config,iter,gap". Runs execute
// in parallel; outputs are deterministic for a fixed base config.
std::vector<RunManifest> run_convergence_sweep(const ExperimentConfig& base,
                                               SweepAxis axis,
                                               const std::vector<int>& values,
                                               bool write_svg = true);

// Preset sweeps: "fig3-d" (m = 200 over d in {40, 80, 120}) and "fig3-m"
// (d = 50 over m in {100, 200, 400}), four equal classes each.
std::pair<ExperimentConfig, std::pair<SweepAxis, std::vector<int>>> builtin_sweep(
    const std::string& name);

// Closed-form objective values for the standard feature budgets; no solver
// involved. Rows: (label, d, K, m_k, epsilon, lambda, value).
struct TheoryRow {
  std::string label;
  int d = 0;
  int num_classes = 0;
  int per_class = 0;
  double epsilon = 0.0;
  double lambda = 0.0;
  double value = 0.0;
};

std::vector<TheoryRow> table1_rows();
std::string table1_csv();

// ---- deterministic artifact helpers ----

// Write-to-temp-then-rename; the destination never holds a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string sha256_bytes(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// "rows,cols" header, then one comma-separated row per line, 17 significant
// digits (doubles survive the round trip bit-exactly).
std::string matrix_to_csv(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_csv(const std::string& text);

std::string trace_to_csv(const RunTrace& trace);

// |values| in [0, 1] on a white-to-dark-blue ramp, one rect per cell.
std::string heatmap_svg(const Eigen::MatrixXd& M);
// One panel per class: singular values as dots, theory sigma_high as a
// horizontal line.
std::string spectrum_svg(const std::vector<Eigen::VectorXd>& spectra,
                         const std::vector<double>& theory_sigma);
// log10 of (optimum - F_t); non-positive gaps are clamped to 1e-16 and the
// clamp is recorded in the SVG <title>.
std::string convergence_svg(const RunTrace& trace, double optimum);

}  // namespace mcr2
