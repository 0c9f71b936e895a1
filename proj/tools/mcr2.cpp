// Command-line front end: run experiments, sweeps, theory tables, and
// critical-point diagnostics. Exit codes: 0 success, 2 validation error,
// 3 solver abort, 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcr2/diagnostics.hpp"
#include "mcr2/experiments.hpp"
#include "mcr2/landscape.hpp"
#include "mcr2/objective.hpp"
#include "mcr2/optima.hpp"
#include "mcr2/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolverAbort = 3;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw mcr2::ValidationError("cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_summary(const mcr2::RunManifest& man) {
  const mcr2::TerminalSummary& s = man.summary;
  std::printf("%s: F = %.12g  F* = %.12g  gap = %.3g  residual = %.3g\n",
              man.config.name.c_str(), s.value, s.optimum, s.gap, s.residual);
  std::printf("  ranks = [");
  for (std::size_t i = 0; i < s.stable_ranks.size(); ++i) {
    std::printf("%s%d", i ? ", " : "", s.stable_ranks[i]);
  }
  std::printf("]  discrimination = %.3g  max sigma dev = %.3g\n",
              s.discrimination, s.max_sigma_deviation);
  std::printf("  %ld iterations, %s; artifacts in %s/%s\n", s.iterations,
              s.stop_reason.c_str(), man.config.out_dir.c_str(),
              man.config.name.c_str());
}

nlohmann::ordered_json report_json(const mcr2::CriticalPointReport& report) {
  nlohmann::ordered_json j;
  j["label"] = mcr2::to_string(report.label);
  j["residual"] = report.residual;
  j["cross_coherence"] = report.cross_coherence;
  j["diagnostic"] = report.diagnostic;
  j["offending_block"] = report.offending_block;
  j["offending_index"] = report.offending_index;
  nlohmann::ordered_json spectra = nlohmann::ordered_json::array();
  for (const Eigen::VectorXd& sv : report.block_spectra) {
    std::vector<double> vals(sv.data(), sv.data() + sv.size());
    spectra.push_back(vals);
  }
  j["block_spectra"] = std::move(spectra);
  if (report.curvature_witness) {
    j["witness_curvature"] = report.curvature_witness->curvature;
  }
  return j;
}

struct LoadedProblem {
  mcr2::ProblemParams params;
  mcr2::FeatureMatrix Z;
};

LoadedProblem load_problem(const std::string& matrix_path,
                           const std::string& params_path) {
  const mcr2::ProblemParams params =
      mcr2::params_from_json_text(read_file(params_path));
  const Eigen::MatrixXd M = mcr2::matrix_from_csv(read_file(matrix_path));
  return {params, mcr2::FeatureMatrix(M, params.partition())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized coding-rate-reduction optimization toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mcr2::kVersion));

  // run
  auto* run = app.add_subcommand("run", "Run one experiment from a config");
  std::string run_config, run_builtin, run_out;
  bool run_no_svg = false;
  std::uint64_t run_seed = 0;
  bool run_seed_set = false;
  run->add_option("--config", run_config, "Path to a JSON config");
  run->add_option("--builtin", run_builtin,
                  "Built-in config name (exp-main, exp-1, exp-2, exp-3, "
                  "table-1-theory)");
  run->add_option("--seed", run_seed, "Override the config seed")
      ->each([&](const std::string&) { run_seed_set = true; });
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--no-svg", run_no_svg, "Skip SVG rendering");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a convergence sweep");
  std::string sweep_config, sweep_builtin, sweep_out, sweep_axis;
  std::vector<int> sweep_values;
  bool sweep_no_svg = false;
  std::uint64_t sweep_seed = 0;
  bool sweep_seed_set = false;
  sweep->add_option("--config", sweep_config, "Path to a JSON base config");
  sweep->add_option("--builtin", sweep_builtin,
                    "Built-in sweep name (fig3-d, fig3-m)");
  sweep->add_option("--axis", sweep_axis, "Swept quantity: d or m");
  sweep->add_option("--values", sweep_values, "Swept values, comma separated")
      ->delimiter(',');
  sweep->add_option("--seed", sweep_seed, "Override the base seed")
      ->each([&](const std::string&) { sweep_seed_set = true; });
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep->add_flag("--no-svg", sweep_no_svg, "Skip SVG rendering");

  // table1
  auto* table = app.add_subcommand(
      "table1", "Print the closed-form optimal-value table (no solver)");
  std::string table_out;
  table->add_option("--out", table_out, "Also write the CSV to this path");

  // classify
  auto* classify = app.add_subcommand(
      "classify", "Classify a feature matrix as max / saddle / non-critical");
  std::string cls_matrix, cls_params;
  mcr2::ClassifyTolerances cls_tol;
  classify->add_option("--matrix", cls_matrix, "Matrix CSV (rows,cols header)")
      ->required();
  classify->add_option("--params", cls_params, "Problem parameters JSON")
      ->required();
  classify->add_option("--critical-tol", cls_tol.critical_tol,
                       "First-order residual tolerance");
  classify->add_option("--spectrum-tol", cls_tol.spectrum_tol,
                       "Relative singular-value match tolerance");
  classify->add_option("--zero-tol", cls_tol.zero_tol,
                       "Relative zero-band tolerance");
  classify->add_option("--orthogonality-tol", cls_tol.orthogonality_tol,
                       "Cross-block coherence tolerance");

  // probe
  auto* probe = app.add_subcommand(
      "probe", "Report the maximum observed curvature at a feature matrix");
  std::string probe_matrix, probe_params, probe_dir_out;
  int probe_count = 64;
  std::uint64_t probe_seed = 0;
  probe->add_option("--matrix", probe_matrix, "Matrix CSV (rows,cols header)")
      ->required();
  probe->add_option("--params", probe_params, "Problem parameters JSON")
      ->required();
  probe->add_option("--count", probe_count, "Number of random directions");
  probe->add_option("--seed", probe_seed, "RNG seed for random directions");
  probe->add_option("--direction-out", probe_dir_out,
                    "Write the best direction as matrix CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (run->parsed()) {
      if (run_config.empty() == run_builtin.empty()) {
        throw mcr2::ValidationError("run needs exactly one of --config, --builtin");
      }
      if (run_builtin == "table-1-theory") {
        const std::string csv = mcr2::table1_csv();
        const std::string out_dir = run_out.empty() ? "out" : run_out;
        mcr2::atomic_write_file(
            std::filesystem::path(out_dir) / "table-1-theory.csv", csv);
        std::fputs(csv.c_str(), stdout);
        return kExitOk;
      }
      mcr2::ExperimentConfig cfg =
          run_builtin.empty() ? mcr2::config_from_json_text(read_file(run_config))
                              : mcr2::builtin_config(run_builtin);
      if (run_seed_set) cfg.solver.seed = run_seed;
      if (!run_out.empty()) cfg.out_dir = run_out;
      const mcr2::RunManifest man = mcr2::run_experiment(cfg, !run_no_svg);
      if (man.summary.failed) {
        std::fprintf(stderr, "solver aborted: %s\n", man.summary.failure.c_str());
        return kExitSolverAbort;
      }
      print_summary(man);
      return kExitOk;
    }

    if (sweep->parsed()) {
      mcr2::ExperimentConfig base;
      mcr2::SweepAxis axis = mcr2::SweepAxis::VaryD;
      std::vector<int> values;
      if (!sweep_builtin.empty()) {
        auto spec = mcr2::builtin_sweep(sweep_builtin);
        base = std::move(spec.first);
        axis = spec.second.first;
        values = std::move(spec.second.second);
      } else if (!sweep_config.empty()) {
        base = mcr2::config_from_json_text(read_file(sweep_config));
        if (sweep_axis == "d") {
          axis = mcr2::SweepAxis::VaryD;
        } else if (sweep_axis == "m") {
          axis = mcr2::SweepAxis::VaryM;
        } else {
          throw mcr2::ValidationError("--axis must be d or m");
        }
        values = sweep_values;
      } else {
        throw mcr2::ValidationError("sweep needs --builtin or --config");
      }
      if (sweep_seed_set) base.solver.seed = sweep_seed;
      if (!sweep_out.empty()) base.out_dir = sweep_out;
      const std::vector<mcr2::RunManifest> manifests =
          mcr2::run_convergence_sweep(base, axis, values, !sweep_no_svg);
      bool any_failed = false;
      for (const mcr2::RunManifest& man : manifests) {
        if (man.summary.failed) {
          any_failed = true;
          std::fprintf(stderr, "%s: solver aborted: %s\n",
                       man.config.name.c_str(), man.summary.failure.c_str());
        } else {
          print_summary(man);
        }
      }
      std::printf("combined gap series: %s/%s-gap.csv\n", base.out_dir.c_str(),
                  base.name.c_str());
      return any_failed ? kExitSolverAbort : kExitOk;
    }

    if (table->parsed()) {
      const std::string csv = mcr2::table1_csv();
      if (!table_out.empty()) mcr2::atomic_write_file(table_out, csv);
      std::fputs(csv.c_str(), stdout);
      return kExitOk;
    }

    if (classify->parsed()) {
      const LoadedProblem p = load_problem(cls_matrix, cls_params);
      const mcr2::ValidatedParams vp = mcr2::require_valid(p.params);
      const mcr2::CriticalPointReport report =
          mcr2::classify_critical_point(p.Z, vp, cls_tol);
      std::cout << report_json(report).dump(2) << "\n";
      return kExitOk;
    }

    if (probe->parsed()) {
      const LoadedProblem p = load_problem(probe_matrix, probe_params);
      mcr2::Rng rng(probe_seed);
      const mcr2::ProbeResult result =
          mcr2::curvature_probe(p.Z, p.params, probe_count, rng);
      nlohmann::ordered_json j;
      j["max_curvature"] = result.max_curvature;
      j["random_directions"] = probe_count;
      if (!probe_dir_out.empty()) {
        mcr2::atomic_write_file(probe_dir_out,
                                mcr2::matrix_to_csv(result.direction));
        j["direction_file"] = probe_dir_out;
      }
      std::cout << j.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const mcr2::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const mcr2::SolverDivergence& e) {
    std::fprintf(stderr, "solver aborted: %s\n", e.what());
    return kExitSolverAbort;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  }
  return kExitOther;
}
