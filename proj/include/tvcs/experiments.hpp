#pragma once

// Phase-transition experiments, M50 search and result persistence.

#include "tvcs/core.hpp"
#include "tvcs/solvers.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tvcs {

struct ExperimentConfig {
  int n = 64;
  int d = 1;
  std::vector<int> m_grid;
  std::vector<int> k_grid;
  int trials_per_cell = 10;
  double success_rel_tol = 1e-4;
  std::uint64_t master_seed = 0;
  SolverConfig solver;
  double noise_epsilon = 0.0;
  std::string output_path;
  int workers = 1;
  /// When false, solve times are recorded as 0 so repeated runs export
  /// byte-identical files.
  bool record_timing = true;

  void validate() const;
  Eigen::Index unknowns() const;
};

struct TrialRecord {
  int m = 0;
  int k = 0;
  int trial_index = 0;
  std::uint64_t child_seed = 0;
  double rel_error = 0.0;
  bool converged = false;
  double solve_time = 0.0;

  bool success(double tol) const { return converged && rel_error <= tol; }
};

struct CellStats {
  int successes = 0;
  int trials = 0;
  double mean_rel_error = 0.0;
  double mean_solve_time = 0.0;

  double success_rate() const { return trials > 0 ? double(successes) / trials : 0.0; }
  /// Binomial standard error of the success rate.
  double std_error() const;

  friend bool operator==(const CellStats&, const CellStats&) = default;
};

struct PhaseDiagram {
  std::map<std::pair<int, int>, CellStats> cells;  ///< keyed by (m, k)
  ExperimentConfig config_echo;
  std::vector<TrialRecord> records;
};

/// Seed of trial `trial` in cell (m, k).
SeedSpec trial_seed(std::uint64_t master_seed, int m, int k, int trial);

/// Regenerates one trial from its coordinates alone.
TrialRecord run_trial(const ExperimentConfig& cfg, int m, int k, int trial);

PhaseDiagram run_phase_transition(const ExperimentConfig& cfg);

struct M50Result {
  int m50 = 0;
  double success_rate = 0.0;  ///< at m50
  double std_error = 0.0;     ///< binomial, at m50
  double rate_below = 0.0;    ///< at m50 - 1 (0 when m50 == 1)
  double std_error_below = 0.0;
  bool linear_scan = false;   ///< bisection fell back to a scan
  std::map<int, double> evaluated;
};

/// Smallest m with empirical success >= 0.5 over cfg.trials_per_cell trials.
/// Uses cfg's seed, tolerance, solver and workers; ignores its grids.
M50Result find_m50(int n, int k, int d, const ExperimentConfig& cfg);

enum class ExportFormat { csv, json };

void export_diagram(const PhaseDiagram& diagram, ExportFormat format, const std::string& path);
std::string diagram_to_csv(const PhaseDiagram& diagram);
nlohmann::json diagram_to_json(const PhaseDiagram& diagram);
PhaseDiagram diagram_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Throws InvalidArgument on missing or malformed fields.
ExperimentConfig config_from_json(const nlohmann::json& j);

}  // namespace tvcs
