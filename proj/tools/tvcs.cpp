// Command-line front end for the tvcs library.

#include "tvcs/certificates.hpp"
#include "tvcs/experiments.hpp"
#include "tvcs/haar.hpp"
#include "tvcs/solvers.hpp"
#include "tvcs/widths.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

using nlohmann::json;
using namespace tvcs;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitGuard = 3;

// JSON has no infinity; emit null instead.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

ExportFormat format_for(const std::string& path, const std::string& requested) {
  if (requested == "csv") return ExportFormat::csv;
  if (requested == "json") return ExportFormat::json;
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return is_json ? ExportFormat::json : ExportFormat::csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Total-variation compressed sensing toolkit"};
  app.require_subcommand(1);

  // recover
  int r_n = 64, r_m = 32, r_k = 3;
  std::uint64_t r_seed = 0;
  double r_eps = 0.0;
  auto* recover = app.add_subcommand("recover", "Recover one random sparse-gradient signal");
  recover->add_option("--n", r_n, "Signal length")->check(CLI::PositiveNumber);
  recover->add_option("--m", r_m, "Number of measurements")->check(CLI::PositiveNumber);
  recover->add_option("--k", r_k, "Gradient sparsity")->check(CLI::NonNegativeNumber);
  recover->add_option("--matrix-seed", r_seed, "Seed for the signal, matrix and noise");
  recover->add_option("--epsilon", r_eps, "Noise level (0 solves the equality program)");

  // phase
  std::string p_config, p_output, p_format;
  int p_workers = -1;
  auto* phase = app.add_subcommand("phase", "Run a phase-transition experiment");
  phase->add_option("--config", p_config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  phase->add_option("--output", p_output, "Output file (overrides output_path)");
  phase->add_option("--format", p_format, "csv or json (default: from the file extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  phase->add_option("--workers", p_workers, "Worker threads (overrides the config)");

  // m50
  int q_n = 64, q_k = 2, q_d = 1, q_trials = 40, q_workers = 1;
  std::uint64_t q_seed = 0;
  auto* m50 = app.add_subcommand("m50", "Locate the 50% success measurement count");
  m50->add_option("--n", q_n, "Side length")->check(CLI::PositiveNumber);
  m50->add_option("--k", q_k, "Gradient sparsity")->check(CLI::NonNegativeNumber);
  m50->add_option("--d", q_d, "Dimension")->check(CLI::PositiveNumber);
  m50->add_option("--trials", q_trials, "Trials per evaluated m")->check(CLI::PositiveNumber);
  m50->add_option("--seed", q_seed, "Master seed");
  m50->add_option("--workers", q_workers, "Worker threads")->check(CLI::NonNegativeNumber);

  // width
  int w_n = 64, w_k = 2, w_d = 1, w_workers = 1;
  long w_samples = 100;
  std::uint64_t w_seed = 0;
  auto* width = app.add_subcommand("width", "Monte Carlo Gaussian width of the relaxed set");
  width->add_option("--n", w_n, "Side length")->check(CLI::PositiveNumber);
  width->add_option("--k", w_k, "Gradient sparsity")->check(CLI::NonNegativeNumber);
  width->add_option("--d", w_d, "Dimension")->check(CLI::PositiveNumber);
  width->add_option("--samples", w_samples, "Gaussian samples")->check(CLI::PositiveNumber);
  width->add_option("--seed", w_seed, "Master seed");
  width->add_option("--workers", w_workers, "Worker threads")->check(CLI::NonNegativeNumber);

  // certify
  int c_n = 10, c_m = 6, c_k = 1;
  std::uint64_t c_seed = 0;
  double c_balance = 1.0;
  auto* certify = app.add_subcommand("certify", "Exact null-space (or balanced) condition check");
  certify->add_option("--n", c_n, "Signal length")->check(CLI::PositiveNumber);
  certify->add_option("--m", c_m, "Number of measurements")->check(CLI::NonNegativeNumber);
  certify->add_option("--k", c_k, "Support size")->check(CLI::NonNegativeNumber);
  certify->add_option("--seed", c_seed, "Matrix seed");
  certify->add_option("--balance", c_balance, "Balanced-condition constant C in (0, 1]");

  // lowerbound
  int l_n = 4096, l_k = 64;
  long l_samples = 500;
  std::uint64_t l_seed = 0;
  auto* lowerbound = app.add_subcommand("lowerbound", "Mean inner product of the alternating-tail witness");
  lowerbound->add_option("--n", l_n, "Signal length")->check(CLI::PositiveNumber);
  lowerbound->add_option("--k", l_k, "Gradient sparsity")->check(CLI::PositiveNumber);
  lowerbound->add_option("--samples", l_samples, "Gaussian samples")->check(CLI::PositiveNumber);
  lowerbound->add_option("--seed", l_seed, "Master seed");

  // haar
  std::string h_input;
  auto* haar = app.add_subcommand("haar", "Haar pyramid of a whitespace-separated signal");
  haar->add_option("--input", h_input, "Input file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*recover) {
      ExperimentConfig cfg;
      cfg.n = r_n;
      cfg.m_grid = {r_m};
      cfg.k_grid = {r_k};
      cfg.master_seed = r_seed;
      cfg.noise_epsilon = r_eps;
      cfg.validate();
      const TrialRecord rec = run_trial(cfg, r_m, r_k, 0);
      emit({{"n", r_n},
            {"m", r_m},
            {"k", r_k},
            {"epsilon", r_eps},
            {"child_seed", rec.child_seed},
            {"rel_error", rec.rel_error},
            {"converged", rec.converged},
            {"success", rec.success(cfg.success_rel_tol)},
            {"solve_time_s", rec.solve_time}});
    } else if (*phase) {
      std::ifstream in(p_config);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
      }
      ExperimentConfig cfg = config_from_json(j);
      if (p_workers >= 0) cfg.workers = p_workers;
      const PhaseDiagram diagram = run_phase_transition(cfg);
      const std::string path = p_output.empty() ? cfg.output_path : p_output;
      if (path.empty()) {
        std::cout << diagram_to_csv(diagram);
      } else {
        export_diagram(diagram, format_for(path, p_format), path);
        std::cerr << "wrote " << diagram.cells.size() << " cells to " << path << '\n';
      }
    } else if (*m50) {
      ExperimentConfig cfg;
      cfg.trials_per_cell = q_trials;
      cfg.master_seed = q_seed;
      cfg.workers = q_workers;
      const M50Result r = find_m50(q_n, q_k, q_d, cfg);
      json evaluated = json::object();
      for (const auto& [m, rate] : r.evaluated) evaluated[std::to_string(m)] = rate;
      emit({{"n", q_n},
            {"k", q_k},
            {"d", q_d},
            {"m50", r.m50},
            {"success_rate", r.success_rate},
            {"std_error", r.std_error},
            {"rate_below", r.rate_below},
            {"std_error_below", r.std_error_below},
            {"linear_scan", r.linear_scan},
            {"evaluated", evaluated}});
    } else if (*width) {
      const WidthEstimate est = width_mc(w_n, w_k, w_d, w_samples, SeedSpec{w_seed}, {}, w_workers);
      json out = {{"n", w_n},
                  {"k", w_k},
                  {"d", w_d},
                  {"samples", est.samples},
                  {"mean", est.mean},
                  {"std_error", est.std_error},
                  {"rejected", est.rejected},
                  {"per_sample_solver_tol", est.per_sample_solver_tol}};
      try {
        out["upper_bound"] = w_d == 1 ? width_upper_bound_1d(w_n, w_k) : width_upper_bound_nd(w_n, w_k, w_d);
      } catch (const Error&) {
        out["upper_bound"] = nullptr;
      }
      emit(out);
    } else if (*certify) {
      const MeasurementEnsemble a = c_m == 0 ? MeasurementEnsemble::from_matrix(Matrix(0, c_n))
                                             : gaussian_matrix(c_m, c_n, SeedSpec{c_seed});
      const CertReport r = c_balance < 1.0 ? balanced_condition(a, c_k, c_balance) : null_space_condition(a, c_k);
      emit({{"n", c_n},
            {"m", c_m},
            {"k", c_k},
            {"threshold", c_balance},
            {"holds", r.holds},
            {"worst_ratio", number(r.worst_ratio)},
            {"worst_support", r.worst_support.indices()},
            {"lps_solved", r.work}});
    } else if (*lowerbound) {
      const WidthEstimate est = lower_bound_mc(l_n, l_k, l_samples, SeedSpec{l_seed});
      const auto c = lower_bound_construction(Vector::Zero(l_n), l_n, l_k);
      emit({{"n", l_n},
            {"k", l_k},
            {"samples", est.samples},
            {"mean", est.mean},
            {"std_error", est.std_error},
            {"mu", c.mu},
            {"nu", c.nu},
            {"l_block", c.l_block},
            {"l_int", c.l_int},
            {"h_blocks", c.h_blocks},
            {"width_lower_bound", width_lower_bound_1d(l_n, l_k)}});
    } else if (*haar) {
      std::ifstream in(h_input);
      std::vector<double> values;
      for (double v; in >> v;) values.push_back(v);
      if (!in.eof()) throw InvalidArgument("could not parse '" + h_input + "' as numbers");
      if (values.size() < 2) throw InvalidArgument("need at least two samples");
      const Signal x(Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
      const HaarPyramid p = haar_decompose_1d(x);
      json levels = json::array();
      for (const Vector& z : p.levels) levels.push_back(std::vector<double>(z.data(), z.data() + z.size()));
      emit({{"n", p.n},
            {"levels", levels},
            {"coarse", p.coarse},
            {"weighted_energy", p.weighted_energy()},
            {"coarse_path_tv", coarse_path_tv(x)}});
    }
  } catch (const ScaleGuard& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGuard;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const UnsupportedLength& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const OutOfRegime& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
