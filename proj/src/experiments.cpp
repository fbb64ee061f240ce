#include "tvcs/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace tvcs {

void ExperimentConfig::validate() const {
  if (n < 2) throw InvalidArgument("config: n must be at least 2");
  if (d < 1) throw InvalidArgument("config: d must be at least 1");
  if (m_grid.empty() || k_grid.empty()) throw InvalidArgument("config: m_grid and k_grid must be non-empty");
  const Eigen::Index total = unknowns();
  for (int m : m_grid)
    if (m < 1 || m > total)
      throw InvalidArgument("config: m = " + std::to_string(m) + " outside [1, " + std::to_string(total) + "]");
  const Eigen::Index max_k = difference_matrix(GridShape{n, d}).rows();
  for (int k : k_grid)
    if (k < 0 || k > max_k) throw InvalidArgument("config: k = " + std::to_string(k) + " out of range");
  if (trials_per_cell < 1) throw InvalidArgument("config: trials_per_cell must be >= 1");
  if (!(success_rel_tol > 0)) throw InvalidArgument("config: success_rel_tol must be > 0");
  if (!(noise_epsilon >= 0)) throw InvalidArgument("config: noise_epsilon must be >= 0");
  if (workers < 0) throw InvalidArgument("config: workers must be >= 0");
  solver.validate();
}

Eigen::Index ExperimentConfig::unknowns() const { return GridShape{n, d}.total(); }

double CellStats::std_error() const {
  if (trials == 0) return 0.0;
  const double p = success_rate();
  return std::sqrt(p * (1.0 - p) / trials);
}

SeedSpec trial_seed(std::uint64_t master_seed, int m, int k, int trial) {
  return SeedSpec{master_seed}
      .child(static_cast<std::uint64_t>(m))
      .child(static_cast<std::uint64_t>(k))
      .child(static_cast<std::uint64_t>(trial));
}

TrialRecord run_trial(const ExperimentConfig& cfg, int m, int k, int trial) {
  const SeedSpec seed = trial_seed(cfg.master_seed, m, k, trial);
  const GridShape shape{cfg.n, cfg.d};
  const Vector x0 = cfg.d == 1 ? sparse_gradient_signal(cfg.n, k, seed.child(0)).values()
                               : sparse_gradient_image(cfg.n, cfg.d, k, seed.child(0)).values();
  const MeasurementEnsemble a = gaussian_matrix(m, static_cast<int>(shape.total()), seed.child(1));
  Vector y = a.matrix * x0;
  if (cfg.noise_epsilon > 0) {
    Rng rng(seed.child(2));
    Vector e = rng.gaussian_vector(m);
    y += e * (cfg.noise_epsilon / e.norm());
  }
  const SolveReport rep = tv_min_noise(a, y, cfg.noise_epsilon, shape, cfg.solver);

  TrialRecord rec;
  rec.m = m;
  rec.k = k;
  rec.trial_index = trial;
  rec.child_seed = seed.value();
  const double scale = x0.norm();
  rec.rel_error = (rep.solution - x0).norm() / (scale > 0 ? scale : 1.0);
  rec.converged = rep.converged;
  rec.solve_time = cfg.record_timing ? rep.wall_time : 0.0;
  return rec;
}

namespace {

CellStats aggregate(const std::vector<TrialRecord>& recs, double tol) {
  CellStats c;
  for (const auto& r : recs) {
    ++c.trials;
    if (r.success(tol)) ++c.successes;
    c.mean_rel_error += r.rel_error;
    c.mean_solve_time += r.solve_time;
  }
  if (c.trials > 0) {
    c.mean_rel_error /= c.trials;
    c.mean_solve_time /= c.trials;
  }
  return c;
}

std::vector<TrialRecord> run_cell(const ExperimentConfig& cfg, int m, int k) {
  std::vector<TrialRecord> recs(static_cast<std::size_t>(cfg.trials_per_cell));
  parallel_for(recs.size(), cfg.workers,
               [&](std::size_t t) { recs[t] = run_trial(cfg, m, k, static_cast<int>(t)); });
  return recs;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

PhaseDiagram run_phase_transition(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Job {
    int m, k, trial;
  };
  std::vector<Job> jobs;
  for (int m : cfg.m_grid)
    for (int k : cfg.k_grid)
      for (int t = 0; t < cfg.trials_per_cell; ++t) jobs.push_back({m, k, t});

  PhaseDiagram diagram;
  diagram.config_echo = cfg;
  diagram.records.resize(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    diagram.records[i] = run_trial(cfg, jobs[i].m, jobs[i].k, jobs[i].trial);
  });

  std::map<std::pair<int, int>, std::vector<TrialRecord>> grouped;
  for (const auto& r : diagram.records) grouped[{r.m, r.k}].push_back(r);
  for (const auto& [key, recs] : grouped) diagram.cells[key] = aggregate(recs, cfg.success_rel_tol);
  return diagram;
}

M50Result find_m50(int n, int k, int d, const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.n = n;
  c.d = d;
  c.m_grid = {1};
  c.k_grid = {k};
  c.validate();
  const int total = static_cast<int>(c.unknowns());

  M50Result result;
  std::map<int, CellStats> stats;
  auto evaluate = [&](int m) -> const CellStats& {
    auto it = stats.find(m);
    if (it == stats.end()) {
      it = stats.emplace(m, aggregate(run_cell(c, m, k), c.success_rel_tol)).first;
      result.evaluated[m] = it->second.success_rate();
    }
    return it->second;
  };
  auto passes = [&](int m) { return evaluate(m).success_rate() >= 0.5; };

  if (!passes(total))
    throw Saturation("find_m50: success never reaches 0.5 up to m = " + std::to_string(total));

  int lo = 0, hi = total;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (passes(mid) ? hi : lo) = mid;
  }

  // A failing m above a passing one, beyond two combined standard errors,
  // means bisection may have skipped the first crossing.
  bool monotone = true;
  for (auto i = stats.begin(); i != stats.end() && monotone; ++i)
    for (auto j = std::next(i); j != stats.end(); ++j) {
      const double se = std::hypot(i->second.std_error(), j->second.std_error());
      if (i->second.success_rate() - j->second.success_rate() > 2.0 * se) {
        monotone = false;
        break;
      }
    }
  if (!monotone) {
    result.linear_scan = true;
    hi = total;
    for (int m = 1; m <= total; ++m)
      if (passes(m)) {
        hi = m;
        break;
      }
  }

  result.m50 = hi;
  const CellStats& at = evaluate(hi);
  result.success_rate = at.success_rate();
  result.std_error = at.std_error();
  if (hi > 1) {
    const CellStats& below = evaluate(hi - 1);
    result.rate_below = below.success_rate();
    result.std_error_below = below.std_error();
  }
  return result;
}

std::string diagram_to_csv(const PhaseDiagram& diagram) {
  std::ostringstream out;
  out << "m,k,trials,successes,success_rate,mean_rel_error,mean_solve_time_s\n";
  for (const auto& [key, c] : diagram.cells) {
    out << key.first << ',' << key.second << ',' << c.trials << ',' << c.successes << ','
        << format_double(c.success_rate()) << ',' << format_double(c.mean_rel_error) << ','
        << format_double(c.mean_solve_time) << '\n';
  }
  return out.str();
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return {
      {"n", cfg.n},
      {"d", cfg.d},
      {"m_grid", cfg.m_grid},
      {"k_grid", cfg.k_grid},
      {"trials_per_cell", cfg.trials_per_cell},
      {"success_rel_tol", cfg.success_rel_tol},
      {"master_seed", cfg.master_seed},
      {"solver",
       {{"max_iters", cfg.solver.max_iters},
        {"primal_tol", cfg.solver.primal_tol},
        {"dual_tol", cfg.solver.dual_tol},
        {"penalty", cfg.solver.penalty},
        {"over_relax", cfg.solver.over_relax}}},
      {"noise_epsilon", cfg.noise_epsilon},
      {"output_path", cfg.output_path},
      {"workers", cfg.workers},
      {"record_timing", cfg.record_timing},
  };
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out, bool required) {
  if (!j.contains(key)) {
    if (required) throw InvalidArgument(std::string("config: missing field '") + key + "'");
    return;
  }
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw InvalidArgument(std::string("config: unknown field '") + item.key() + "' in " + where);
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  reject_unknown(j,
                 {"n", "d", "m_grid", "k_grid", "trials_per_cell", "success_rel_tol", "master_seed", "solver",
                  "noise_epsilon", "output_path", "workers", "record_timing"},
                 "config");
  ExperimentConfig cfg;
  read_field(j, "n", cfg.n, true);
  read_field(j, "d", cfg.d, false);
  read_field(j, "m_grid", cfg.m_grid, true);
  read_field(j, "k_grid", cfg.k_grid, true);
  read_field(j, "trials_per_cell", cfg.trials_per_cell, false);
  read_field(j, "success_rel_tol", cfg.success_rel_tol, false);
  read_field(j, "master_seed", cfg.master_seed, false);
  read_field(j, "noise_epsilon", cfg.noise_epsilon, false);
  read_field(j, "output_path", cfg.output_path, false);
  read_field(j, "workers", cfg.workers, false);
  read_field(j, "record_timing", cfg.record_timing, false);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (!s.is_object()) throw InvalidArgument("config: 'solver' must be an object");
    reject_unknown(s, {"max_iters", "primal_tol", "dual_tol", "penalty", "over_relax"}, "solver");
    read_field(s, "max_iters", cfg.solver.max_iters, false);
    read_field(s, "primal_tol", cfg.solver.primal_tol, false);
    read_field(s, "dual_tol", cfg.solver.dual_tol, false);
    read_field(s, "penalty", cfg.solver.penalty, false);
    read_field(s, "over_relax", cfg.solver.over_relax, false);
  }
  cfg.validate();
  return cfg;
}

nlohmann::json diagram_to_json(const PhaseDiagram& diagram) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, c] : diagram.cells) {
    cells.push_back({{"m", key.first},
                     {"k", key.second},
                     {"trials", c.trials},
                     {"successes", c.successes},
                     {"success_rate", c.success_rate()},
                     {"mean_rel_error", c.mean_rel_error},
                     {"mean_solve_time_s", c.mean_solve_time}});
  }
  // The worker count is an execution detail; leaving it out keeps exports
  // byte-identical across schedules.
  nlohmann::json config = config_to_json(diagram.config_echo);
  config.erase("workers");
  return {{"config", config}, {"cells", cells}};
}

PhaseDiagram diagram_from_json(const nlohmann::json& j) {
  PhaseDiagram diagram;
  try {
    diagram.config_echo = config_from_json(j.at("config"));
    for (const auto& c : j.at("cells")) {
      CellStats s;
      s.trials = c.at("trials").get<int>();
      s.successes = c.at("successes").get<int>();
      s.mean_rel_error = c.at("mean_rel_error").get<double>();
      s.mean_solve_time = c.at("mean_solve_time_s").get<double>();
      if (s.successes > s.trials) throw InvalidArgument("diagram: successes exceed trials");
      diagram.cells[{c.at("m").get<int>(), c.at("k").get<int>()}] = s;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("diagram: malformed JSON: ") + e.what());
  }
  return diagram;
}

void export_diagram(const PhaseDiagram& diagram, ExportFormat format, const std::string& path) {
  const std::string body =
      format == ExportFormat::csv ? diagram_to_csv(diagram) : diagram_to_json(diagram).dump(2) + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << body;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace tvcs
