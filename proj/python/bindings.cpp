#include "tvcs/certificates.hpp"
#include "tvcs/experiments.hpp"
#include "tvcs/haar.hpp"
#include "tvcs/solvers.hpp"
#include "tvcs/widths.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace tvcs;

namespace {

SeedSpec seed_of(std::uint64_t master, std::uint64_t stream) { return SeedSpec{master, stream}; }

GridShape shape_for(Eigen::Index total, int dims) {
  if (dims == 1) return GridShape::line(static_cast<int>(total));
  const int side = static_cast<int>(std::lround(std::pow(double(total), 1.0 / dims)));
  const GridShape s{side, dims};
  if (s.total() != total) throw InvalidArgument("length is not a perfect power of dims");
  return s;
}

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["solution"] = r.solution;
  d["objective"] = r.objective;
  d["primal_residual"] = r.primal_residual;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["wall_time"] = r.wall_time;
  return d;
}

SolverConfig solver_config(int max_iters, double tol) {
  SolverConfig cfg;
  cfg.max_iters = max_iters;
  cfg.primal_tol = tol;
  cfg.dual_tol = tol;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Total-variation compressed sensing: solvers, certificates, widths and experiments";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<DegenerateEnsemble>(m, "DegenerateEnsemble", error.ptr());
  py::register_exception<UnsupportedLength>(m, "UnsupportedLength", error.ptr());
  py::register_exception<SparsityTooLarge>(m, "SparsityTooLarge", error.ptr());
  py::register_exception<ScaleGuard>(m, "ScaleGuard", error.ptr());
  py::register_exception<Infeasible>(m, "Infeasible", error.ptr());
  py::register_exception<OutOfRegime>(m, "OutOfRegime", error.ptr());
  py::register_exception<EstimatorUnstable>(m, "EstimatorUnstable", error.ptr());
  py::register_exception<Saturation>(m, "Saturation", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  m.def(
      "gaussian_matrix",
      [](int rows, int cols, std::uint64_t seed, std::uint64_t stream) {
        return gaussian_matrix(rows, cols, seed_of(seed, stream)).matrix;
      },
      py::arg("m"), py::arg("n"), py::arg("seed") = 0, py::arg("stream") = 0);
  m.def(
      "sparse_gradient_signal",
      [](int n, int k, std::uint64_t seed, std::uint64_t stream) {
        return sparse_gradient_signal(n, k, seed_of(seed, stream)).values();
      },
      py::arg("n"), py::arg("k"), py::arg("seed") = 0, py::arg("stream") = 0);
  m.def(
      "sparse_gradient_image",
      [](int side, int dims, int k, std::uint64_t seed, std::uint64_t stream) {
        return sparse_gradient_image(side, dims, k, seed_of(seed, stream)).values();
      },
      py::arg("side"), py::arg("dims"), py::arg("k"), py::arg("seed") = 0, py::arg("stream") = 0);
  m.def("min_singular_value", [](const Matrix& a) { return min_singular_value(MeasurementEnsemble::from_matrix(a)); });
  m.def(
      "tv_norm", [](const Vector& x, int dims) { return tv_norm(x, shape_for(x.size(), dims)); }, py::arg("x"),
      py::arg("dims") = 1);

  m.def(
      "tv_min_eq",
      [](const Matrix& a, const Vector& y, int dims, int max_iters, double tol) {
        return report_dict(tv_min_eq(MeasurementEnsemble::from_matrix(a), y, shape_for(a.cols(), dims),
                                     solver_config(max_iters, tol)));
      },
      py::arg("a"), py::arg("y"), py::arg("dims") = 1, py::arg("max_iters") = 20000, py::arg("tol") = 1e-8);
  m.def(
      "tv_min_noise",
      [](const Matrix& a, const Vector& y, double epsilon, int dims, int max_iters, double tol) {
        return report_dict(tv_min_noise(MeasurementEnsemble::from_matrix(a), y, epsilon, shape_for(a.cols(), dims),
                                        solver_config(max_iters, tol)));
      },
      py::arg("a"), py::arg("y"), py::arg("epsilon"), py::arg("dims") = 1, py::arg("max_iters") = 20000,
      py::arg("tol") = 1e-8);
  m.def("lp_oracle_tv_min", [](const Matrix& a, const Vector& y) {
    return lp_oracle_tv_min(MeasurementEnsemble::from_matrix(a), y).values();
  });

  m.def("haar_decompose", [](const Vector& x) {
    const HaarPyramid p = haar_decompose_1d(Signal(x));
    return py::make_tuple(p.levels, p.coarse);
  });
  m.def("haar_reconstruct", [](const std::vector<Vector>& levels, double coarse) {
    HaarPyramid p;
    p.levels = levels;
    p.coarse = coarse;
    p.n = levels.empty() ? 0 : static_cast<int>(levels.front().size() * 2);
    return haar_reconstruct_1d(p).values();
  });
  m.def("coarse_path_tv", [](const Vector& x) { return coarse_path_tv(Signal(x)); });

  m.def(
      "null_space_condition",
      [](const Matrix& a, int k, double balance) {
        const auto ens = MeasurementEnsemble::from_matrix(a);
        const CertReport r = balance < 1.0 ? balanced_condition(ens, k, balance) : null_space_condition(ens, k);
        py::dict d;
        d["holds"] = r.holds;
        d["worst_ratio"] = r.worst_ratio;
        d["worst_support"] = r.worst_support.indices();
        d["lps_solved"] = r.work;
        return d;
      },
      py::arg("a"), py::arg("k"), py::arg("balance") = 1.0);

  m.def("width_upper_bound_1d", &width_upper_bound_1d, py::arg("n"), py::arg("k"));
  m.def("width_upper_bound_nd", &width_upper_bound_nd, py::arg("n"), py::arg("k"), py::arg("d"));
  m.def("width_lower_bound_1d", &width_lower_bound_1d, py::arg("n"), py::arg("k"));
  m.def(
      "width_mc",
      [](int n, int k, int d, long samples, std::uint64_t seed, int workers) {
        const WidthEstimate e = width_mc(n, k, d, samples, SeedSpec{seed}, {}, workers);
        return py::make_tuple(e.mean, e.std_error);
      },
      py::arg("n"), py::arg("k"), py::arg("d") = 1, py::arg("samples") = 100, py::arg("seed") = 0,
      py::arg("workers") = 1);
  m.def(
      "lower_bound_mc",
      [](int n, int k, long samples, std::uint64_t seed) {
        const WidthEstimate e = lower_bound_mc(n, k, samples, SeedSpec{seed});
        return py::make_tuple(e.mean, e.std_error);
      },
      py::arg("n"), py::arg("k"), py::arg("samples") = 100, py::arg("seed") = 0);

  m.def(
      "run_phase_transition",
      [](const std::string& config_json) {
        const PhaseDiagram d = run_phase_transition(config_from_json(nlohmann::json::parse(config_json)));
        return diagram_to_json(d).dump();
      },
      py::arg("config_json"), "Runs an experiment from a JSON config string; returns the diagram as JSON text.");
  m.def(
      "find_m50",
      [](int n, int k, int d, int trials, std::uint64_t seed, int workers) {
        ExperimentConfig cfg;
        cfg.trials_per_cell = trials;
        cfg.master_seed = seed;
        cfg.workers = workers;
        const M50Result r = find_m50(n, k, d, cfg);
        return py::make_tuple(r.m50, r.success_rate);
      },
      py::arg("n"), py::arg("k"), py::arg("d") = 1, py::arg("trials") = 20, py::arg("seed") = 0,
      py::arg("workers") = 1);
}
