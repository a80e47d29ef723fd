#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qpdyn/config.hpp"
#include "qpdyn/dynamics.hpp"
#include "qpdyn/errors.hpp"
#include "qpdyn/experiment.hpp"
#include "qpdyn/field_io.hpp"
#include "qpdyn/montecarlo.hpp"
#include "qpdyn/observables.hpp"
#include "qpdyn/transforms.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace qpdyn;

namespace {

py::array_t<Complex> wavefn_values(const WaveFn& f) {
  py::array_t<Complex> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(f.values.size())});
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

py::array_t<Complex> phase_values(const PhaseField& f) {
  py::array_t<Complex> out({static_cast<py::ssize_t>(f.grid.q_axis.n),
                            static_cast<py::ssize_t>(f.grid.p_axis.n)});
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

py::array_t<double> real_values(const RealField& f) {
  py::array_t<double> out({static_cast<py::ssize_t>(f.grid.q_axis.n),
                           static_cast<py::ssize_t>(f.grid.p_axis.n)});
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

WaveFn wavefn_from_array(const Grid1D& grid, py::array_t<Complex, py::array::c_style> values) {
  if (values.ndim() != 1 || static_cast<std::size_t>(values.shape(0)) != grid.n)
    throw InvalidInput("values must be a 1-D array matching the grid");
  WaveFn f = make_wavefn(grid);
  std::copy(values.data(), values.data() + grid.n, f.values.begin());
  return f;
}

PhaseField phase_from_array(const PhaseGrid& pg,
                            py::array_t<Complex, py::array::c_style> values) {
  if (values.ndim() != 2 || static_cast<std::size_t>(values.shape(0)) != pg.q_axis.n ||
      static_cast<std::size_t>(values.shape(1)) != pg.p_axis.n)
    throw InvalidInput("values must be a (n_q, n_p) array matching the grid");
  PhaseField f = make_phase_field(pg);
  std::copy(values.data(), values.data() + pg.size(), f.values.begin());
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "phase-space quantum dynamics engine";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  py::enum_<AxisKind>(m, "AxisKind")
      .value("position", AxisKind::position)
      .value("momentum", AxisKind::momentum);

  py::class_<Grid1D>(m, "Grid1D")
      .def_readonly("n", &Grid1D::n)
      .def_readonly("origin", &Grid1D::origin)
      .def_readonly("step", &Grid1D::step)
      .def_readonly("axis_kind", &Grid1D::axis_kind)
      .def("samples",
           [](const Grid1D& g) {
             py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(g.n)});
             for (std::size_t j = 0; j < g.n; ++j) out.mutable_data()[j] = g.sample(j);
             return out;
           })
      .def("__repr__", [](const Grid1D& g) {
        return "Grid1D(n=" + std::to_string(g.n) + ", origin=" + format_double(g.origin) +
               ", step=" + format_double(g.step) + ")";
      });

  py::class_<PhaseGrid>(m, "PhaseGrid")
      .def_readonly("q_axis", &PhaseGrid::q_axis)
      .def_readonly("p_axis", &PhaseGrid::p_axis);

  py::class_<WaveFn>(m, "WaveFn")
      .def_property_readonly("grid", [](const WaveFn& f) { return f.grid; })
      .def_property_readonly("values", &wavefn_values)
      .def_property_readonly("space", &WaveFn::space);

  py::class_<PhaseField>(m, "PhaseField")
      .def_property_readonly("grid", [](const PhaseField& f) { return f.grid; })
      .def_property_readonly("values", &phase_values);

  py::class_<RealField>(m, "RealField")
      .def_property_readonly("grid", [](const RealField& f) { return f.grid; })
      .def_property_readonly("values", &real_values);

  m.def("make_position_grid", &make_position_grid, "n"_a, "q_min"_a, "q_max"_a);
  m.def("conjugate_momentum_grid", &conjugate_momentum_grid, "q"_a);
  m.def("make_phase_grid", &make_phase_grid, "q"_a);
  m.def("wavefn_from_array", &wavefn_from_array, "grid"_a, "values"_a);
  m.def("phase_field_from_array", &phase_from_array, "grid"_a, "values"_a);
  m.def("quadrature_norm", py::overload_cast<const WaveFn&>(&quadrature_norm), "psi"_a);

  py::class_<BoundaryDiagnostic>(m, "BoundaryDiagnostic")
      .def_readonly("left_amp", &BoundaryDiagnostic::left_amp)
      .def_readonly("right_amp", &BoundaryDiagnostic::right_amp)
      .def_readonly("truncated", &BoundaryDiagnostic::truncated);

  m.def(
      "coherent_state",
      [](const Grid1D& grid, double q0, double p0) {
        BoundaryDiagnostic diag;
        WaveFn psi = coherent_state(grid, CoherentStateSpec{q0, p0}, &diag);
        return py::make_tuple(psi, diag);
      },
      "grid"_a, "q0"_a, "p0"_a, "returns (state, boundary_diagnostic)");

  m.def(
      "superpose",
      [](const std::vector<std::pair<Complex, WaveFn>>& terms) {
        const Superposition s = superpose(terms);
        return py::make_tuple(s.psi, s.normalization);
      },
      "terms"_a, "returns (state, normalization_constant)");

  py::class_<PotentialSpec>(m, "PotentialSpec")
      .def_static("morse", &PotentialSpec::morse, "v0"_a, "depth"_a, "a"_a, "q_eq"_a)
      .def_static("harmonic", &PotentialSpec::harmonic, "m"_a, "omega"_a)
      .def_static("free_particle", &PotentialSpec::free_particle)
      .def("evaluate", &PotentialSpec::evaluate, "q"_a);

  py::class_<KineticSpec>(m, "KineticSpec")
      .def_static("non_relativistic", &KineticSpec::non_relativistic, "m"_a)
      .def_static("relativistic", &KineticSpec::relativistic, "m0"_a, "c"_a)
      .def("evaluate", &KineticSpec::evaluate, "p"_a)
      .def_property_readonly("rest_energy", &KineticSpec::rest_energy);

  py::enum_<Impl>(m, "Impl").value("reference", Impl::reference).value("fast", Impl::fast);

  m.def("psi_to_qp", &psi_to_qp, "psi"_a, "pg"_a, "impl"_a = Impl::fast);
  m.def("psi_p_to_qp", &psi_p_to_qp, "psi_p"_a, "pg"_a, "impl"_a = Impl::fast);
  m.def("qp_to_psi_q", &qp_to_psi_q, "qp"_a);
  m.def("qp_to_psi_p", &qp_to_psi_p, "qp"_a);
  m.def("psi_to_kirkwood", &psi_to_kirkwood, "psi"_a, "pg"_a, "impl"_a = Impl::fast);
  m.def("qp_to_kirkwood", &qp_to_kirkwood, "qp"_a, "impl"_a = Impl::fast);
  m.def("psi_to_wigner", &psi_to_wigner, "psi"_a, "pg"_a, "impl"_a = Impl::fast);
  m.def("qp_to_wigner_1d", &qp_to_wigner_1d, "qp"_a, "impl"_a = Impl::fast);
  m.def("phase_identity", &phase_identity, "qp"_a, "impl"_a = Impl::fast);
  m.def("gabor_no_phase", &gabor_no_phase, "psi"_a, "pg"_a, "impl"_a = Impl::fast);

  py::class_<ObservableSpec>(m, "ObservableSpec")
      .def_static("identity", &ObservableSpec::identity, "q_axis"_a)
      .def_static("position", &ObservableSpec::position, "q_axis"_a)
      .def_static("momentum", &ObservableSpec::momentum, "p_axis"_a)
      .def_static("potential", &ObservableSpec::potential, "q_axis"_a, "v"_a)
      .def_static("kinetic", &ObservableSpec::kinetic, "p_axis"_a, "t"_a)
      .def_static("hamiltonian", &ObservableSpec::hamiltonian, "pg"_a, "t"_a, "v"_a)
      .def_static(
          "position_fn",
          [](const Grid1D& q_axis, const std::function<double(double)>& f) {
            return ObservableSpec::position_fn(q_axis, f);
          },
          "q_axis"_a, "f"_a)
      .def_static(
          "momentum_fn",
          [](const Grid1D& p_axis, const std::function<double(double)>& g) {
            return ObservableSpec::momentum_fn(p_axis, g);
          },
          "p_axis"_a, "g"_a);

  m.def("husimi", &husimi, "qp"_a);
  m.def("trace_norm", &trace_norm, "qp"_a);
  m.def("expectation_direct", &expectation_direct, "qp"_a, "obs"_a);
  m.def("expectation_reduced", &expectation_reduced, "qp"_a, "obs"_a);

  py::enum_<RhsKind>(m, "RhsKind")
      .value("phase_direct", RhsKind::phase_direct)
      .value("phase_factorized", RhsKind::phase_factorized)
      .value("schrodinger_reference", RhsKind::schrodinger_reference);

  py::class_<PropagatorConfig>(m, "PropagatorConfig")
      .def(py::init<>())
      .def_readwrite("t0", &PropagatorConfig::t0)
      .def_readwrite("t1", &PropagatorConfig::t1)
      .def_readwrite("rtol", &PropagatorConfig::rtol)
      .def_readwrite("atol", &PropagatorConfig::atol)
      .def_readwrite("dt_init", &PropagatorConfig::dt_init)
      .def_readwrite("safety", &PropagatorConfig::safety)
      .def_readwrite("dt_min", &PropagatorConfig::dt_min)
      .def_readwrite("dt_max", &PropagatorConfig::dt_max)
      .def_readwrite("snapshot_stride", &PropagatorConfig::snapshot_stride)
      .def_readwrite("kinetic", &PropagatorConfig::kinetic)
      .def_readwrite("potential", &PropagatorConfig::potential)
      .def_readwrite("rhs_kind", &PropagatorConfig::rhs_kind);

  py::class_<StepStats>(m, "StepStats")
      .def_readonly("accepted", &StepStats::accepted)
      .def_readonly("rejected", &StepStats::rejected)
      .def_readonly("rhs_evals", &StepStats::rhs_evals)
      .def_readonly("final_dt", &StepStats::final_dt);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("times", &TrajectoryRecord::times)
      .def_readonly("stats", &TrajectoryRecord::stats)
      .def_readonly("rest_energy_rate", &TrajectoryRecord::rest_energy_rate)
      .def("wavefn_snapshot", &wavefn_snapshot, "i"_a, "grid"_a)
      .def("phase_snapshot", &phase_snapshot, "i"_a, "grid"_a)
      .def("__len__", [](const TrajectoryRecord& r) { return r.times.size(); });

  py::enum_<DirectEval>(m, "DirectEval")
      .value("contracted", DirectEval::contracted)
      .value("literal", DirectEval::literal);

  m.def("rhs_schrodinger", &rhs_schrodinger, "psi"_a, "cfg"_a);
  m.def("rhs_phase_direct", &rhs_phase_direct, "qp"_a, "cfg"_a,
        "eval"_a = DirectEval::contracted);
  m.def("rhs_phase_factorized", &rhs_phase_factorized, "qp"_a, "cfg"_a);

  m.def("propagate_wavefn",
        py::overload_cast<const WaveFn&, const PropagatorConfig&>(&propagate), "psi0"_a,
        "cfg"_a, py::call_guard<py::gil_scoped_release>());
  m.def("propagate_phase",
        py::overload_cast<const PhaseField&, const PropagatorConfig&>(&propagate), "qp0"_a,
        "cfg"_a, py::call_guard<py::gil_scoped_release>());

  py::class_<McConfig>(m, "McConfig")
      .def(py::init<>())
      .def_readwrite("sample_count", &McConfig::sample_count)
      .def_readwrite("seed", &McConfig::seed)
      .def_readwrite("batch", &McConfig::batch);

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("value", &McEstimate::value)
      .def_readonly("stderror", &McEstimate::stderror)
      .def_readonly("sample_count", &McEstimate::sample_count)
      .def_readonly("seed", &McEstimate::seed);

  m.def("mc_identity_estimate", &mc_identity_estimate, "qp"_a, "q"_a, "p"_a, "cfg"_a);
  m.def("mc_expectation_estimate", &mc_expectation_estimate, "qp"_a, "obs"_a, "cfg"_a);

  m.def("read_field", &read_field, "path"_a);
  m.def(
      "write_field",
      [](const py::object& field, const std::string& path) {
        if (py::isinstance<WaveFn>(field))
          write_field(field.cast<const WaveFn&>(), path);
        else if (py::isinstance<PhaseField>(field))
          write_field(field.cast<const PhaseField&>(), path);
        else if (py::isinstance<RealField>(field))
          write_field(field.cast<const RealField&>(), path);
        else
          throw InvalidInput("write_field: expected WaveFn, PhaseField or RealField");
      },
      "field"_a, "path"_a);
}
