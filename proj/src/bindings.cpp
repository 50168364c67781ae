#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "povmshadow/harness.hpp"
#include "povmshadow/metadesign.hpp"

namespace py = pybind11;
using namespace povmshadow;

PYBIND11_MODULE(_core, m) {
  m.doc() = "POVM classical-shadow tomography core";

  py::register_exception<domain_error>(m, "DomainError");

  py::class_<DensityMatrix>(m, "DensityMatrix")
      .def(py::init<Matrix, int>(), py::arg("entries"), py::arg("n_qubits"))
      .def_readonly("entries", &DensityMatrix::entries)
      .def_readonly("n_qubits", &DensityMatrix::n_qubits);

  py::class_<PureState>(m, "PureState")
      .def(py::init<Vector, int>(), py::arg("amplitudes"), py::arg("n_qubits"))
      .def_readonly("amplitudes", &PureState::amplitudes)
      .def_readonly("n_qubits", &PureState::n_qubits);

  py::class_<HermitianOperator>(m, "HermitianOperator")
      .def(py::init<Matrix>(), py::arg("entries"))
      .def_readonly("entries", &HermitianOperator::entries);

  py::class_<EstimateReport>(m, "EstimateReport")
      .def_readonly("mean", &EstimateReport::mean)
      .def_readonly("std_error", &EstimateReport::std_error)
      .def_readonly("m", &EstimateReport::m);

  py::class_<RecordSet>(m, "RecordSet")
      .def_readonly("n_qubits", &RecordSet::n_qubits)
      .def_readonly("master_seed", &RecordSet::master_seed)
      .def("size", &RecordSet::size);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("n_qubits", &CalibrationResult::n_qubits)
      .def_readonly("coefficients", &CalibrationResult::coefficients)
      .def_readonly("std_errors", &CalibrationResult::std_errors)
      .def_readonly("m_prime", &CalibrationResult::m_prime)
      .def_static("ideal", &CalibrationResult::ideal, py::arg("n_qubits"));

  py::class_<SpsaConfig>(m, "SpsaConfig")
      .def(py::init<>())
      .def_readwrite("a1", &SpsaConfig::a1)
      .def_readwrite("a2", &SpsaConfig::a2)
      .def_readwrite("a3", &SpsaConfig::a3)
      .def_readwrite("b1", &SpsaConfig::b1)
      .def_readwrite("b2", &SpsaConfig::b2)
      .def_readwrite("k_max", &SpsaConfig::k_max)
      .def_readwrite("seed", &SpsaConfig::seed);

  py::class_<ReconstructionTrace>(m, "ReconstructionTrace")
      .def_readonly("final_state", &ReconstructionTrace::final_state)
      .def_readonly("wall_runs_consumed", &ReconstructionTrace::wall_runs_consumed)
      .def("costs", [](const ReconstructionTrace& t) {
        std::vector<double> costs;
        for (const auto& p : t.trace) costs.push_back(p.cost);
        return costs;
      });

  m.def("state_from_descriptor", &state_from_descriptor, py::arg("descriptor"));
  m.def("observable_from_descriptor", &observable_from_descriptor, py::arg("descriptor"));
  m.def("make_pure_state", &make_pure_state, py::arg("gamma"), py::arg("phi"));
  m.def("make_two_photon_state", &make_two_photon_state, py::arg("eta"));
  m.def("density", &density, py::arg("psi"));
  m.def("fidelity", &fidelity, py::arg("a"), py::arg("b"));

  m.def(
      "sample_shots",
      [](const DensityMatrix& state, const std::string& povm, std::int64_t m,
         std::uint64_t seed) {
        return sample_shots(state, MeasurementPolicy::uniform(povm, state.n_qubits), m, seed);
      },
      py::arg("state"), py::arg("povm"), py::arg("m"), py::arg("seed"));
  m.def("save_records", &save_records, py::arg("path"), py::arg("records"));
  m.def("load_records", &load_records, py::arg("path"));

  m.def(
      "estimate_observable",
      [](const RecordSet& records, const HermitianOperator& o,
         const std::optional<CalibrationResult>& calib) {
        return estimate_observable(records, o, calib);
      },
      py::arg("records"), py::arg("observable"), py::arg("calibration") = std::nullopt);
  m.def(
      "estimate_purity",
      [](const RecordSet& records, const std::optional<CalibrationResult>& calib) {
        return estimate_purity(records, calib);
      },
      py::arg("records"), py::arg("calibration") = std::nullopt);

  m.def("run_calibration", &run_calibration, py::arg("records"));

  m.def(
      "slst",
      [](const RecordSet& records, const SpsaConfig& cfg,
         const std::optional<CalibrationResult>& calib,
         const std::optional<DensityMatrix>& reference) {
        return slst(records, cfg, calib, std::nullopt, reference);
      },
      py::arg("records"), py::arg("config"), py::arg("calibration") = std::nullopt,
      py::arg("reference") = std::nullopt);
  m.def("mle", &mle, py::arg("records"), py::arg("k_max") = 20000);

  m.def("preset_single_qubit", &preset_single_qubit);
  m.def("preset_two_qubit", &preset_two_qubit);
  m.def("preset_robust", &preset_robust);

  m.def("lens_phase", &lens_phase, py::arg("x_um"), py::arg("y_um"), py::arg("focus_x_um"),
        py::arg("focus_y_um"), py::arg("focal_length_um"), py::arg("wavelength_um"));
  m.def("pillar_unitary", &pillar_unitary, py::arg("theta"), py::arg("phi_x"), py::arg("phi_y"));
  m.def("circular_design", &circular_design, py::arg("phi_plus"), py::arg("phi_minus"));
  m.def(
      "stokes_from_intensities",
      [](const std::array<double, 6>& i) {
        const StokesVector s = stokes_from_intensities(i);
        return std::array<double, 3>{s.s1, s.s2, s.s3};
      },
      py::arg("intensities"));
}
