#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "povmshadow/calibrate_types.hpp"
#include "povmshadow/measure.hpp"

namespace povmshadow {

/// Product over qubits with lambda_n = 1 of <psi_l|Z|psi_l>: +1 for outcome
/// H, -1 for V, 0 for the equatorial outcomes. Empty product is 1.
double calibration_single_shot(const ShotRecord& shot, std::uint32_t lambda);

/// Mean of calibration_single_shot over octahedron shots on |0...0>, for all
/// 2^N subspace labels.
CalibrationResult run_calibration(const RecordSet& records);

/// Per-qubit diagonal matrix representation of the inverse channel
/// sum_lambda f_lambda^{-1} Pi_lambda (full 4^N diagonal).
RealVector noisy_inverse_diagonal(const CalibrationResult& calib);

// Text serialization: header with M' and seed, then `lambda_bits, f, stderr`
// lines.
void write_calibration(std::ostream& out, const CalibrationResult& calib, std::uint64_t seed);
CalibrationResult read_calibration(std::istream& in);
void save_calibration(const std::string& path, const CalibrationResult& calib, std::uint64_t seed);
CalibrationResult load_calibration(const std::string& path);

}  // namespace povmshadow
