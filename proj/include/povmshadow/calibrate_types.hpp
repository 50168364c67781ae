#pragma once

#include <cstdint>
#include <vector>

#include "povmshadow/types.hpp"

namespace povmshadow {

/// Subspace coefficients f_lambda of a (possibly noisy) measurement channel,
/// indexed by the bit vector lambda in {0,1}^N packed as an integer with the
/// leftmost qubit as the most significant bit.
struct CalibrationResult {
  int n_qubits = 1;
  RealVector coefficients;  // length 2^N
  RealVector std_errors;    // length 2^N
  std::int64_t m_prime = 0;

  /// Noiseless coefficients f_lambda = 3^{-|lambda|}.
  static CalibrationResult ideal(int n_qubits);

  double coefficient(std::uint32_t lambda) const { return coefficients[lambda]; }
};

}  // namespace povmshadow
