#pragma once

#include <optional>
#include <string>
#include <vector>

#include "povmshadow/calibrate_types.hpp"
#include "povmshadow/measure.hpp"

namespace povmshadow {

/// One per-shot state estimate. Ideal-path snapshots are products of 2x2
/// factors; calibrated snapshots are stored as a full 4^N Liouville vector
/// (the noisy inverse need not factorize).
struct Snapshot {
  std::vector<Eigen::Matrix2cd> factors;  // ideal path, one per qubit
  RealVector liouville;                   // calibrated path, length 4^N
  std::int64_t origin_shot = 0;

  bool is_product() const { return !factors.empty(); }
  RealVector to_full_liouville() const;
};

struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t m = 0;
  std::string observable_descriptor;
};

/// Per qubit, 3|psi_l><psi_l| - 1 with |psi_l> the vector of the observed
/// effect. Pauli-axis settings are only valid under a uniform random-axis
/// policy; callers going through ShadowSet get that checked.
Snapshot snapshot_ideal(const ShotRecord& shot);

/// 3X - Tr(X) 1; inverse of the 2-design measurement channel
/// M(rho) = (rho + Tr(rho) 1)/3.
Eigen::Matrix2cd invert_ideal_channel(const Eigen::Matrix2cd& x);
Eigen::Matrix2cd forward_ideal_channel(const Eigen::Matrix2cd& x);

/// Liouville vector sum_lambda f_lambda^{-1} Pi_lambda |psi_l>>.
Snapshot snapshot_calibrated(const ShotRecord& shot, const CalibrationResult& calib);

/// Precomputed per-shot Liouville vectors plus the running sums that make
/// estimation and the SLST cost O(d^2) per evaluation.
class ShadowSet {
 public:
  ShadowSet(const RecordSet& records, const std::optional<CalibrationResult>& calib = std::nullopt);

  std::int64_t size() const { return static_cast<std::int64_t>(vectors_.size()); }
  int n_qubits() const { return n_qubits_; }

  const RealVector& shot_vector(std::int64_t m) const { return vectors_[static_cast<size_t>(m)]; }
  /// sum_m |rho_hat^(m)>> (length 4^N)
  const RealVector& vector_sum() const { return sum_; }
  /// sum_m <<rho_hat^(m)|rho_hat^(m)>>
  double sum_squared_norms() const { return sum_sq_norms_; }
  /// mean shadow as a Hermitian matrix
  HermitianOperator mean_shadow() const;

 private:
  std::vector<RealVector> vectors_;
  RealVector sum_;
  double sum_sq_norms_ = 0.0;
  int n_qubits_ = 0;
};

EstimateReport estimate_observable(const RecordSet& records, const HermitianOperator& o,
                                   const std::optional<CalibrationResult>& calib = std::nullopt);
EstimateReport estimate_observable(const ShadowSet& shadows, const HermitianOperator& o,
                                   const std::string& descriptor = "");

/// U-statistic (2/(M(M-1))) sum_{m<n} Tr(rho^(m) rho^(n)).
EstimateReport estimate_purity(const RecordSet& records,
                               const std::optional<CalibrationResult>& calib = std::nullopt);
EstimateReport estimate_purity(const ShadowSet& shadows);

/// (1/M) sum (o^(m) - mean)^2 -- divisor M, as distinct from the M-1 used in
/// EstimateReport.std_error.
double empirical_variance(const RecordSet& records, const HermitianOperator& o,
                          const std::optional<CalibrationResult>& calib = std::nullopt);
double empirical_variance(const ShadowSet& shadows, const HermitianOperator& o);

/// sum_l Tr(rho_hat_l O)^2 Tr(rho E_l) - Tr(rho O)^2, single qubit.
double variance_analytic(const DensityMatrix& rho, const HermitianOperator& o, const PovmSpec& povm);

/// lambda_max of sum_l Tr(rho_hat_l O)^2 E_l, single qubit.
double shadow_norm_theoretical(const HermitianOperator& o, const PovmSpec& povm);

/// Max empirical variance over a state set, M shots each (sub-seeded per state).
double shadow_norm_empirical(const std::vector<DensityMatrix>& states, const HermitianOperator& o,
                             const PovmSpec& povm, std::int64_t m, std::uint64_t seed);

}  // namespace povmshadow
