#include "povmshadow/shadows.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace povmshadow {

namespace {

/// Liouville 4-vector of an outcome projector |psi_l><psi_l|.
Eigen::Vector4d projector_liouville(const Eigen::Vector2cd& psi) {
  const Eigen::Matrix2cd proj = psi * psi.adjoint();
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector4d v;
  v[0] = s * proj.trace().real();
  v[1] = s * (proj(0, 1) + proj(1, 0)).real();
  v[2] = s * (cplx(0, 1) * (proj(0, 1) - proj(1, 0))).real();
  v[3] = s * (proj(0, 0) - proj(1, 1)).real();
  return v;
}

void require_shadow_setting(const std::string& kind) {
  if (kind != "octa" && kind != "sic" && kind != "pauli_x" && kind != "pauli_y" &&
      kind != "pauli_z")
    throw domain_error("snapshot: setting kind '" + kind + "' is not shadow-compatible");
}

RealVector kron_real(const RealVector& a, const RealVector& b) {
  RealVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

double sample_std_error(const std::vector<double>& values, double mean) {
  const auto m = static_cast<double>(values.size());
  if (m < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
}

}  // namespace

RealVector Snapshot::to_full_liouville() const {
  if (!is_product()) return liouville;
  RealVector out = RealVector::Ones(1);
  for (const auto& f : factors) out = kron_real(out, to_liouville(f));
  return out;
}

Snapshot snapshot_ideal(const ShotRecord& shot) {
  Snapshot snap;
  snap.origin_shot = shot.run_index;
  snap.factors.reserve(shot.settings.size());
  for (size_t q = 0; q < shot.settings.size(); ++q) {
    require_shadow_setting(shot.settings[q]);
    const PovmSpec& povm = povm_by_kind(shot.settings[q]);
    const Eigen::Vector2cd& psi = povm.vectors[shot.outcomes[q]];
    snap.factors.push_back(invert_ideal_channel(psi * psi.adjoint()));
  }
  return snap;
}

Eigen::Matrix2cd invert_ideal_channel(const Eigen::Matrix2cd& x) {
  return 3.0 * x - x.trace() * Eigen::Matrix2cd::Identity();
}

Eigen::Matrix2cd forward_ideal_channel(const Eigen::Matrix2cd& x) {
  return (x + x.trace() * Eigen::Matrix2cd::Identity()) / 3.0;
}

Snapshot snapshot_calibrated(const ShotRecord& shot, const CalibrationResult& calib) {
  const int n = static_cast<int>(shot.settings.size());
  if (calib.n_qubits != n) throw domain_error("snapshot_calibrated: qubit count mismatch");
  for (Eigen::Index l = 0; l < calib.coefficients.size(); ++l)
    if (std::abs(calib.coefficients[l]) < 1e-6)
      throw domain_error("snapshot_calibrated: near-zero calibration coefficient (singular)");

  RealVector outcome_vec = RealVector::Ones(1);
  for (int q = 0; q < n; ++q) {
    require_shadow_setting(shot.settings[q]);
    const PovmSpec& povm = povm_by_kind(shot.settings[q]);
    outcome_vec = kron_real(outcome_vec, projector_liouville(povm.vectors[shot.outcomes[q]]));
  }
  // scale each Pauli component by 1/f_lambda; lambda_q = 1 iff the q-th
  // base-4 digit is nonzero
  for (Eigen::Index j = 0; j < outcome_vec.size(); ++j) {
    std::uint32_t lambda = 0;
    for (int q = 0; q < n; ++q)
      if ((j >> (2 * (n - 1 - q))) & 3) lambda |= 1u << (n - 1 - q);
    outcome_vec[j] /= calib.coefficients[lambda];
  }
  Snapshot snap;
  snap.origin_shot = shot.run_index;
  snap.liouville = std::move(outcome_vec);
  return snap;
}

ShadowSet::ShadowSet(const RecordSet& records, const std::optional<CalibrationResult>& calib) {
  if (records.shots.empty()) throw domain_error("ShadowSet: empty record set");
  n_qubits_ = records.n_qubits;
  // Pauli-axis settings realize the octahedron ensemble only when the axis is
  // drawn uniformly per shot; insist the records were produced that way.
  for (size_t q = 0; q < records.policy.per_qubit.size(); ++q) {
    const std::string& p = records.policy.per_qubit[q];
    if (p.rfind("pauli_", 0) == 0)
      throw domain_error("ShadowSet: fixed Pauli-axis policy is not a 2-design; use random_pauli");
  }
  vectors_.reserve(records.shots.size());
  sum_ = RealVector::Zero(Eigen::Index{1} << (2 * n_qubits_));
  for (const auto& shot : records.shots) {
    Snapshot snap = calib ? snapshot_calibrated(shot, *calib) : snapshot_ideal(shot);
    RealVector v = snap.to_full_liouville();
    sum_ += v;
    sum_sq_norms_ += v.squaredNorm();
    vectors_.push_back(std::move(v));
  }
}

HermitianOperator ShadowSet::mean_shadow() const {
  return HermitianOperator(from_liouville(sum_ / static_cast<double>(size())));
}

EstimateReport estimate_observable(const RecordSet& records, const HermitianOperator& o,
                                   const std::optional<CalibrationResult>& calib) {
  return estimate_observable(ShadowSet(records, calib), o);
}

EstimateReport estimate_observable(const ShadowSet& shadows, const HermitianOperator& o,
                                   const std::string& descriptor) {
  const RealVector ovec = to_liouville(o.entries);
  if (ovec.size() != shadows.vector_sum().size())
    throw domain_error("estimate_observable: observable dimension mismatch");
  std::vector<double> values;
  values.reserve(static_cast<size_t>(shadows.size()));
  for (std::int64_t m = 0; m < shadows.size(); ++m)
    values.push_back(ovec.dot(shadows.shot_vector(m)));
  EstimateReport rep;
  rep.m = shadows.size();
  rep.observable_descriptor = descriptor;
  rep.mean = ovec.dot(shadows.vector_sum()) / static_cast<double>(shadows.size());
  rep.std_error = sample_std_error(values, rep.mean);
  return rep;
}

EstimateReport estimate_purity(const RecordSet& records,
                               const std::optional<CalibrationResult>& calib) {
  return estimate_purity(ShadowSet(records, calib));
}

EstimateReport estimate_purity(const ShadowSet& shadows) {
  const double m = static_cast<double>(shadows.size());
  if (m < 2) throw domain_error("estimate_purity: need at least 2 shots");
  const RealVector& s = shadows.vector_sum();
  const double pair_sum = (s.squaredNorm() - shadows.sum_squared_norms()) / 2.0;
  EstimateReport rep;
  rep.m = shadows.size();
  rep.observable_descriptor = "purity";
  rep.mean = 2.0 * pair_sum / (m * (m - 1.0));
  // Hajek projection: h_m = mean over pairs containing shot m; the
  // U-statistic variance is asymptotically 4 Var(h)/M
  std::vector<double> h;
  h.reserve(static_cast<size_t>(shadows.size()));
  for (std::int64_t i = 0; i < shadows.size(); ++i) {
    const RealVector& v = shadows.shot_vector(i);
    h.push_back((s.dot(v) - v.squaredNorm()) / (m - 1.0));
  }
  double hbar = 0.0;
  for (double x : h) hbar += x;
  hbar /= m;
  rep.std_error = 2.0 * sample_std_error(h, hbar);
  return rep;
}

double empirical_variance(const RecordSet& records, const HermitianOperator& o,
                          const std::optional<CalibrationResult>& calib) {
  return empirical_variance(ShadowSet(records, calib), o);
}

double empirical_variance(const ShadowSet& shadows, const HermitianOperator& o) {
  if (shadows.size() < 2) throw domain_error("empirical_variance: need at least 2 shots");
  const RealVector ovec = to_liouville(o.entries);
  const double m = static_cast<double>(shadows.size());
  const double mean = ovec.dot(shadows.vector_sum()) / m;
  double ss = 0.0;
  for (std::int64_t i = 0; i < shadows.size(); ++i) {
    const double v = ovec.dot(shadows.shot_vector(i)) - mean;
    ss += v * v;
  }
  return ss / m;
}

double variance_analytic(const DensityMatrix& rho, const HermitianOperator& o, const PovmSpec& povm) {
  if (rho.dim() != 2 || o.dim() != 2) throw domain_error("variance_analytic: single-qubit only");
  double second = 0.0;
  for (size_t l = 0; l < povm.effects.size(); ++l) {
    const Eigen::Vector2cd& psi = povm.vectors[l];
    const Eigen::Matrix2cd shadow = invert_ideal_channel(psi * psi.adjoint());
    const double o_val = (shadow * o.entries).trace().real();
    const double p = (povm.effects[l] * rho.entries).trace().real();
    second += o_val * o_val * p;
  }
  const double mean = (rho.entries * o.entries).trace().real();
  return second - mean * mean;
}

double shadow_norm_theoretical(const HermitianOperator& o, const PovmSpec& povm) {
  if (o.dim() != 2) throw domain_error("shadow_norm_theoretical: single-qubit only");
  Eigen::Matrix2cd op = Eigen::Matrix2cd::Zero();
  for (size_t l = 0; l < povm.effects.size(); ++l) {
    const Eigen::Vector2cd& psi = povm.vectors[l];
    const Eigen::Matrix2cd shadow = invert_ideal_channel(psi * psi.adjoint());
    const double o_val = (shadow * o.entries).trace().real();
    op += o_val * o_val * povm.effects[l];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(op, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double shadow_norm_empirical(const std::vector<DensityMatrix>& states, const HermitianOperator& o,
                             const PovmSpec& povm, std::int64_t m, std::uint64_t seed) {
  if (states.empty()) throw domain_error("shadow_norm_empirical: empty state set");
  double max_var = 0.0;
  for (size_t s = 0; s < states.size(); ++s) {
    const MeasurementPolicy policy = MeasurementPolicy::uniform(povm.kind, states[s].n_qubits);
    const std::uint64_t sub_seed = Rng::keyed(seed, s).next();
    const RecordSet records = sample_shots(states[s], policy, m, sub_seed);
    max_var = std::max(max_var, empirical_variance(records, o));
  }
  return max_var;
}

}  // namespace povmshadow
