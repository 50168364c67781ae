#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "povmshadow/qcore.hpp"
#include "povmshadow/rng.hpp"

namespace povmshadow {

/// Single-qubit POVM with rank-1 effects. Effect sum and positivity are
/// asserted at construction.
struct PovmSpec {
  std::vector<Eigen::Matrix2cd> effects;
  std::vector<Eigen::Vector2cd> vectors;
  std::vector<std::string> labels;
  std::string kind;

  PovmSpec(std::vector<Eigen::Matrix2cd> e, std::vector<Eigen::Vector2cd> v,
           std::vector<std::string> l, std::string k);

  int n_outcomes() const { return static_cast<int>(effects.size()); }
};

/// {1/3 |psi><psi|} over H, V, +, -, R, L (in this label order).
const PovmSpec& octahedron_povm();

/// {1/2 |psi><psi|} over the four tetrahedron states.
const PovmSpec& sic_povm();

/// Two projectors onto the +1/-1 eigenstates of the chosen Pauli.
const PovmSpec& pauli_povm(char axis);  // 'x', 'y' or 'z'

/// Lookup by kind string: "octa", "sic", "pauli_x", "pauli_y", "pauli_z".
const PovmSpec& povm_by_kind(const std::string& kind);

double check_two_design(const PovmSpec& povm);

// --- noise ---

struct NoiseModel {
  enum class Kind { none, pauli_fixed, pauli_resampled, kraus_list };

  Kind kind = Kind::none;
  Eigen::Vector3d delta_bar = Eigen::Vector3d::Zero();
  double sigma = 0.0;
  std::vector<Eigen::Matrix2cd> kraus;  // single-qubit Kraus operators

  static NoiseModel none() { return {}; }
  static NoiseModel pauli_fixed(const Eigen::Vector3d& delta);
  static NoiseModel pauli_resampled(const Eigen::Vector3d& delta_bar, double sigma);
  static NoiseModel kraus_list(std::vector<Eigen::Matrix2cd> ops);  // checks sum K^dag K = 1
};

/// Apply the noise channel to every qubit of rho. Resampled Pauli weights
/// are drawn fresh (per qubit) from shot_rng and clamped to [0, 1].
DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseModel& model, Rng& shot_rng);

// --- measurement records ---

struct ShotRecord {
  std::int64_t run_index = 0;
  std::vector<int> outcomes;           // per-qubit effect index
  std::vector<std::string> settings;   // resolved per-qubit POVM kind
};

/// Per-qubit measurement assignment: each entry is a POVM kind or
/// "random_pauli" (uniform axis drawn per shot).
struct MeasurementPolicy {
  std::vector<std::string> per_qubit;

  static MeasurementPolicy uniform(const std::string& kind, int n_qubits) {
    return {std::vector<std::string>(n_qubits, kind)};
  }
};

struct RecordSet {
  std::vector<ShotRecord> shots;
  int n_qubits = 1;
  std::uint64_t master_seed = 0;
  std::string state_descriptor;
  MeasurementPolicy policy;

  std::int64_t size() const { return static_cast<std::int64_t>(shots.size()); }
};

/// Joint outcome probabilities Tr(rho E_{l_1} x ... x E_{l_N}), index with
/// the leftmost qubit slowest. Negative round-off is clamped to zero.
RealVector born_probabilities(const DensityMatrix& rho, const std::vector<const PovmSpec*>& settings);

/// M independent shots. Per shot: resolved settings (random Pauli axes drawn
/// uniformly), fresh noise resample, joint outcome from the Born rule. Shot i
/// depends only on (master_seed, i).
RecordSet sample_shots(const DensityMatrix& state, const MeasurementPolicy& policy, std::int64_t m,
                       std::uint64_t master_seed, const NoiseModel& noise = NoiseModel::none(),
                       const std::string& state_descriptor = "");

/// Shot sampler with a systematic outcome-probability bias: the joint
/// distribution is mixed with the uniform one, p' = (1-strength) p +
/// strength/L. Models a persistent measurement miscalibration.
RecordSet sample_shots_biased(const DensityMatrix& state, const MeasurementPolicy& policy,
                              std::int64_t m, std::uint64_t master_seed, double strength,
                              const std::string& state_descriptor = "");

// Line-oriented serialization: a JSON header line, then one JSON object per
// shot. Round-trips bit-exactly.
void write_records(std::ostream& out, const RecordSet& records);
RecordSet read_records(std::istream& in);
void save_records(const std::string& path, const RecordSet& records);
RecordSet load_records(const std::string& path);

}  // namespace povmshadow
