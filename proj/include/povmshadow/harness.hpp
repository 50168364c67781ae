#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "povmshadow/calibrate.hpp"
#include "povmshadow/reconstruct.hpp"

namespace povmshadow {

/// Flat `key = value` configuration, order-preserving; `#` starts a comment.
/// Parse/serialize round-trips are idempotent.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config load(const std::string& path);
  void serialize(std::ostream& out) const;
  std::string canonical() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical serialization

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// State constructors addressed by descriptor string:
///   pure:<gamma>,<phi>       single-qubit pure state
///   two_photon:<eta>         sqrt(eta)|HV> + sqrt(1-eta)|VH>
///   zero:<N>                 |0...0>
///   mixed:<N>                maximally mixed
///   random_pure:<N>:<seed>   Haar-random pure state
///   random_mixed:<N>:<seed>  random full-rank mixed state
DensityMatrix state_from_descriptor(const std::string& descriptor);

/// Observables addressed by descriptor:
///   proj:<kappa>,<nu>        rank-1 projector |psi_{kappa,nu}><psi_{kappa,nu}|
///   pauli:<string>           tensor of I,X,Y,Z letters
HermitianOperator observable_from_descriptor(const std::string& descriptor);

/// n rank-1 projectors with Bloch vectors uniform on the sphere.
std::vector<HermitianOperator> observable_grid(int n, std::uint64_t seed);

/// n pure states: Fibonacci lattice (deterministic) or uniform random.
std::vector<PureState> state_grid(int n, bool lattice, std::uint64_t seed = 0);

/// SpsaConfig assembled from config keys (a1, a2, a3, b1, b2, k_max, seed),
/// defaults from the given preset.
SpsaConfig spsa_from_config(const Config& cfg, const SpsaConfig& preset);
NoiseModel noise_from_config(const Config& cfg);
MeasurementPolicy policy_from_config(const Config& cfg, int n_qubits);

// --- result rows; every row is attributable via (experiment_id, seed) ---

struct ResultRow {
  std::string experiment_id;
  std::string quantity;
  std::string observable_descriptor;
  std::int64_t m = 0;
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
};

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

// --- experiment drivers ---

/// Sweep M on a log grid; shadow-norm of O = |+><+| over the 20-state grid,
/// repeated with distinct sub-seeds. Rows: (M, mean, std over repetitions).
std::vector<ResultRow> run_variance_convergence(const Config& cfg);

/// 128 observables x {octahedron, SIC}: empirical max variance per
/// observable and POVM.
std::vector<ResultRow> run_norm_sweep(const Config& cfg);

/// SLST / SGQT (matched run budget) / MLE fidelity vs M over the state grid;
/// MLE optionally fed records with a measurement bias.
std::vector<ResultRow> run_fidelity_curves(const Config& cfg);

/// Plain-vs-robust SLST fidelity over a (delta_bar, sigma) noise grid.
std::vector<ResultRow> run_robust_comparison(const Config& cfg);

/// SLST infidelity vs M per qubit count.
std::vector<ResultRow> run_scaling_study(const Config& cfg);

/// Manifest recording config hash, start parameters and artifact version.
void write_manifest(const std::string& path, const Config& cfg);

/// Full CLI: subcommands sample, estimate, variance, norm-sweep, calibrate,
/// slst, sgqt, mle, metadesign, experiment. Returns the process exit code
/// (0 ok, 1 domain error, 2 usage error).
int cli_dispatch(int argc, const char* const* argv);

}  // namespace povmshadow
