#pragma once

#include <functional>
#include <optional>

#include "povmshadow/shadows.hpp"

namespace povmshadow {

/// SPSA gain-sequence hyperparameters: A_k = a1/(k+a2)^a3, B_k = b1/k^b2,
/// with the iteration index starting at k = 1.
struct SpsaConfig {
  double a1 = 13.0;
  double a2 = 0.0;
  double a3 = 0.602;
  double b1 = 0.5;
  double b2 = 0.101;
  int k_max = 30;
  std::uint64_t seed = 0;

  void validate() const;

  double gain_a(int k) const { return a1 / std::pow(k + a2, a3); }
  double gain_b(int k) const { return b1 / std::pow(k, b2); }
};

/// Presets reproducing the published hyperparameter choices.
SpsaConfig preset_single_qubit();      // a1=13,   b1=0.5,  k=30
SpsaConfig preset_two_qubit();         // a1=8.5,  b1=1.4,  k=200
SpsaConfig preset_robust();            // a1=34.1, b1=5.7,  k=100
SpsaConfig preset_scaling(int n_qubits);           // random-tau0 gains
SpsaConfig preset_scaling_spectral(int n_qubits);  // spectral-tau0 gains

struct TracePoint {
  int k = 0;
  double cost = 0.0;
  double fidelity = -1.0;  // -1 when no reference state was supplied
};

struct ReconstructionTrace {
  std::vector<TracePoint> trace;
  DensityMatrix final_state;
  std::int64_t wall_runs_consumed = 0;
};

/// Unbiased squared-Frobenius-distance estimator:
/// Tr(tau^2) - (2/M) sum_m Tr(rho^(m) tau) [+ pairwise purity term].
double nf_cost(const DensityMatrix& tau, const ShadowSet& shadows, bool include_constant);

/// i.i.d. Bernoulli +/-1 perturbation vector for iteration k.
RealVector spsa_perturbation(int dim, int k, Rng& rng);

/// Two-evaluation symmetric-difference gradient estimate at r.
RealVector spsa_gradient(const std::function<double(const RealVector&)>& cost, const RealVector& r,
                         int k, const SpsaConfig& config, Rng& rng);

/// Spectral initialization: eigenvalues of the mean shadow replaced by their
/// absolute values, renormalized.
DensityMatrix init_tau0(const ShadowSet& shadows);

/// Self-learning shadow tomography: SPSA descent of nf_cost (constant term
/// excluded) over Cholesky parameters. Stops at k_max or when the relative
/// cost change stays below 1e-6 for 20 iterations.
ReconstructionTrace slst(const ShadowSet& shadows, const SpsaConfig& config,
                         const std::optional<DensityMatrix>& init = std::nullopt,
                         const std::optional<DensityMatrix>& reference = std::nullopt);
ReconstructionTrace slst(const RecordSet& records, const SpsaConfig& config,
                         const std::optional<CalibrationResult>& calib = std::nullopt,
                         const std::optional<DensityMatrix>& init = std::nullopt,
                         const std::optional<DensityMatrix>& reference = std::nullopt);

/// Estimates the probability of projecting the hidden state onto a probe,
/// from n_runs experimental runs (an exact oracle may ignore n_runs).
using ProjectionSampler = std::function<double(const PureState& probe, int n_runs, Rng& rng)>;

/// Finite-shot sampler backed by a simulated hidden state.
ProjectionSampler projection_sampler(const DensityMatrix& hidden);
/// Infinite-shot sampler returning exact probabilities.
ProjectionSampler exact_projection_sampler(const DensityMatrix& hidden);

/// Self-guided tomography: SPSA ascent of the projection probability over
/// pure-state parameters; 4 runs estimate the + perturbation and 3 the -.
ReconstructionTrace sgqt(const ProjectionSampler& sampler, int dim, const SpsaConfig& config,
                         int runs_per_iteration = 7,
                         const std::optional<DensityMatrix>& reference = std::nullopt);

/// Maximum-likelihood baseline: gradient ascent of the mean log-likelihood
/// over Cholesky parameters until the gradient norm drops below 1e-6.
DensityMatrix mle(const RecordSet& records, int k_max = 20000);

}  // namespace povmshadow
