#include "povmshadow/reconstruct.hpp"

#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace povmshadow {

void SpsaConfig::validate() const {
  if (a1 <= 0.0 || b1 <= 0.0) throw domain_error("SpsaConfig: a1 and b1 must be positive");
  if (a3 <= 0.0 || a3 > 1.0 || b2 <= 0.0 || b2 > 1.0)
    throw domain_error("SpsaConfig: a3 and b2 must lie in (0, 1]");
  if (k_max < 1) throw domain_error("SpsaConfig: k_max must be >= 1");
}

SpsaConfig preset_single_qubit() { return {13.0, 0.0, 0.602, 0.5, 0.101, 30, 0}; }
SpsaConfig preset_two_qubit() { return {8.5, 0.0, 0.602, 1.4, 0.101, 200, 0}; }
SpsaConfig preset_robust() { return {34.1, 0.0, 0.602, 5.7, 0.101, 100, 0}; }

SpsaConfig preset_scaling(int n_qubits) {
  SpsaConfig c{20.0, 0.0, 0.602, 0.35, 0.101, 200, 0};
  if (n_qubits >= 4) { c.a1 = 15.0; c.b1 = 0.79; c.k_max = 1000; }
  else if (n_qubits == 3) { c.a1 = 17.0; c.b1 = 0.55; c.k_max = 500; }
  return c;
}

SpsaConfig preset_scaling_spectral(int n_qubits) {
  SpsaConfig c{4.3, 0.0, 0.602, 0.5, 0.101, 200, 0};
  if (n_qubits >= 4) { c.a1 = 16.4; c.b1 = 2.8; c.k_max = 1000; }
  else if (n_qubits == 3) { c.a1 = 6.2; c.b1 = 1.4; c.k_max = 500; }
  return c;
}

double nf_cost(const DensityMatrix& tau, const ShadowSet& shadows, bool include_constant) {
  const RealVector tvec = to_liouville(tau.entries);
  if (tvec.size() != shadows.vector_sum().size()) throw domain_error("nf_cost: dimension mismatch");
  const double m = static_cast<double>(shadows.size());
  double cost = tvec.squaredNorm() - (2.0 / m) * shadows.vector_sum().dot(tvec);
  if (include_constant) {
    if (shadows.size() < 2) throw domain_error("nf_cost: constant term needs M >= 2");
    const double pair_sum =
        (shadows.vector_sum().squaredNorm() - shadows.sum_squared_norms()) / 2.0;
    cost += 2.0 * pair_sum / (m * (m - 1.0));
  }
  return cost;
}

RealVector spsa_perturbation(int dim, int /*k*/, Rng& rng) {
  if (dim < 1) throw domain_error("spsa_perturbation: dim must be >= 1");
  RealVector delta(dim);
  for (int i = 0; i < dim; ++i) delta[i] = rng.sign();
  return delta;
}

RealVector spsa_gradient(const std::function<double(const RealVector&)>& cost, const RealVector& r,
                         int k, const SpsaConfig& config, Rng& rng) {
  const RealVector delta = spsa_perturbation(static_cast<int>(r.size()), k, rng);
  const double bk = config.gain_b(k);
  const double plus = cost(r + bk * delta);
  const double minus = cost(r - bk * delta);
  if (!std::isfinite(plus) || !std::isfinite(minus))
    throw domain_error("spsa_gradient: non-finite cost evaluation");
  return ((plus - minus) / (2.0 * bk)) * delta;
}

DensityMatrix init_tau0(const ShadowSet& shadows) {
  const HermitianOperator mean = shadows.mean_shadow();
  auto [evals, evecs] = eigen_hermitian(mean);
  const RealVector mags = evals.cwiseAbs();
  const double total = mags.sum();
  if (total <= 0.0) throw domain_error("init_tau0: zero mean shadow");
  Matrix tau = evecs * (mags / total).asDiagonal() * evecs.adjoint();
  tau = (tau + tau.adjoint()) / 2.0;
  return DensityMatrix(std::move(tau), shadows.n_qubits());
}

namespace {

bool plateaued(const std::vector<TracePoint>& trace, int window = 20, double tol = 1e-6) {
  const int n = static_cast<int>(trace.size());
  if (n < window + 1) return false;
  const double ref = trace[n - 1 - window].cost;
  for (int i = n - window; i < n; ++i)
    if (std::abs(trace[i].cost - ref) > tol * std::max(std::abs(ref), 1e-12)) return false;
  return true;
}

}  // namespace

ReconstructionTrace slst(const ShadowSet& shadows, const SpsaConfig& config,
                         const std::optional<DensityMatrix>& init,
                         const std::optional<DensityMatrix>& reference) {
  config.validate();
  const int d = 1 << shadows.n_qubits();
  const DensityMatrix tau0 = init ? *init : init_tau0(shadows);
  // The cost is invariant under rescaling of the Cholesky parameters, so the
  // parameter scale is a free knob that sets the effective SPSA step size.
  // 2.5 d (relative to the unit-trace factor) matches the gain presets.
  RealVector r = (2.5 * d) * cholesky_params(tau0);
  const auto cost = [&](const RealVector& params) {
    return nf_cost(cholesky_compose(params, d), shadows, false);
  };

  // The measurement budget is the recorded shot count, consumed up front.
  ReconstructionTrace out{{}, tau0, shadows.size()};
  for (int k = 1; k <= config.k_max; ++k) {
    Rng rng = Rng::keyed(config.seed, static_cast<std::uint64_t>(k), 0x51);
    const RealVector g = spsa_gradient(cost, r, k, config, rng);
    r -= config.gain_a(k) * g;  // descent: nf_cost is minimized
    const DensityMatrix tau = cholesky_compose(r, d);
    TracePoint pt{k, nf_cost(tau, shadows, false), -1.0};
    if (reference) pt.fidelity = fidelity(tau, *reference);
    out.trace.push_back(pt);
    out.final_state = tau;
    if (plateaued(out.trace)) break;
  }
  return out;
}

ReconstructionTrace slst(const RecordSet& records, const SpsaConfig& config,
                         const std::optional<CalibrationResult>& calib,
                         const std::optional<DensityMatrix>& init,
                         const std::optional<DensityMatrix>& reference) {
  return slst(ShadowSet(records, calib), config, init, reference);
}

ProjectionSampler projection_sampler(const DensityMatrix& hidden) {
  return [hidden](const PureState& probe, int n_runs, Rng& rng) {
    if (probe.amplitudes.size() != hidden.dim())
      throw domain_error("projection_sampler: probe dimension mismatch");
    const double p = std::clamp(
        (probe.amplitudes.adjoint() * hidden.entries * probe.amplitudes)(0).real(), 0.0, 1.0);
    int successes = 0;
    for (int i = 0; i < n_runs; ++i)
      if (rng.uniform() < p) ++successes;
    return static_cast<double>(successes) / n_runs;
  };
}

ProjectionSampler exact_projection_sampler(const DensityMatrix& hidden) {
  return [hidden](const PureState& probe, int /*n_runs*/, Rng&) {
    return std::clamp((probe.amplitudes.adjoint() * hidden.entries * probe.amplitudes)(0).real(),
                      0.0, 1.0);
  };
}

ReconstructionTrace sgqt(const ProjectionSampler& sampler, int dim, const SpsaConfig& config,
                         int runs_per_iteration, const std::optional<DensityMatrix>& reference) {
  config.validate();
  if (runs_per_iteration < 2) throw domain_error("sgqt: need at least 2 runs per iteration");
  const int n_params = 2 * dim - 1;
  const int plus_runs = (runs_per_iteration + 1) / 2;   // 4 of 7
  const int minus_runs = runs_per_iteration - plus_runs;  // 3 of 7

  Rng init_rng = Rng::keyed(config.seed, 0, 0x60);
  RealVector r(n_params);
  for (int i = 0; i < dim; ++i) r[i] = std::abs(init_rng.normal()) + 1e-3;
  for (int i = dim; i < n_params; ++i) r[i] = 2.0 * M_PI * init_rng.uniform();

  ReconstructionTrace out;
  out.wall_runs_consumed = 0;
  int n_qubits = 0;
  while ((1 << n_qubits) < dim) ++n_qubits;

  for (int k = 1; k <= config.k_max; ++k) {
    Rng rng = Rng::keyed(config.seed, static_cast<std::uint64_t>(k), 0x61);
    const RealVector delta = spsa_perturbation(n_params, k, rng);
    const double bk = config.gain_b(k);
    const double f_plus = sampler(pure_compose(r + bk * delta, dim), plus_runs, rng);
    const double f_minus = sampler(pure_compose(r - bk * delta, dim), minus_runs, rng);
    out.wall_runs_consumed += runs_per_iteration;
    const RealVector g = ((f_plus - f_minus) / (2.0 * bk)) * delta;
    r += config.gain_a(k) * g;  // ascent: projection probability is maximized

    const DensityMatrix tau = density(pure_compose(r, dim));
    TracePoint pt{k, 1.0 - 0.5 * (f_plus + f_minus), -1.0};
    if (reference) pt.fidelity = fidelity(tau, *reference);
    out.trace.push_back(pt);
    out.final_state = tau;
  }
  return out;
}

namespace {

struct OutcomeGroup {
  Matrix effect;
  double count = 0.0;
};

void require_information_complete(const RecordSet& records) {
  // Per qubit, the projectors of every setting kind seen in the records must
  // span the full single-qubit operator space.
  for (int q = 0; q < records.n_qubits; ++q) {
    std::map<std::string, bool> kinds;
    for (const auto& shot : records.shots) kinds[shot.settings[q]] = true;
    std::vector<RealVector> rows;
    for (const auto& [kind, _] : kinds) {
      const PovmSpec& povm = povm_by_kind(kind);
      for (const auto& v : povm.vectors) rows.push_back(to_liouville(Matrix(v * v.adjoint())));
    }
    Eigen::MatrixXd stacked(rows.size(), 4);
    for (size_t i = 0; i < rows.size(); ++i) stacked.row(i) = rows[i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    const int rank = (svd.singularValues().array() > 1e-9).count();
    if (rank < 4)
      throw domain_error("mle: settings are not information-complete on qubit " + std::to_string(q));
  }
}

}  // namespace

DensityMatrix mle(const RecordSet& records, int k_max) {
  if (records.shots.empty()) throw domain_error("mle: empty record set");
  require_information_complete(records);
  const int n = records.n_qubits;
  const int d = 1 << n;

  // group shots by (settings, outcome) and build the joint effects once
  std::map<std::string, OutcomeGroup> groups;
  for (const auto& shot : records.shots) {
    std::string key;
    for (int q = 0; q < n; ++q)
      key += shot.settings[q] + ":" + std::to_string(shot.outcomes[q]) + "|";
    auto it = groups.find(key);
    if (it == groups.end()) {
      Matrix effect = Matrix::Identity(1, 1);
      for (int q = 0; q < n; ++q)
        effect = kron(effect, povm_by_kind(shot.settings[q]).effects[shot.outcomes[q]]);
      it = groups.emplace(key, OutcomeGroup{std::move(effect), 0.0}).first;
    }
    it->second.count += 1.0;
  }
  const double m = static_cast<double>(records.size());

  const auto log_likelihood = [&](const Matrix& tau) {
    double ll = 0.0;
    for (const auto& [_, g] : groups) {
      const double p = (g.effect * tau).trace().real();
      if (p <= 0.0) return -std::numeric_limits<double>::infinity();
      ll += g.count * std::log(p);
    }
    return ll / m;
  };

  // gradient of the mean log-likelihood with respect to the Cholesky factor
  const auto gradient_t = [&](const Matrix& t) {
    const double norm = (t * t.adjoint()).trace().real();
    const Matrix tau = t * t.adjoint() / norm;
    Matrix g_tau = Matrix::Zero(d, d);
    for (const auto& [_, g] : groups) {
      const double p = (g.effect * tau).trace().real();
      g_tau += (g.count / m / std::max(p, 1e-300)) * g.effect;
    }
    const double trace_part = (g_tau * tau).trace().real();
    const Matrix h = (g_tau - trace_part * Matrix::Identity(d, d)) / norm;
    Matrix grad = 2.0 * (h * t);  // d f = 2 Re Tr(T^dag H dT)
    // keep only the lower triangle (T is lower triangular by construction)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) grad(i, j) = 0.0;
    for (int i = 0; i < d; ++i) grad(i, i) = cplx(grad(i, i).real(), 0.0);
    return grad;
  };

  Matrix t = Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d));
  double step = 0.5;
  double f = log_likelihood(t * t.adjoint() / (t * t.adjoint()).trace().real());
  for (int k = 0; k < k_max; ++k) {
    const Matrix grad = gradient_t(t);
    const double gnorm = grad.norm();
    if (gnorm < 1e-6) break;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      const Matrix cand = t + step * grad;
      const Matrix tt = cand * cand.adjoint();
      const double tr = tt.trace().real();
      if (tr > 0.0) {
        const double f_cand = log_likelihood(tt / tr);
        if (f_cand >= f + 1e-4 * step * gnorm * gnorm) {
          t = cand;
          f = f_cand;
          step = std::min(step * 1.5, 1e3);
          accepted = true;
          break;
        }
      }
      step /= 2.0;
    }
    if (!accepted) break;  // line search exhausted: stationary within roundoff
  }
  Matrix tau = t * t.adjoint();
  tau /= tau.trace().real();
  tau = (tau + tau.adjoint()) / 2.0;
  return DensityMatrix(std::move(tau), n);
}

}  // namespace povmshadow
