#include "povmshadow/measure.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace povmshadow {

namespace {

using nlohmann::json;

Eigen::Vector2cd ket(cplx a, cplx b) {
  Eigen::Vector2cd v;
  v << a, b;
  return v;
}

PovmSpec make_povm(const std::vector<Eigen::Vector2cd>& vectors, double weight,
                   std::vector<std::string> labels, std::string kind) {
  std::vector<Eigen::Matrix2cd> effects;
  effects.reserve(vectors.size());
  for (const auto& v : vectors) effects.push_back(weight * (v * v.adjoint()));
  return PovmSpec(std::move(effects), vectors, std::move(labels), std::move(kind));
}

const Eigen::Matrix2cd& pauli2(int j) {
  static const Eigen::Matrix2cd p[4] = {
      (Eigen::Matrix2cd() << 1, 0, 0, 1).finished(),
      (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(),
      (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
      (Eigen::Matrix2cd() << 1, 0, 0, -1).finished()};
  return p[j];
}

/// Contract qubit `0` (slowest index) of an unnormalized rho with vector psi:
/// rho'(i,j) = sum_{a,b} conj(psi_a) psi_b rho(a*dd+i, b*dd+j).
Matrix contract_first_qubit(const Matrix& rho, const Eigen::Vector2cd& psi) {
  const Eigen::Index dd = rho.rows() / 2;
  Matrix out = Matrix::Zero(dd, dd);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out += std::conj(psi[a]) * psi[b] * rho.block(a * dd, b * dd, dd, dd);
  return out;
}

/// 2x2 partial trace over all but the first qubit.
Eigen::Matrix2cd first_qubit_marginal(const Matrix& rho) {
  const Eigen::Index dd = rho.rows() / 2;
  Eigen::Matrix2cd p = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      p(a, b) = rho.block(a * dd, b * dd, dd, dd).trace();
  return p;
}

void joint_probabilities(const Matrix& rho, const std::vector<const PovmSpec*>& settings, size_t q,
                         double prefactor, RealVector& out, Eigen::Index& cursor) {
  if (q == settings.size()) {
    out[cursor++] = std::max(prefactor * rho(0, 0).real(), 0.0);
    return;
  }
  const PovmSpec& povm = *settings[q];
  for (int l = 0; l < povm.n_outcomes(); ++l) {
    const double w = povm.effects[l].trace().real();
    Matrix cond = contract_first_qubit(rho, povm.vectors[l]);
    if (q + 1 == settings.size()) {
      out[cursor++] = std::max(prefactor * w * cond(0, 0).real(), 0.0);
    } else {
      joint_probabilities(cond, settings, q + 1, prefactor * w, out, cursor);
    }
  }
}

Eigen::Vector3d resample_deltas(const NoiseModel& model, Rng& rng) {
  Eigen::Vector3d d = model.delta_bar;
  if (model.kind == NoiseModel::Kind::pauli_resampled)
    for (int i = 0; i < 3; ++i) d[i] += model.sigma * rng.normal();
  for (int i = 0; i < 3; ++i) d[i] = std::min(std::max(d[i], 0.0), 1.0);
  return d;
}

Matrix apply_single_qubit_channel(const Matrix& rho, int n_qubits, int qubit,
                                  const std::vector<std::pair<double, Eigen::Matrix2cd>>& terms) {
  const Eigen::Index d = rho.rows();
  Matrix out = Matrix::Zero(d, d);
  for (const auto& [c, k2] : terms) {
    if (c == 0.0) continue;
    Matrix op = Matrix::Identity(1, 1);
    for (int q = 0; q < n_qubits; ++q)
      op = kron(op, q == qubit ? Matrix(k2) : Matrix(Matrix::Identity(2, 2)));
    out += c * (op * rho * op.adjoint());
  }
  return out;
}

json record_to_json(const ShotRecord& shot) {
  return json{{"run", shot.run_index}, {"settings", shot.settings}, {"outcomes", shot.outcomes}};
}

}  // namespace

PovmSpec::PovmSpec(std::vector<Eigen::Matrix2cd> e, std::vector<Eigen::Vector2cd> v,
                   std::vector<std::string> l, std::string k)
    : effects(std::move(e)), vectors(std::move(v)), labels(std::move(l)), kind(std::move(k)) {
  if (effects.empty() || effects.size() != vectors.size() || effects.size() != labels.size())
    throw domain_error("PovmSpec: inconsistent effect/vector/label counts");
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (const auto& eff : effects) {
    sum += eff;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(eff, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kHermitianTol)
      throw domain_error("PovmSpec: effect is not PSD");
  }
  if ((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw domain_error("PovmSpec: effects do not sum to identity within 1e-12");
}

const PovmSpec& octahedron_povm() {
  static const double s = 1.0 / std::sqrt(2.0);
  static const PovmSpec povm = make_povm(
      {ket(1, 0), ket(0, 1), ket(s, s), ket(s, -s), ket(s, cplx(0, s)), ket(s, cplx(0, -s))},
      1.0 / 3.0, {"H", "V", "+", "-", "R", "L"}, "octa");
  return povm;
}

const PovmSpec& sic_povm() {
  static const double a = 1.0 / std::sqrt(3.0);
  static const double b = std::sqrt(2.0 / 3.0);
  static const PovmSpec povm = make_povm(
      {ket(1, 0), ket(a, b), ket(a, b * std::polar(1.0, 2.0 * M_PI / 3.0)),
       ket(a, b * std::polar(1.0, 4.0 * M_PI / 3.0))},
      0.5, {"t0", "t1", "t2", "t3"}, "sic");
  return povm;
}

const PovmSpec& pauli_povm(char axis) {
  static const double s = 1.0 / std::sqrt(2.0);
  static const PovmSpec px = make_povm({ket(s, s), ket(s, -s)}, 1.0, {"+", "-"}, "pauli_x");
  static const PovmSpec py =
      make_povm({ket(s, cplx(0, s)), ket(s, cplx(0, -s))}, 1.0, {"R", "L"}, "pauli_y");
  static const PovmSpec pz = make_povm({ket(1, 0), ket(0, 1)}, 1.0, {"H", "V"}, "pauli_z");
  switch (axis) {
    case 'x': return px;
    case 'y': return py;
    case 'z': return pz;
    default: throw domain_error("pauli_povm: axis must be x, y or z");
  }
}

const PovmSpec& povm_by_kind(const std::string& kind) {
  if (kind == "octa") return octahedron_povm();
  if (kind == "sic") return sic_povm();
  if (kind == "pauli_x") return pauli_povm('x');
  if (kind == "pauli_y") return pauli_povm('y');
  if (kind == "pauli_z") return pauli_povm('z');
  throw domain_error("unknown POVM kind: " + kind);
}

double check_two_design(const PovmSpec& povm) {
  for (size_t l = 0; l < povm.effects.size(); ++l) {
    const auto& v = povm.vectors[l];
    const double w = povm.effects[l].trace().real();
    if ((povm.effects[l] - w * (v * v.adjoint())).cwiseAbs().maxCoeff() > kHermitianTol)
      throw domain_error("check_two_design: effect is not rank-1");
  }
  return check_two_design(povm.vectors);
}

NoiseModel NoiseModel::pauli_fixed(const Eigen::Vector3d& delta) {
  NoiseModel m;
  m.kind = Kind::pauli_fixed;
  m.delta_bar = delta;
  return m;
}

NoiseModel NoiseModel::pauli_resampled(const Eigen::Vector3d& delta_bar, double sigma) {
  NoiseModel m;
  m.kind = Kind::pauli_resampled;
  m.delta_bar = delta_bar;
  m.sigma = sigma;
  return m;
}

NoiseModel NoiseModel::kraus_list(std::vector<Eigen::Matrix2cd> ops) {
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (const auto& k : ops) sum += k.adjoint() * k;
  if ((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-10)
    throw domain_error("NoiseModel: Kraus operators do not satisfy completeness within 1e-10");
  NoiseModel m;
  m.kind = Kind::kraus_list;
  m.kraus = std::move(ops);
  return m;
}

DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseModel& model, Rng& shot_rng) {
  if (model.kind == NoiseModel::Kind::none) return rho;
  Matrix out = rho.entries;
  for (int q = 0; q < rho.n_qubits; ++q) {
    std::vector<std::pair<double, Eigen::Matrix2cd>> terms;
    if (model.kind == NoiseModel::Kind::kraus_list) {
      for (const auto& k : model.kraus) terms.emplace_back(1.0, k);
    } else {
      const Eigen::Vector3d d = resample_deltas(model, shot_rng);
      terms.emplace_back(1.0 - d.sum() / 3.0, pauli2(0));
      for (int i = 0; i < 3; ++i) terms.emplace_back(d[i] / 3.0, pauli2(i + 1));
    }
    out = apply_single_qubit_channel(out, rho.n_qubits, q, terms);
  }
  out = (out + out.adjoint()) / 2.0;
  return DensityMatrix(std::move(out), rho.n_qubits);
}

RealVector born_probabilities(const DensityMatrix& rho, const std::vector<const PovmSpec*>& settings) {
  if (static_cast<int>(settings.size()) != rho.n_qubits)
    throw domain_error("born_probabilities: settings count does not match qubit count");
  Eigen::Index total = 1;
  for (const auto* s : settings) total *= s->n_outcomes();
  RealVector out(total);
  Eigen::Index cursor = 0;
  joint_probabilities(rho.entries, settings, 0, 1.0, out, cursor);
  const double sum = out.sum();
  if (std::abs(sum - 1.0) > 1e-10)
    throw domain_error("born_probabilities: probabilities do not sum to 1");
  return out;
}

namespace {

std::vector<std::string> resolve_settings(const MeasurementPolicy& policy, Rng& rng) {
  std::vector<std::string> resolved;
  resolved.reserve(policy.per_qubit.size());
  for (const auto& kind : policy.per_qubit) {
    if (kind == "random_pauli") {
      static const char axes[3] = {'x', 'y', 'z'};
      resolved.push_back(std::string("pauli_") + axes[rng.uniform_int(3)]);
    } else {
      povm_by_kind(kind);  // validates
      resolved.push_back(kind);
    }
  }
  return resolved;
}

}  // namespace

RecordSet sample_shots(const DensityMatrix& state, const MeasurementPolicy& policy, std::int64_t m,
                       std::uint64_t master_seed, const NoiseModel& noise,
                       const std::string& state_descriptor) {
  if (m < 1) throw domain_error("sample_shots: M must be >= 1");
  if (static_cast<int>(policy.per_qubit.size()) != state.n_qubits)
    throw domain_error("sample_shots: policy size does not match qubit count");
  RecordSet records;
  records.n_qubits = state.n_qubits;
  records.master_seed = master_seed;
  records.state_descriptor = state_descriptor;
  records.policy = policy;
  records.shots.reserve(static_cast<size_t>(m));

  for (std::int64_t i = 0; i < m; ++i) {
    Rng rng = Rng::keyed(master_seed, static_cast<std::uint64_t>(i));
    ShotRecord shot;
    shot.run_index = i;
    shot.settings = resolve_settings(policy, rng);
    const DensityMatrix rho = apply_noise(state, noise, rng);

    // Sequential rank-1 sampling, qubit by qubit, on the unnormalized
    // conditional state.
    Matrix cond = rho.entries;
    for (int q = 0; q < state.n_qubits; ++q) {
      const PovmSpec& povm = povm_by_kind(shot.settings[q]);
      const Eigen::Matrix2cd marginal = first_qubit_marginal(cond);
      const int n_out = povm.n_outcomes();
      RealVector probs(n_out);
      for (int l = 0; l < n_out; ++l) {
        const double w = povm.effects[l].trace().real();
        probs[l] = std::max((w * povm.vectors[l].adjoint() * marginal * povm.vectors[l])(0).real(), 0.0);
      }
      const double total = probs.sum();
      double u = rng.uniform() * total;
      int outcome = 0;
      for (; outcome < n_out - 1; ++outcome) {
        u -= probs[outcome];
        if (u < 0.0) break;
      }
      shot.outcomes.push_back(outcome);
      if (q + 1 < state.n_qubits) {
        const double w = povm.effects[outcome].trace().real();
        cond = w * contract_first_qubit(cond, povm.vectors[outcome]);
      }
    }
    records.shots.push_back(std::move(shot));
  }
  return records;
}

RecordSet sample_shots_biased(const DensityMatrix& state, const MeasurementPolicy& policy,
                              std::int64_t m, std::uint64_t master_seed, double strength,
                              const std::string& state_descriptor) {
  if (m < 1) throw domain_error("sample_shots_biased: M must be >= 1");
  RecordSet records;
  records.n_qubits = state.n_qubits;
  records.master_seed = master_seed;
  records.state_descriptor = state_descriptor;
  records.policy = policy;
  records.shots.reserve(static_cast<size_t>(m));

  // joint distributions cached per resolved settings combination
  std::map<std::string, RealVector> cache;
  for (std::int64_t i = 0; i < m; ++i) {
    Rng rng = Rng::keyed(master_seed, static_cast<std::uint64_t>(i));
    ShotRecord shot;
    shot.run_index = i;
    shot.settings = resolve_settings(policy, rng);
    std::string key;
    for (const auto& s : shot.settings) key += s + ",";
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::vector<const PovmSpec*> settings;
      for (const auto& s : shot.settings) settings.push_back(&povm_by_kind(s));
      RealVector p = born_probabilities(state, settings);
      // mix with the uniform outcome distribution; for symmetric POVMs this
      // equals measuring a depolarized state, so the distortion persists at
      // any M (a systematic plateau rather than statistical noise)
      p = (1.0 - strength) * p +
          (strength / static_cast<double>(p.size())) * RealVector::Ones(p.size());
      p /= p.sum();
      it = cache.emplace(key, std::move(p)).first;
    }
    const RealVector& probs = it->second;
    double u = rng.uniform();
    Eigen::Index joint = 0;
    for (; joint < probs.size() - 1; ++joint) {
      u -= probs[joint];
      if (u < 0.0) break;
    }
    // decode mixed-radix joint index, leftmost qubit slowest
    std::vector<int> radices;
    for (const auto& s : shot.settings) radices.push_back(povm_by_kind(s).n_outcomes());
    shot.outcomes.assign(radices.size(), 0);
    for (int q = static_cast<int>(radices.size()) - 1; q >= 0; --q) {
      shot.outcomes[q] = static_cast<int>(joint % radices[q]);
      joint /= radices[q];
    }
    records.shots.push_back(std::move(shot));
  }
  return records;
}

void write_records(std::ostream& out, const RecordSet& records) {
  json header{{"n_qubits", records.n_qubits},
              {"master_seed", records.master_seed},
              {"state_descriptor", records.state_descriptor},
              {"policy", records.policy.per_qubit}};
  out << header.dump() << "\n";
  for (const auto& shot : records.shots) out << record_to_json(shot).dump() << "\n";
}

RecordSet read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw domain_error("read_records: empty stream");
  json header = json::parse(line);
  RecordSet records;
  records.n_qubits = header.at("n_qubits").get<int>();
  records.master_seed = header.at("master_seed").get<std::uint64_t>();
  records.state_descriptor = header.at("state_descriptor").get<std::string>();
  records.policy.per_qubit = header.at("policy").get<std::vector<std::string>>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ShotRecord shot;
    shot.run_index = j.at("run").get<std::int64_t>();
    shot.settings = j.at("settings").get<std::vector<std::string>>();
    shot.outcomes = j.at("outcomes").get<std::vector<int>>();
    for (size_t q = 0; q < shot.settings.size(); ++q)
      if (shot.outcomes[q] >= povm_by_kind(shot.settings[q]).n_outcomes())
        throw domain_error("read_records: outcome index out of range");
    records.shots.push_back(std::move(shot));
  }
  return records;
}

void save_records(const std::string& path, const RecordSet& records) {
  std::ofstream out(path);
  if (!out) throw domain_error("cannot open for writing: " + path);
  write_records(out, records);
}

RecordSet load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open records file: " + path);
  return read_records(in);
}

}  // namespace povmshadow
