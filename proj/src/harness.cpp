#include "povmshadow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "povmshadow/metadesign.hpp"

namespace povmshadow {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, sep)) parts.push_back(trim(tok));
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw domain_error("expected a number for " + what + ", got '" + s + "'");
  }
}

std::int64_t to_int(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw domain_error("expected an integer for " + what + ", got '" + s + "'");
  }
}

std::uint64_t to_uint(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size() || s[0] == '-') throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw domain_error("expected a non-negative integer for " + what + ", got '" + s + "'");
  }
}

}  // namespace

// --- Config ---

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw domain_error("config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw domain_error("config line with empty key: " + line);
    cfg.set(key, value);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open config file: " + path);
  return parse(in);
}

void Config::serialize(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
}

std::string Config::canonical() const {
  std::ostringstream out;
  serialize(out);
  return out.str();
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : canonical()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool Config::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

void Config::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

std::string Config::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw domain_error("missing config key: " + key);
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? to_double(get(key), key) : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? to_int(get(key), key) : fallback;
}

// --- descriptors ---

DensityMatrix state_from_descriptor(const std::string& descriptor) {
  const auto parts = split(descriptor, ':');
  if (parts.empty()) throw domain_error("empty state descriptor");
  const std::string& kind = parts[0];
  if (kind == "pure") {
    if (parts.size() != 2) throw domain_error("pure descriptor needs gamma,phi");
    const auto args = split(parts[1], ',');
    if (args.size() != 2) throw domain_error("pure descriptor needs gamma,phi");
    return density(make_pure_state(to_double(args[0], "gamma"), to_double(args[1], "phi")));
  }
  if (kind == "two_photon") {
    if (parts.size() != 2) throw domain_error("two_photon descriptor needs eta");
    return density(make_two_photon_state(to_double(parts[1], "eta")));
  }
  if (kind == "zero" || kind == "mixed") {
    if (parts.size() != 2) throw domain_error(kind + " descriptor needs qubit count");
    const int n = static_cast<int>(to_int(parts[1], "qubit count"));
    if (n < 1) throw domain_error("qubit count must be positive");
    const int d = 1 << n;
    if (kind == "mixed") return DensityMatrix(Matrix::Identity(d, d) / d, n);
    Vector amps = Vector::Zero(d);
    amps(0) = 1.0;
    return density(PureState(amps, n));
  }
  if (kind == "random_pure" || kind == "random_mixed") {
    if (parts.size() != 3) throw domain_error(kind + " descriptor needs qubits and seed");
    const int n = static_cast<int>(to_int(parts[1], "qubit count"));
    if (n < 1) throw domain_error("qubit count must be positive");
    const auto seed = to_uint(parts[2], "seed");
    const int d = 1 << n;
    Rng rng = Rng::keyed(seed, 0x5a17e5ULL);
    if (kind == "random_pure") {
      Vector amps(d);
      for (int i = 0; i < d; ++i) amps(i) = cplx(rng.normal(), rng.normal());
      amps /= amps.norm();
      return density(PureState(amps, n));
    }
    Matrix t(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) t(i, j) = cplx(rng.normal(), rng.normal());
    Matrix rho = t * t.adjoint();
    rho /= rho.trace();
    return DensityMatrix(rho, n);
  }
  throw domain_error("unknown state descriptor kind: " + kind);
}

HermitianOperator observable_from_descriptor(const std::string& descriptor) {
  const auto parts = split(descriptor, ':');
  if (parts.size() != 2) throw domain_error("bad observable descriptor: " + descriptor);
  if (parts[0] == "proj") {
    const auto args = split(parts[1], ',');
    if (args.size() != 2) throw domain_error("proj descriptor needs kappa,nu");
    const DensityMatrix p =
        density(make_pure_state(to_double(args[0], "kappa"), to_double(args[1], "nu")));
    return HermitianOperator(p.entries);
  }
  if (parts[0] == "pauli") {
    static const Eigen::Matrix2cd kI = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd x, y, z;
    x << 0, 1, 1, 0;
    y << 0, cplx(0, -1), cplx(0, 1), 0;
    z << 1, 0, 0, -1;
    Matrix acc = Matrix::Identity(1, 1);
    for (const char c : parts[1]) {
      switch (c) {
        case 'I': acc = kron(acc, kI); break;
        case 'X': acc = kron(acc, x); break;
        case 'Y': acc = kron(acc, y); break;
        case 'Z': acc = kron(acc, z); break;
        default: throw domain_error(std::string("bad Pauli letter: ") + c);
      }
    }
    if (acc.rows() < 2) throw domain_error("pauli descriptor needs at least one letter");
    return HermitianOperator(acc);
  }
  throw domain_error("unknown observable descriptor kind: " + parts[0]);
}

namespace {

// (kappa, nu) pairs whose Bloch vectors are uniform on the sphere
std::vector<std::pair<double, double>> projector_angles(int n, std::uint64_t seed) {
  if (n < 1) throw domain_error("grid size must be positive");
  std::vector<std::pair<double, double>> angles;
  angles.reserve(static_cast<size_t>(n));
  Rng rng = Rng::keyed(seed, 0x0b5e55ULL);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * rng.uniform();
    const double kappa = 0.5 * std::acos(std::clamp(z, -1.0, 1.0));
    const double nu = 2.0 * M_PI * rng.uniform();
    angles.emplace_back(kappa, nu);
  }
  return angles;
}

std::string proj_descriptor(double kappa, double nu) {
  std::ostringstream s;
  s.precision(12);
  s << "proj:" << kappa << "," << nu;
  return s.str();
}

}  // namespace

std::vector<HermitianOperator> observable_grid(int n, std::uint64_t seed) {
  std::vector<HermitianOperator> grid;
  for (const auto& [kappa, nu] : projector_angles(n, seed))
    grid.push_back(HermitianOperator(density(make_pure_state(kappa, nu)).entries));
  return grid;
}

std::vector<PureState> state_grid(int n, bool lattice, std::uint64_t seed) {
  if (n < 1) throw domain_error("grid size must be positive");
  std::vector<PureState> grid;
  grid.reserve(static_cast<size_t>(n));
  if (lattice) {
    // Fibonacci sphere lattice, mapped to (gamma, phi) angles
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double gamma = 0.5 * std::acos(std::clamp(z, -1.0, 1.0));
      const double phi = std::fmod(2.0 * M_PI * i / golden, 2.0 * M_PI);
      grid.push_back(make_pure_state(gamma, phi));
    }
  } else {
    for (const auto& [kappa, nu] : projector_angles(n, seed))
      grid.push_back(make_pure_state(kappa, nu));
  }
  return grid;
}

// --- config assembly helpers ---

SpsaConfig spsa_from_config(const Config& cfg, const SpsaConfig& preset) {
  SpsaConfig c = preset;
  c.a1 = cfg.get_double("a1", c.a1);
  c.a2 = cfg.get_double("a2", c.a2);
  c.a3 = cfg.get_double("a3", c.a3);
  c.b1 = cfg.get_double("b1", c.b1);
  c.b2 = cfg.get_double("b2", c.b2);
  c.k_max = static_cast<int>(cfg.get_int("k_max", c.k_max));
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.validate();
  return c;
}

NoiseModel noise_from_config(const Config& cfg) {
  const std::string kind = cfg.get_or("noise", "none");
  if (kind == "none") return NoiseModel::none();
  if (kind == "pauli_fixed" || kind == "pauli_resampled") {
    const auto parts = split(cfg.get_or("noise_delta", "0"), ',');
    Eigen::Vector3d delta;
    if (parts.size() == 1) {
      delta.setConstant(to_double(parts[0], "noise_delta"));
    } else if (parts.size() == 3) {
      for (int i = 0; i < 3; ++i) delta(i) = to_double(parts[static_cast<size_t>(i)], "noise_delta");
    } else {
      throw domain_error("noise_delta needs 1 or 3 comma-separated values");
    }
    if (kind == "pauli_fixed") return NoiseModel::pauli_fixed(delta);
    return NoiseModel::pauli_resampled(delta, cfg.get_double("noise_sigma", 0.0));
  }
  throw domain_error("unknown noise kind: " + kind);
}

MeasurementPolicy policy_from_config(const Config& cfg, int n_qubits) {
  const std::string povm = cfg.get_or("povm", "octa");
  const auto parts = split(povm, ',');
  if (parts.size() == 1) return MeasurementPolicy::uniform(parts[0], n_qubits);
  if (static_cast<int>(parts.size()) != n_qubits)
    throw domain_error("povm list length does not match qubit count");
  return {parts};
}

// --- CSV ---

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "experiment_id,quantity,observable_descriptor,M,value,std_error,seed\n";
  out.precision(12);
  for (const auto& r : rows)
    out << r.experiment_id << "," << r.quantity << "," << r.observable_descriptor << "," << r.m
        << "," << r.value << "," << r.std_error << "," << r.seed << "\n";
}

namespace {

std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, int points) {
  if (lo < 1 || hi < lo || points < 1) throw domain_error("bad sweep grid bounds");
  std::vector<std::int64_t> grid;
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 1.0 : static_cast<double>(i) / (points - 1);
    const auto m = static_cast<std::int64_t>(
        std::llround(std::exp(std::log(static_cast<double>(lo)) * (1.0 - t) +
                              std::log(static_cast<double>(hi)) * t)));
    if (grid.empty() || m > grid.back()) grid.push_back(m);
  }
  return grid;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (const double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (const double x : xs) acc += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return r;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw domain_error("median of empty set");
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

// --- experiment drivers ---

std::vector<ResultRow> run_variance_convergence(const Config& cfg) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::string id = cfg.get_or("experiment_id", "variance_convergence");
  const int reps = static_cast<int>(cfg.get_int("repetitions", 5));
  const int n_states = static_cast<int>(cfg.get_int("n_states", 20));
  const auto grid =
      log_grid(cfg.get_int("m_min", 10), cfg.get_int("m_max", 10000),
               static_cast<int>(cfg.get_int("m_points", 10)));
  const HermitianOperator o = observable_from_descriptor("proj:0.7853981633974483,0");
  std::vector<DensityMatrix> states;
  for (const auto& psi : state_grid(n_states, true)) states.push_back(density(psi));

  std::vector<ResultRow> rows;
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    std::vector<double> vals;
    for (int rep = 0; rep < reps; ++rep)
      vals.push_back(shadow_norm_empirical(states, o, octahedron_povm(), grid[gi],
                                           Rng::keyed(seed, gi, static_cast<std::uint64_t>(rep)).next()));
    const auto [mean, std] = mean_std(vals);
    rows.push_back({id, "max_empirical_variance", "proj:0.785398163397,0", grid[gi], mean, std, seed});
  }
  return rows;
}

std::vector<ResultRow> run_norm_sweep(const Config& cfg) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::string id = cfg.get_or("experiment_id", "norm_sweep");
  const int n_obs = static_cast<int>(cfg.get_int("n_observables", 128));
  const int n_states = static_cast<int>(cfg.get_int("n_states", 20));
  const std::int64_t m = cfg.get_int("m", 10000);
  const auto angles = projector_angles(n_obs, seed);
  std::vector<DensityMatrix> states;
  for (const auto& psi : state_grid(n_states, true)) states.push_back(density(psi));

  std::vector<ResultRow> rows;
  for (size_t oi = 0; oi < angles.size(); ++oi) {
    const auto& [kappa, nu] = angles[oi];
    const std::string desc = proj_descriptor(kappa, nu);
    const HermitianOperator o = observable_from_descriptor(desc);
    const double octa =
        shadow_norm_empirical(states, o, octahedron_povm(), m, Rng::keyed(seed, oi, 1).next());
    const double sic =
        shadow_norm_empirical(states, o, sic_povm(), m, Rng::keyed(seed, oi, 2).next());
    rows.push_back({id, "shadow_norm_octa", desc, m, octa, 0.0, seed});
    rows.push_back({id, "shadow_norm_sic", desc, m, sic, 0.0, seed});
  }
  return rows;
}

std::vector<ResultRow> run_fidelity_curves(const Config& cfg) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::string id = cfg.get_or("experiment_id", "fidelity_curves");
  const int n_states = static_cast<int>(cfg.get_int("n_states", 20));
  const double mle_bias = cfg.get_double("mle_bias", 0.1);
  const auto grid = log_grid(cfg.get_int("m_min", 10), cfg.get_int("m_max", 1000),
                             static_cast<int>(cfg.get_int("m_points", 6)));
  const auto states = state_grid(n_states, true);
  const MeasurementPolicy policy = MeasurementPolicy::uniform("octa", 1);

  SpsaConfig slst_cfg = spsa_from_config(cfg, preset_single_qubit());
  SpsaConfig sgqt_cfg = slst_cfg;
  sgqt_cfg.a1 = cfg.get_double("sgqt_a1", 0.7);
  sgqt_cfg.b1 = cfg.get_double("sgqt_b1", 0.4);
  const int sgqt_runs = static_cast<int>(cfg.get_int("sgqt_runs_per_iteration", 7));

  std::vector<ResultRow> rows;
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    const std::int64_t m = grid[gi];
    std::vector<double> f_slst, f_sgqt, f_mle;
    for (size_t si = 0; si < states.size(); ++si) {
      const DensityMatrix target = density(states[si]);
      const auto shot_seed = Rng::keyed(seed, gi, si).next();
      const RecordSet records = sample_shots(target, policy, m, shot_seed);

      SpsaConfig sc = slst_cfg;
      sc.seed = Rng::keyed(seed, gi, si + 1000).next();
      // Targets are pure: initialize from the dominant eigenvector of the
      // mean shadow, matching the prior information SGQT's pure ansatz has.
      const ShadowSet shadow_set(records);
      auto [evals, evecs] = eigen_hermitian(shadow_set.mean_shadow());
      Matrix t0 = 0.999 * (evecs.col(1) * evecs.col(1).adjoint()) +
                  0.001 * Matrix::Identity(2, 2) / 2.0;
      const DensityMatrix init(std::move(t0), 1);
      f_slst.push_back(
          fidelity(slst(shadow_set, sc, init, target).final_state, target));

      SpsaConfig gc = sgqt_cfg;
      gc.seed = sc.seed;
      gc.k_max = std::max<int>(1, static_cast<int>(m / sgqt_runs));
      f_sgqt.push_back(
          fidelity(sgqt(projection_sampler(target), 2, gc, sgqt_runs, target).final_state,
                   target));

      const RecordSet biased = mle_bias > 0.0
                                   ? sample_shots_biased(target, policy, m, shot_seed, mle_bias)
                                   : records;
      f_mle.push_back(fidelity(mle(biased), target));
    }
    const auto s = mean_std(f_slst), g = mean_std(f_sgqt), l = mean_std(f_mle);
    rows.push_back({id, "fidelity_slst", "", m, s.mean, s.std, seed});
    rows.push_back({id, "fidelity_sgqt", "", m, g.mean, g.std, seed});
    rows.push_back({id, "fidelity_mle", "", m, l.mean, l.std, seed});
  }
  return rows;
}

std::vector<ResultRow> run_robust_comparison(const Config& cfg) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::string id = cfg.get_or("experiment_id", "robust_comparison");
  const int reps = static_cast<int>(cfg.get_int("repetitions", 5));
  const std::int64_t m = cfg.get_int("m", 1000);
  const std::int64_t m_prime = cfg.get_int("m_prime", 2000);
  const double sigma = cfg.get_double("noise_sigma", 0.02);
  std::vector<double> deltas;
  for (const auto& d : split(cfg.get_or("delta_grid", "0,0.05,0.1"), ','))
    deltas.push_back(to_double(d, "delta_grid"));
  const DensityMatrix target = state_from_descriptor(cfg.get_or("state", "pure:0.6,1.1"));
  const int n = target.n_qubits;
  const MeasurementPolicy policy = MeasurementPolicy::uniform("octa", n);
  const DensityMatrix ground = state_from_descriptor("zero:" + std::to_string(n));
  const SpsaConfig base = spsa_from_config(cfg, preset_robust());

  std::vector<ResultRow> rows;
  for (size_t di = 0; di < deltas.size(); ++di) {
    const NoiseModel noise = deltas[di] > 0.0
                                 ? NoiseModel::pauli_resampled(
                                       Eigen::Vector3d::Constant(deltas[di]), sigma)
                                 : NoiseModel::none();
    std::vector<double> f_plain, f_robust;
    for (int rep = 0; rep < reps; ++rep) {
      const auto calib_seed = Rng::keyed(seed, di, static_cast<std::uint64_t>(rep)).next();
      const CalibrationResult calib =
          run_calibration(sample_shots(ground, policy, m_prime, calib_seed, noise));
      const auto shot_seed = Rng::keyed(seed, di, static_cast<std::uint64_t>(rep) + 100).next();
      const RecordSet records = sample_shots(target, policy, m, shot_seed, noise);
      SpsaConfig sc = base;
      sc.seed = Rng::keyed(seed, di, static_cast<std::uint64_t>(rep) + 200).next();
      f_plain.push_back(fidelity(slst(records, sc).final_state, target));
      f_robust.push_back(fidelity(slst(records, sc, calib).final_state, target));
    }
    std::ostringstream desc;
    desc << "delta:" << deltas[di];
    rows.push_back({id, "fidelity_plain", desc.str(), m, median(f_plain), mean_std(f_plain).std,
                    seed});
    rows.push_back({id, "fidelity_robust", desc.str(), m, median(f_robust),
                    mean_std(f_robust).std, seed});
  }
  return rows;
}

std::vector<ResultRow> run_scaling_study(const Config& cfg) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::string id = cfg.get_or("experiment_id", "scaling_study");
  const int reps = static_cast<int>(cfg.get_int("repetitions", 3));
  const auto grid = log_grid(cfg.get_int("m_min", 100), cfg.get_int("m_max", 10000),
                             static_cast<int>(cfg.get_int("m_points", 5)));
  std::vector<int> n_list;
  for (const auto& s : split(cfg.get_or("n_list", "2,3"), ','))
    n_list.push_back(static_cast<int>(to_int(s, "n_list")));

  std::vector<ResultRow> rows;
  for (size_t ni = 0; ni < n_list.size(); ++ni) {
    const int n = n_list[ni];
    const int d = 1 << n;
    SpsaConfig sc = spsa_from_config(cfg, preset_scaling(n));
    const MeasurementPolicy policy = MeasurementPolicy::uniform("octa", n);
    for (size_t gi = 0; gi < grid.size(); ++gi) {
      std::vector<double> infidelities;
      for (int rep = 0; rep < reps; ++rep) {
        const auto sub = Rng::keyed(seed, ni * 100 + gi, static_cast<std::uint64_t>(rep)).next();
        const DensityMatrix target = state_from_descriptor(
            "random_pure:" + std::to_string(n) + ":" + std::to_string(sub));
        const RecordSet records = sample_shots(target, policy, grid[gi], sub + 1);
        sc.seed = sub + 2;
        // Targets here are pure, so start from the dominant eigenvector of
        // the mean shadow (with a small mixed floor). The full spectral init
        // inherits the 1/sqrt(M) eigenvalue noise of the mean shadow and
        // would mask the 1/M convergence of the dominant component.
        const ShadowSet shadow_set(records);
        auto [evals, evecs] = eigen_hermitian(shadow_set.mean_shadow());
        const Vector top = evecs.col(d - 1);
        const double eps = 1e-3;
        Matrix t0 = (1.0 - eps) * (top * top.adjoint()) +
                    eps * Matrix::Identity(d, d) / d;
        const DensityMatrix init(std::move(t0), n);
        infidelities.push_back(
            1.0 - fidelity(slst(shadow_set, sc, init).final_state, target));
      }
      rows.push_back({id, "infidelity", "N:" + std::to_string(n), grid[gi],
                      median(infidelities), mean_std(infidelities).std, seed});
    }
  }
  return rows;
}

// --- manifest ---

void write_manifest(const std::string& path, const Config& cfg) {
  std::ofstream out(path);
  if (!out) throw domain_error("cannot write manifest: " + path);
  std::ostringstream hex;
  hex << std::hex << cfg.hash();
  std::string params = cfg.canonical();
  for (auto& c : params)
    if (c == '\n') c = ';';
  if (!params.empty() && params.back() == ';') params.pop_back();
  out << "config_hash = " << hex.str() << "\n";
  out << "start_params = " << params << "\n";
  out << "artifact_version = 0.1.0\n";
}

// --- CLI ---

namespace {

void write_state_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw domain_error("cannot write state file: " + path);
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << " ";
      out << m(i, j).real() << "," << m(i, j).imag();
    }
    out << "\n";
  }
}

void write_trace_csv(const std::string& path, const ReconstructionTrace& trace) {
  std::ofstream out(path);
  if (!out) throw domain_error("cannot write trace file: " + path);
  out << "k,cost,fidelity\n";
  out.precision(12);
  for (const auto& p : trace.trace) out << p.k << "," << p.cost << "," << p.fidelity << "\n";
}

struct CliContext {
  Config cfg;
  std::filesystem::path out_dir;

  std::uint64_t seed() const { return static_cast<std::uint64_t>(cfg.get_int("seed", 1)); }
  std::string out(const std::string& name) const { return (out_dir / name).string(); }
};

CliContext make_context(const std::string& config_path, const std::string& out_dir,
                        std::int64_t seed_override) {
  CliContext ctx;
  if (!config_path.empty()) ctx.cfg = Config::load(config_path);
  if (seed_override >= 0) ctx.cfg.set("seed", std::to_string(seed_override));
  if (!ctx.cfg.has("seed")) ctx.cfg.set("seed", "1");
  ctx.out_dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(ctx.out_dir);
  return ctx;
}

std::optional<CalibrationResult> maybe_calibration(const Config& cfg) {
  if (!cfg.has("calibration")) return std::nullopt;
  return load_calibration(cfg.get("calibration"));
}

void cmd_sample(const CliContext& ctx) {
  const DensityMatrix state = state_from_descriptor(ctx.cfg.get("state"));
  const MeasurementPolicy policy = policy_from_config(ctx.cfg, state.n_qubits);
  const std::int64_t m = ctx.cfg.get_int("m", 1000);
  const NoiseModel noise = noise_from_config(ctx.cfg);
  const double bias = ctx.cfg.get_double("bias", 0.0);
  const RecordSet records =
      bias > 0.0 ? sample_shots_biased(state, policy, m, ctx.seed(), bias, ctx.cfg.get("state"))
                 : sample_shots(state, policy, m, ctx.seed(), noise, ctx.cfg.get("state"));
  save_records(ctx.out("records.jsonl"), records);
  write_manifest(ctx.out("manifest.txt"), ctx.cfg);
}

void cmd_estimate(const CliContext& ctx) {
  const RecordSet records = load_records(ctx.cfg.get("records"));
  const auto calib = maybe_calibration(ctx.cfg);
  std::vector<ResultRow> rows;
  const std::string id = ctx.cfg.get_or("experiment_id", "estimate");
  if (ctx.cfg.has("observable")) {
    const std::string desc = ctx.cfg.get("observable");
    const auto report = estimate_observable(records, observable_from_descriptor(desc), calib);
    rows.push_back({id, "observable_mean", desc, report.m, report.mean, report.std_error,
                    records.master_seed});
  }
  if (ctx.cfg.get_or("purity", "false") == "true") {
    const auto report = estimate_purity(records, calib);
    rows.push_back(
        {id, "purity", "", report.m, report.mean, report.std_error, records.master_seed});
  }
  if (rows.empty()) throw domain_error("estimate: set 'observable' and/or 'purity = true'");
  std::ofstream out(ctx.out("estimate.csv"));
  write_results_csv(out, rows);
  write_manifest(ctx.out("manifest.txt"), ctx.cfg);
}

void cmd_calibrate(const CliContext& ctx) {
  const int n = static_cast<int>(ctx.cfg.get_int("n_qubits", 1));
  const std::int64_t m_prime = ctx.cfg.get_int("m_prime", 2000);
  const DensityMatrix ground = state_from_descriptor("zero:" + std::to_string(n));
  const RecordSet records = sample_shots(ground, MeasurementPolicy::uniform("octa", n), m_prime,
                                         ctx.seed(), noise_from_config(ctx.cfg));
  save_calibration(ctx.out("calibration.txt"), run_calibration(records), ctx.seed());
  write_manifest(ctx.out("manifest.txt"), ctx.cfg);
}

void cmd_slst(const CliContext& ctx) {
  const RecordSet records = load_records(ctx.cfg.get("records"));
  const auto calib = maybe_calibration(ctx.cfg);
  const SpsaConfig sc = spsa_from_config(
      ctx.cfg, records.n_qubits == 1 ? preset_single_qubit() : preset_two_qubit());
  std::optional<DensityMatrix> reference;
  if (ctx.cfg.has("state")) reference = state_from_descriptor(ctx.cfg.get("state"));
  std::optional<DensityMatrix> init;
  if (ctx.cfg.get_or("init", "spectral") == "random") {
    const int d = 1 << records.n_qubits;
    Rng rng = Rng::keyed(sc.seed, 0x7a0ULL);
    RealVector r(d * d);
    for (int i = 0; i < d * d; ++i) r(i) = rng.normal();
    init = cholesky_compose(r, d);
  }
  const ReconstructionTrace trace = slst(records, sc, calib, init, reference);
  write_trace_csv(ctx.out("trace.csv"), trace);
  write_state_matrix(ctx.out("state.txt"), trace.final_state.entries);
  write_manifest(ctx.out("manifest.txt"), ctx.cfg);
}

void cmd_sgqt(const CliContext& ctx) {
  const DensityMatrix hidden = state_from_descriptor(ctx.cfg.get("state"));
  SpsaConfig sc = spsa_from_config(ctx.cfg, preset_single_qubit());
  sc.a1 = ctx.cfg.get_double("a1", 0.7);
  sc.b1 = ctx.cfg.get_double("b1", 0.4);
  const int runs = static_cast<int>(ctx.cfg.get_int("runs_per_iteration", 7));
  const auto sampler = ctx.cfg.get_or("sampler", "finite") == "exact"
                           ? exact_projection_sampler(hidden)
                           : projection_sampler(hidden);
  const ReconstructionTrace trace = sgqt(sampler, hidden.dim(), sc, runs, hidden);
  write_trace_csv(ctx.out("trace.csv"), trace);
  write_state_matrix(ctx.out("state.txt"), trace.final_state.entries);
  write_manifest(ctx.out("manifest.txt"), ctx.cfg);
}

void cmd_mle(const CliContext& ctx) {
  const RecordSet records = load_records(ctx.cfg.get("records"));
  const DensityMatrix state = mle(records, static_cast<int>(ctx.cfg.get_int("k_max", 20000)));
  write_state_matrix(ctx.out("state.txt"), state.entries);
  write_manifest(ctx.out("manifest.txt"), ctx.cfg);
}

void cmd_metadesign(const CliContext& ctx) {
#ifndef POVMSHADOW_DATA_DIR
#define POVMSHADOW_DATA_DIR "data"
#endif
  const std::string library_path =
      ctx.cfg.get_or("library", std::string(POVMSHADOW_DATA_DIR) + "/pillar_library.csv");
  const auto library = load_pillar_library(library_path);
  for (const auto& region : region_layout()) {
    for (const int side : {+1, -1}) {
      const PhaseProfile profile =
          phase_profile(region, side * region.focus_x_um, region.focus_y_um);
      std::ofstream out(ctx.out("phase_" + region.basis + (side > 0 ? "_plus" : "_minus") +
                                ".csv"));
      write_phase_profile_csv(out, profile);
    }
  }
  std::ofstream layout(ctx.out("circular_layout.csv"));
  write_circular_layout(layout, library);
  write_manifest(ctx.out("manifest.txt"), ctx.cfg);
}

void run_named_experiment(const CliContext& ctx, const std::string& kind,
                          const std::string& csv_name) {
  std::vector<ResultRow> rows;
  if (kind == "variance_convergence") rows = run_variance_convergence(ctx.cfg);
  else if (kind == "norm_sweep") rows = run_norm_sweep(ctx.cfg);
  else if (kind == "fidelity_curves") rows = run_fidelity_curves(ctx.cfg);
  else if (kind == "robust_comparison") rows = run_robust_comparison(ctx.cfg);
  else if (kind == "scaling_study") rows = run_scaling_study(ctx.cfg);
  else throw domain_error("unknown experiment kind: " + kind);
  std::ofstream out(ctx.out(csv_name));
  write_results_csv(out, rows);
  write_manifest(ctx.out("manifest.txt"), ctx.cfg);
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"POVM classical-shadow tomography toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::int64_t seed_override = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--out", out_dir, "output directory");
    return sub;
  };

  auto* c_sample = add_common(app.add_subcommand("sample", "draw measurement records"));
  auto* c_estimate = add_common(app.add_subcommand("estimate", "estimate observables / purity"));
  auto* c_variance = add_common(app.add_subcommand("variance", "variance-convergence sweep"));
  auto* c_norm = add_common(app.add_subcommand("norm-sweep", "shadow-norm comparison sweep"));
  auto* c_calibrate = add_common(app.add_subcommand("calibrate", "measurement-channel calibration"));
  auto* c_slst = add_common(app.add_subcommand("slst", "self-learning shadow tomography"));
  auto* c_sgqt = add_common(app.add_subcommand("sgqt", "self-guided tomography"));
  auto* c_mle = add_common(app.add_subcommand("mle", "maximum-likelihood baseline"));
  auto* c_meta = add_common(app.add_subcommand("metadesign", "metasurface design outputs"));
  auto* c_experiment = add_common(app.add_subcommand("experiment", "run a named experiment"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const CliContext ctx = make_context(config_path, out_dir, seed_override);
    if (c_sample->parsed()) cmd_sample(ctx);
    else if (c_estimate->parsed()) cmd_estimate(ctx);
    else if (c_variance->parsed()) run_named_experiment(ctx, "variance_convergence", "variance.csv");
    else if (c_norm->parsed()) run_named_experiment(ctx, "norm_sweep", "norm_sweep.csv");
    else if (c_calibrate->parsed()) cmd_calibrate(ctx);
    else if (c_slst->parsed()) cmd_slst(ctx);
    else if (c_sgqt->parsed()) cmd_sgqt(ctx);
    else if (c_mle->parsed()) cmd_mle(ctx);
    else if (c_meta->parsed()) cmd_metadesign(ctx);
    else if (c_experiment->parsed())
      run_named_experiment(ctx, ctx.cfg.get("experiment"), "results.csv");
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace povmshadow
