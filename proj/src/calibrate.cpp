#include "povmshadow/calibrate.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace povmshadow {

namespace {

/// <psi_l|Z|psi_l> for octahedron outcome index l (order H, V, +, -, R, L).
double z_value(int outcome) {
  switch (outcome) {
    case 0: return 1.0;
    case 1: return -1.0;
    default: return 0.0;
  }
}

}  // namespace

CalibrationResult CalibrationResult::ideal(int n_qubits) {
  CalibrationResult c;
  c.n_qubits = n_qubits;
  const Eigen::Index size = Eigen::Index{1} << n_qubits;
  c.coefficients.resize(size);
  c.std_errors = RealVector::Zero(size);
  for (Eigen::Index lambda = 0; lambda < size; ++lambda) {
    int weight = 0;
    for (int q = 0; q < n_qubits; ++q) weight += (lambda >> q) & 1;
    c.coefficients[lambda] = std::pow(3.0, -weight);
  }
  return c;
}

double calibration_single_shot(const ShotRecord& shot, std::uint32_t lambda) {
  const int n = static_cast<int>(shot.settings.size());
  double value = 1.0;
  for (int q = 0; q < n; ++q) {
    if (!((lambda >> (n - 1 - q)) & 1)) continue;
    if (shot.settings[q] != "octa")
      throw domain_error("calibration_single_shot: calibration requires octahedron settings");
    value *= z_value(shot.outcomes[q]);
    if (value == 0.0) return 0.0;
  }
  return value;
}

CalibrationResult run_calibration(const RecordSet& records) {
  if (records.size() < 100) throw domain_error("run_calibration: need at least 100 shots");
  const int n = records.n_qubits;
  const Eigen::Index size = Eigen::Index{1} << n;
  CalibrationResult out;
  out.n_qubits = n;
  out.m_prime = records.size();
  out.coefficients = RealVector::Zero(size);
  RealVector sum_sq = RealVector::Zero(size);
  for (const auto& shot : records.shots) {
    for (Eigen::Index lambda = 0; lambda < size; ++lambda) {
      const double v = calibration_single_shot(shot, static_cast<std::uint32_t>(lambda));
      out.coefficients[lambda] += v;
      sum_sq[lambda] += v * v;
    }
  }
  const double m = static_cast<double>(records.size());
  out.coefficients /= m;
  out.std_errors.resize(size);
  for (Eigen::Index lambda = 0; lambda < size; ++lambda) {
    const double var = (sum_sq[lambda] - m * out.coefficients[lambda] * out.coefficients[lambda]) /
                       std::max(m - 1.0, 1.0);
    out.std_errors[lambda] = std::sqrt(std::max(var, 0.0) / m);
  }
  return out;
}

RealVector noisy_inverse_diagonal(const CalibrationResult& calib) {
  const int n = calib.n_qubits;
  const Eigen::Index size = Eigen::Index{1} << (2 * n);
  RealVector diag(size);
  for (Eigen::Index j = 0; j < size; ++j) {
    std::uint32_t lambda = 0;
    for (int q = 0; q < n; ++q)
      if ((j >> (2 * (n - 1 - q))) & 3) lambda |= 1u << (n - 1 - q);
    const double f = calib.coefficients[lambda];
    if (std::abs(f) < 1e-6)
      throw domain_error("noisy_inverse_diagonal: near-zero coefficient (singular calibration)");
    diag[j] = 1.0 / f;
  }
  return diag;
}

void write_calibration(std::ostream& out, const CalibrationResult& calib, std::uint64_t seed) {
  out << "# n_qubits = " << calib.n_qubits << ", M_prime = " << calib.m_prime
      << ", seed = " << seed << "\n";
  out.precision(17);
  const Eigen::Index size = calib.coefficients.size();
  for (Eigen::Index lambda = 0; lambda < size; ++lambda) {
    for (int q = calib.n_qubits - 1; q >= 0; --q) out << ((lambda >> q) & 1);
    out << ", " << calib.coefficients[lambda] << ", " << calib.std_errors[lambda] << "\n";
  }
}

CalibrationResult read_calibration(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#", 0) != 0)
    throw domain_error("read_calibration: missing header");
  CalibrationResult c;
  {
    std::istringstream hs(line);
    std::string tok;
    while (hs >> tok) {
      if (tok == "n_qubits") { hs >> tok >> c.n_qubits; }
      else if (tok == "M_prime") { hs >> tok >> c.m_prime; }
    }
  }
  const Eigen::Index size = Eigen::Index{1} << c.n_qubits;
  c.coefficients.resize(size);
  c.std_errors.resize(size);
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= size) throw domain_error("read_calibration: too many rows");
    std::istringstream ls(line);
    std::string bits;
    char comma;
    double f, se;
    ls >> bits >> f >> comma >> se;
    if (!bits.empty() && bits.back() == ',') bits.pop_back();
    std::uint32_t lambda = 0;
    for (char b : bits) lambda = (lambda << 1) | (b == '1' ? 1u : 0u);
    c.coefficients[lambda] = f;
    c.std_errors[lambda] = se;
    ++row;
  }
  if (row != size) throw domain_error("read_calibration: missing rows");
  return c;
}

void save_calibration(const std::string& path, const CalibrationResult& calib, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw domain_error("cannot open for writing: " + path);
  write_calibration(out, calib, seed);
}

CalibrationResult load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open calibration file: " + path);
  return read_calibration(in);
}

}  // namespace povmshadow
