#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "povmshadow/calibrate.hpp"
#include "povmshadow/measure.hpp"
#include "povmshadow/qcore.hpp"
#include "povmshadow/shadows.hpp"

using namespace povmshadow;

namespace {

DensityMatrix zero_state(int n) {
  const int d = 1 << n;
  Matrix m = Matrix::Zero(d, d);
  m(0, 0) = 1.0;
  return DensityMatrix(std::move(m), n);
}

ShotRecord octa_shot(std::vector<int> outcomes) {
  ShotRecord s;
  s.outcomes = std::move(outcomes);
  s.settings.assign(s.outcomes.size(), "octa");
  return s;
}

// Brute-force oracle: the per-qubit noisy measurement channel in the
// normalized Pauli basis, E_noisy(X)_l = sum_l <psi_l|N(X)|psi_l> M(.)
// computed as L = sum_l |psi_l/sqrt3>><<psi_l| N, where N is the noise
// channel's Liouville matrix. f_lambda are the diagonal entries (identity
// block, mean of the three traceless entries).
Eigen::Matrix4d channel_liouville(const std::function<Matrix(const Matrix&)>& chan) {
  // basis sigma_j = {I,X,Y,Z}/sqrt2
  std::vector<Matrix> sigma(4, Matrix::Zero(2, 2));
  sigma[0] << 1, 0, 0, 1;
  sigma[1] << 0, 1, 1, 0;
  sigma[2] << 0, cplx(0, -1), cplx(0, 1), 0;
  sigma[3] << 1, 0, 0, -1;
  for (auto& s : sigma) s /= std::sqrt(2.0);
  Eigen::Matrix4d l;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) l(i, j) = (sigma[i].adjoint() * chan(sigma[j])).trace().real();
  return l;
}

// The noisy measurement channel before inversion:
// rho -> sum_l Tr(N(rho) E_l) |psi_l><psi_l|. Its traceless-block
// eigenvalues are the f_1 coefficients (1/3 for no noise).
Eigen::Matrix4d measured_channel(const std::function<Matrix(const Matrix&)>& noise) {
  const auto& povm = octahedron_povm();
  auto chan = [&](const Matrix& x) {
    Matrix nx = noise(x);
    Matrix out = Matrix::Zero(2, 2);
    for (int l = 0; l < 6; ++l) {
      const double w = (Matrix(povm.effects[l]) * nx).trace().real();
      out += w * (povm.vectors[l] * povm.vectors[l].adjoint());
    }
    return out;
  };
  return channel_liouville(chan);
}

}  // namespace

TEST_CASE("calibration_single_shot values") {
  CHECK(calibration_single_shot(octa_shot({3}), 0) == 1.0);  // empty product

  // oracle: <psi|Z|psi> per octahedron vector
  CHECK(calibration_single_shot(octa_shot({0}), 1) == doctest::Approx(1.0));   // H
  CHECK(calibration_single_shot(octa_shot({1}), 1) == doctest::Approx(-1.0));  // V
  for (int l = 2; l < 6; ++l)
    CHECK(calibration_single_shot(octa_shot({l}), 1) == doctest::Approx(0.0));

  // N=2, lambda=11, outcomes (H, V) -> -1
  CHECK(calibration_single_shot(octa_shot({0, 1}), 3) == doctest::Approx(-1.0));
  // lambda=10 looks only at the first qubit
  CHECK(calibration_single_shot(octa_shot({0, 1}), 2) == doctest::Approx(1.0));

  ShotRecord bad = octa_shot({0});
  bad.settings = {"pauli_z"};
  CHECK_THROWS_AS(calibration_single_shot(bad, 1), domain_error);
}

TEST_CASE("noiseless calibration recovers the ideal coefficients") {
  auto policy1 = MeasurementPolicy::uniform("octa", 1);
  auto rec1 = sample_shots(zero_state(1), policy1, 100000, 11, NoiseModel::none(), "zero:1");
  auto calib1 = run_calibration(rec1);
  CHECK(calib1.coefficient(0) == doctest::Approx(1.0));
  CHECK(std::abs(calib1.coefficient(1) - 1.0 / 3.0) < 4.0 * calib1.std_errors(1));

  auto policy2 = MeasurementPolicy::uniform("octa", 2);
  auto rec2 = sample_shots(zero_state(2), policy2, 100000, 12, NoiseModel::none(), "zero:2");
  auto calib2 = run_calibration(rec2);
  const double expect[4] = {1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 9.0};
  for (int lam = 1; lam < 4; ++lam)
    CHECK(std::abs(calib2.coefficient(lam) - expect[lam]) < 4.0 * calib2.std_errors(lam));
}

TEST_CASE("calibration matches the brute-force channel, Pauli noise") {
  const Eigen::Vector3d delta(0.12, 0.05, 0.2);
  auto noise_fn = [&](const Matrix& x) {
    std::vector<Matrix> p(3, Matrix::Zero(2, 2));
    p[0] << 0, 1, 1, 0;
    p[1] << 0, cplx(0, -1), cplx(0, 1), 0;
    p[2] << 1, 0, 0, -1;
    Matrix out = (1.0 - delta.sum() / 3.0) * x;
    for (int i = 0; i < 3; ++i) out += (delta(i) / 3.0) * p[i] * x * p[i];
    return out;
  };
  Eigen::Matrix4d l = measured_channel(noise_fn);
  const double f0_true = l(0, 0);
  // the |0>-state estimator probes the channel's Z response
  const double f1_true = l(3, 3);
  CHECK(f1_true == doctest::Approx((1.0 - 2.0 * (delta(0) + delta(1)) / 3.0) / 3.0)
                       .epsilon(1e-12));

  auto model = NoiseModel::pauli_fixed(delta);
  auto rec = sample_shots(zero_state(1), MeasurementPolicy::uniform("octa", 1), 100000, 31,
                          model, "zero:1");
  auto calib = run_calibration(rec);
  CHECK(f0_true == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(calib.coefficient(1) - f1_true) < 4.0 * calib.std_errors(1));
}

TEST_CASE("calibration matches the brute-force channel, amplitude damping") {
  // damping toward |1>, so the calibration state |0> is affected
  const double g = 0.25;
  Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Identity(), k1 = Eigen::Matrix2cd::Zero();
  k0(0, 0) = std::sqrt(1.0 - g);
  k1(1, 0) = std::sqrt(g);
  auto noise_fn = [&](const Matrix& x) {
    return Matrix(Matrix(k0) * x * Matrix(k0).adjoint() +
                  Matrix(k1) * x * Matrix(k1).adjoint());
  };
  Eigen::Matrix4d l = measured_channel(noise_fn);
  // amplitude damping is not unital; the estimator sees the mean z-signal on
  // |0>, which is the Z response of the measured channel to the |0><0| input
  RealVector in = to_liouville(zero_state(1).entries);
  Eigen::Vector4d out = l * Eigen::Vector4d(in(0), in(1), in(2), in(3));
  // mean z(l) equals the Z trace of the measured-channel output
  const double f1_true = out(3) / in(3);
  CHECK(f1_true == doctest::Approx((1.0 - 2.0 * g) / 3.0).epsilon(1e-12));

  auto model = NoiseModel::kraus_list({k0, k1});
  auto rec = sample_shots(zero_state(1), MeasurementPolicy::uniform("octa", 1), 100000, 37,
                          model, "zero:1");
  auto calib = run_calibration(rec);
  CHECK(std::abs(calib.coefficient(1) - f1_true) < 4.0 * calib.std_errors(1));
}

TEST_CASE("noisy inverse diagonal") {
  auto ideal = CalibrationResult::ideal(1);
  RealVector diag = noisy_inverse_diagonal(ideal);
  CHECK(diag(0) == doctest::Approx(1.0).epsilon(1e-12));
  for (int j = 1; j < 4; ++j) CHECK(diag(j) == doctest::Approx(3.0).epsilon(1e-12));

  // inverse composed with the forward coefficients is the identity
  auto calib = CalibrationResult::ideal(2);
  RealVector inv = noisy_inverse_diagonal(calib);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    RealVector v(16);
    for (int i = 0; i < 16; ++i) v(i) = rng.normal();
    RealVector forward = v;
    for (int j = 0; j < 16; ++j) forward(j) /= inv(j);
    RealVector back = forward.cwiseProduct(inv);
    CHECK((back - v).cwiseAbs().maxCoeff() < 1e-12);
  }

  auto singular = CalibrationResult::ideal(1);
  singular.coefficients(1) = 1e-9;
  CHECK_THROWS(noisy_inverse_diagonal(singular));
}

TEST_CASE("calibrated pipeline corrects fixed Pauli noise") {
  const Eigen::Vector3d delta(0.1, 0.1, 0.1);
  auto model = NoiseModel::pauli_fixed(delta);
  auto rho = density(make_pure_state(0.6, 1.1));
  auto policy = MeasurementPolicy::uniform("octa", 1);
  const std::int64_t m = 100000;

  auto calib_rec = sample_shots(zero_state(1), policy, m, 41, model, "zero:1");
  auto calib = run_calibration(calib_rec);

  auto rec = sample_shots(rho, policy, m, 43, model);
  ShadowSet naive(rec);
  ShadowSet corrected(rec, calib);
  const double err_naive = (naive.mean_shadow().entries - rho.entries).cwiseAbs().maxCoeff();
  const double err_corr = (corrected.mean_shadow().entries - rho.entries).cwiseAbs().maxCoeff();
  CHECK(err_corr < err_naive);
  CHECK(err_corr < 0.02);
}

TEST_CASE("calibration serialization round-trip") {
  auto rec = sample_shots(zero_state(2), MeasurementPolicy::uniform("octa", 2), 5000, 51,
                          NoiseModel::pauli_fixed(Eigen::Vector3d(0.05, 0.1, 0.02)), "zero:2");
  auto calib = run_calibration(rec);

  std::stringstream ss;
  write_calibration(ss, calib, 51);
  auto back = read_calibration(ss);
  CHECK(back.n_qubits == calib.n_qubits);
  CHECK(back.m_prime == calib.m_prime);
  CHECK((back.coefficients - calib.coefficients).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.std_errors - calib.std_errors).cwiseAbs().maxCoeff() == 0.0);

  std::stringstream ss2;
  write_calibration(ss2, back, 51);
  CHECK(ss2.str() == ss.str());
}
