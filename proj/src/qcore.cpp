#include "povmshadow/qcore.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace povmshadow {

namespace {

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

int qubits_of_dim(Eigen::Index d, const char* what) {
  if (!is_power_of_two(d)) throw domain_error(std::string(what) + ": dimension is not a power of two");
  int n = 0;
  while ((Eigen::Index{1} << n) < d) ++n;
  return n;
}

void require_hermitian(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw domain_error(std::string(what) + ": not square");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw domain_error(std::string(what) + ": not Hermitian within 1e-12");
}

Matrix hermitian_sqrt(const Matrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  RealVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < kEigenvalueFloor) throw domain_error(std::string(what) + ": input is not PSD");
    if (ev[i] < 0.0) ev[i] = 0.0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

const Matrix& pauli(int j) {
  static const Matrix p[4] = {
      (Matrix(2, 2) << 1, 0, 0, 1).finished(),
      (Matrix(2, 2) << 0, 1, 1, 0).finished(),
      (Matrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
      (Matrix(2, 2) << 1, 0, 0, -1).finished()};
  return p[j];
}

}  // namespace

PureState::PureState(Vector amps, int n) : amplitudes(std::move(amps)), n_qubits(n) {
  if (amplitudes.size() != (Eigen::Index{1} << n_qubits))
    throw domain_error("PureState: amplitude length does not match qubit count");
  if (std::abs(amplitudes.norm() - 1.0) > 1e-12)
    throw domain_error("PureState: not normalized within 1e-12");
}

DensityMatrix::DensityMatrix(Matrix m, int n) : entries(std::move(m)), n_qubits(n) {
  require_hermitian(entries, "DensityMatrix");
  if (entries.rows() != (Eigen::Index{1} << n_qubits))
    throw domain_error("DensityMatrix: dimension does not match qubit count");
  if (std::abs(entries.trace().real() - 1.0) > kTraceTol || std::abs(entries.trace().imag()) > kTraceTol)
    throw domain_error("DensityMatrix: trace differs from 1 beyond 1e-12");
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigenvalueFloor)
    throw domain_error("DensityMatrix: negative eigenvalue beyond -1e-10");
}

HermitianOperator::HermitianOperator(Matrix m) : entries(std::move(m)) {
  require_hermitian(entries, "HermitianOperator");
}

PureState make_pure_state(double gamma, double phi) {
  Vector amps(2);
  amps[0] = std::cos(gamma);
  amps[1] = std::sin(gamma) * cplx(std::cos(phi), std::sin(phi));
  amps /= amps.norm();
  return PureState(std::move(amps), 1);
}

PureState make_two_photon_state(double eta) {
  if (eta < 0.0 || eta > 1.0) throw domain_error("make_two_photon_state: eta outside [0, 1]");
  Vector amps = Vector::Zero(4);
  amps[1] = std::sqrt(eta);
  amps[2] = std::sqrt(1.0 - eta);
  return PureState(std::move(amps), 2);
}

DensityMatrix density(const PureState& psi) {
  return DensityMatrix(psi.amplitudes * psi.amplitudes.adjoint(), psi.n_qubits);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.entries, b.entries), a.n_qubits + b.n_qubits);
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(kron(a.entries, b.entries));
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw domain_error("fidelity: dimension mismatch");
  const Matrix sa = hermitian_sqrt(a.entries, "fidelity");
  const Matrix inner = sa * b.entries * sa;
  const Matrix si = hermitian_sqrt((inner + inner.adjoint()) / 2.0, "fidelity");
  double f = si.trace().real();
  return std::min(std::max(f, 0.0), 1.0);
}

std::pair<RealVector, Matrix> eigen_hermitian(const HermitianOperator& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.entries);
  return {es.eigenvalues(), es.eigenvectors()};
}

RealVector to_liouville(const Matrix& x) {
  const int n = qubits_of_dim(x.rows(), "to_liouville");
  const Eigen::Index size = Eigen::Index{1} << (2 * n);
  RealVector coords(size);
  const double scale = std::pow(std::sqrt(2.0), -n);
  for (Eigen::Index j = 0; j < size; ++j) {
    Matrix sigma = Matrix::Identity(1, 1);
    Eigen::Index rest = j;
    for (int q = 0; q < n; ++q) {
      const int digit = static_cast<int>((rest >> (2 * (n - 1 - q))) & 3);
      sigma = kron(sigma, pauli(digit));
      rest &= ~(Eigen::Index{3} << (2 * (n - 1 - q)));
    }
    coords[j] = (scale * (sigma * x).trace()).real();
  }
  return coords;
}

Matrix from_liouville(const RealVector& coords) {
  const int n = liouville_qubits(coords);
  const Eigen::Index d = Eigen::Index{1} << n;
  Matrix x = Matrix::Zero(d, d);
  const double scale = std::pow(std::sqrt(2.0), -n);
  for (Eigen::Index j = 0; j < coords.size(); ++j) {
    if (coords[j] == 0.0) continue;
    Matrix sigma = Matrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
      const int digit = static_cast<int>((j >> (2 * (n - 1 - q))) & 3);
      sigma = kron(sigma, pauli(digit));
    }
    x += coords[j] * scale * sigma;
  }
  return x;
}

int liouville_qubits(const RealVector& coords) {
  int n = 0;
  while ((Eigen::Index{1} << (2 * n)) < coords.size()) ++n;
  if ((Eigen::Index{1} << (2 * n)) != coords.size())
    throw domain_error("liouville vector length is not a power of four");
  return n;
}

DensityMatrix cholesky_compose(const RealVector& r, int d) {
  if (r.size() != Eigen::Index{d} * d) throw domain_error("cholesky_compose: expected d^2 parameters");
  if (r.cwiseAbs().maxCoeff() == 0.0) throw domain_error("cholesky_compose: all-zero parameters");
  Matrix t = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) t(i, i) = r[i];
  Eigen::Index p = d;
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < i; ++j) {
      t(i, j) = cplx(r[p], r[p + 1]);
      p += 2;
    }
  Matrix tau = t * t.adjoint();
  const double tr = tau.trace().real();
  if (tr <= 0.0) throw domain_error("cholesky_compose: zero normalization");
  tau /= tr;
  tau = (tau + tau.adjoint()) / 2.0;
  return DensityMatrix(std::move(tau), qubits_of_dim(d, "cholesky_compose"));
}

RealVector cholesky_params(const DensityMatrix& tau) {
  const int d = tau.dim();
  Matrix jittered = tau.entries + 1e-10 * Matrix::Identity(d, d);
  Eigen::LLT<Matrix> llt(jittered);
  if (llt.info() != Eigen::Success) throw domain_error("cholesky_params: factorization failed");
  const Matrix t = llt.matrixL();
  RealVector r(Eigen::Index{d} * d);
  for (int i = 0; i < d; ++i) r[i] = t(i, i).real();
  Eigen::Index p = d;
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < i; ++j) {
      r[p] = t(i, j).real();
      r[p + 1] = t(i, j).imag();
      p += 2;
    }
  return r;
}

PureState pure_compose(const RealVector& r, int d) {
  if (r.size() != 2 * Eigen::Index{d} - 1) throw domain_error("pure_compose: expected 2d-1 parameters");
  double norm2 = 0.0;
  for (int i = 0; i < d; ++i) norm2 += r[i] * r[i];
  if (norm2 == 0.0) throw domain_error("pure_compose: zero modulus block");
  const double norm = std::sqrt(norm2);
  Vector amps(d);
  amps[0] = std::abs(r[0]) / norm;
  for (int i = 1; i < d; ++i) {
    const double phase = r[d + i - 1];
    amps[i] = (r[i] / norm) * cplx(std::cos(phase), std::sin(phase));
  }
  // moduli enter the displayed vector unsigned; fold r_1's sign away so the
  // first amplitude stays real non-negative
  if (r[0] < 0.0)
    for (int i = 1; i < d; ++i) amps[i] = -amps[i];
  const double n = amps.norm();
  amps /= n;
  return PureState(std::move(amps), qubits_of_dim(d, "pure_compose"));
}

double check_two_design(const std::vector<Eigen::Vector2cd>& vectors) {
  if (vectors.empty()) throw domain_error("check_two_design: empty vector set");
  Matrix avg = Matrix::Zero(4, 4);
  for (const auto& v : vectors) {
    Matrix proj = v * v.adjoint();
    avg += kron(proj, proj);
  }
  avg /= static_cast<double>(vectors.size());
  Matrix swap = Matrix::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = 1;
  swap(1, 2) = swap(2, 1) = 1;
  const Matrix psym = (Matrix::Identity(4, 4) + swap) / 2.0;
  return (avg - psym / 3.0).cwiseAbs().maxCoeff();
}

}  // namespace povmshadow
