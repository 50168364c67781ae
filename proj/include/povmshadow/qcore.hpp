#pragma once

#include <utility>
#include <vector>

#include "povmshadow/types.hpp"

namespace povmshadow {

/// Normalized pure state on n_qubits qubits, basis {H,V}^N with H = |0>,
/// leftmost qubit slowest index.
struct PureState {
  Vector amplitudes;
  int n_qubits = 1;

  PureState() = default;
  PureState(Vector amps, int n);  // validates norm and power-of-two length
};

/// Hermitian, unit-trace, PSD (up to -1e-10 eigenvalue drift) state.
struct DensityMatrix {
  Matrix entries;
  int n_qubits = 1;

  DensityMatrix() = default;
  DensityMatrix(Matrix m, int n);  // validates all invariants

  int dim() const { return static_cast<int>(entries.rows()); }
};

/// Hermitian operator without trace or positivity constraints; classical
/// shadows live here.
struct HermitianOperator {
  Matrix entries;

  HermitianOperator() = default;
  explicit HermitianOperator(Matrix m);  // validates Hermiticity

  int dim() const { return static_cast<int>(entries.rows()); }
};

// --- state constructors ---

/// cos(gamma)|H> + sin(gamma) e^{i phi}|V>.
PureState make_pure_state(double gamma, double phi);

/// sqrt(eta)|HV> + sqrt(1-eta)|VH>.
PureState make_two_photon_state(double eta);

DensityMatrix density(const PureState& psi);

// --- linear algebra ---

Matrix kron(const Matrix& a, const Matrix& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);

/// Uhlmann fidelity Tr sqrt(sqrt(a) b sqrt(a)). Eigenvalues in
/// [-1e-10, 0) are clamped to zero; anything more negative is rejected.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending with
/// stably paired orthonormal eigenvector columns.
std::pair<RealVector, Matrix> eigen_hermitian(const HermitianOperator& x);

// --- Pauli-Liouville representation ---
// Basis sigma_j = tensor products of {I,X,Y,Z}/sqrt(2), index j in base 4
// with the leftmost qubit as the slowest digit. coords_j = Tr(sigma_j X).

RealVector to_liouville(const Matrix& x);
Matrix from_liouville(const RealVector& coords);

/// Number of qubits encoded by a length-4^N Liouville vector.
int liouville_qubits(const RealVector& coords);

// --- parameterizations ---

/// tau = T T^dag / Tr(T T^dag) with T lower triangular: diagonal r_1..r_d,
/// then each sub-diagonal entry consumes one (real, imag) pair row-major.
DensityMatrix cholesky_compose(const RealVector& r, int d);

/// Inverse map used for initialization: parameters of the Cholesky factor
/// of a density matrix (after an 1e-10 identity jitter).
RealVector cholesky_params(const DensityMatrix& tau);

/// Moduli r_1..r_d, phases r_{d+1}..r_{2d-1} on components 2..d; the first
/// amplitude is real non-negative.
PureState pure_compose(const RealVector& r, int d);

// --- 2-design check ---

/// Max-norm of (1/L) sum (|psi><psi|)^{x2} - (1/3) P_sym for single-qubit
/// rank-1 vectors.
double check_two_design(const std::vector<Eigen::Vector2cd>& vectors);

}  // namespace povmshadow
