#pragma once

// Dense complex matrix kernel.
//
// Composite indices of a bipartite space A (x) B are flattened row-major:
// (a, b) -> a * dimB + b. Every four-index formula in the library is read
// with this convention.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace dephkit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultHermiticityTol = 1e-9;
inline constexpr double kDefaultPsdTol = 1e-9;

struct DimsPair {
  std::size_t dimA = 1;
  std::size_t dimB = 1;

  std::size_t total() const noexcept { return dimA * dimB; }
};

enum class Subsystem { First, Second };

/// Composite index of (a, b) with b ranging over `dimB` values.
constexpr std::size_t idx(std::size_t a, std::size_t b, std::size_t dimB) noexcept {
  return a * dimB + b;
}

/// Throws DimensionError when `m` holds a NaN or infinite entry.
void require_finite(const ComplexMatrix &m);

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b);

/// Entrywise (Hadamard/Schur) product.
ComplexMatrix schur(const ComplexMatrix &a, const ComplexMatrix &b);

ComplexMatrix partial_trace(const ComplexMatrix &m, DimsPair dims, Subsystem which);

/// Transpose of the selected tensor factor. Involutive.
ComplexMatrix partial_transpose(const ComplexMatrix &m, DimsPair dims, Subsystem which);

/// Reshuffling (realignment) of a d^2 x d^2 matrix:
/// out[idx(i,j), idx(k,l)] = m[idx(i,k), idx(j,l)]. Involutive.
ComplexMatrix reshuffle(const ComplexMatrix &m, std::size_t d);

/// Row-major vectorization: v[idx(i,j)] = m(i,j).
ComplexVector flatten(const ComplexMatrix &m);
ComplexMatrix unflatten(const ComplexVector &v, std::size_t rows, std::size_t cols);

/// Computational basis column vector |k> of dimension `dim`.
ComplexVector basis_ket(std::size_t dim, std::size_t k);

/// |a><b| in dimension `dim`.
ComplexMatrix basis_op(std::size_t dim, std::size_t a, std::size_t b);

double max_abs(const ComplexMatrix &m);
double hermiticity_defect(const ComplexMatrix &m);

/// Eigenvalues of (m + m^dagger)/2 in ascending order, after checking that
/// m is Hermitian within `hermiticity_tol` (ContractError otherwise).
RealVector eigvals_hermitian(const ComplexMatrix &m,
                             double hermiticity_tol = kDefaultHermiticityTol);

double min_eig_hermitian(const ComplexMatrix &m,
                         double hermiticity_tol = kDefaultHermiticityTol);

/// Hermitian within `tol` and smallest eigenvalue >= -tol. Never throws on
/// non-Hermitian input.
bool is_psd(const ComplexMatrix &m, double tol = kDefaultPsdTol);

bool is_unitary(const ComplexMatrix &m, double tol = 1e-9);

/// Completes an orthonormal set of columns to a full orthonormal basis by
/// Gram-Schmidt against the computational basis vectors, taken in order.
ComplexMatrix complete_orthonormal_basis(const ComplexMatrix &columns, double tol = 1e-10);

} // namespace dephkit
