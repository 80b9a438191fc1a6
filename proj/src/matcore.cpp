#include "dephkit/matcore.hpp"

#include <cmath>
#include <string>

#include "dephkit/errors.hpp"

namespace dephkit {

namespace {

void require_square(const ComplexMatrix &m, const char *op) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(op) + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
}

void require_bipartite(const ComplexMatrix &m, DimsPair dims, const char *op) {
  require_square(m, op);
  if (dims.dimA < 1 || dims.dimB < 1 ||
      static_cast<std::size_t>(m.rows()) != dims.total()) {
    throw DimensionError(std::string(op) + ": side " + std::to_string(m.rows()) +
                         " does not equal dimA*dimB = " + std::to_string(dims.total()));
  }
}

} // namespace

void require_finite(const ComplexMatrix &m) {
  if (!m.allFinite()) {
    throw DimensionError("matrix has non-finite entries");
  }
}

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix schur(const ComplexMatrix &a, const ComplexMatrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("schur: shape mismatch");
  }
  return a.cwiseProduct(b);
}

ComplexMatrix partial_trace(const ComplexMatrix &m, DimsPair dims, Subsystem which) {
  require_bipartite(m, dims, "partial_trace");
  const auto dA = static_cast<Eigen::Index>(dims.dimA);
  const auto dB = static_cast<Eigen::Index>(dims.dimB);
  if (which == Subsystem::Second) {
    ComplexMatrix out = ComplexMatrix::Zero(dA, dA);
    for (Eigen::Index a = 0; a < dA; ++a)
      for (Eigen::Index c = 0; c < dA; ++c)
        for (Eigen::Index b = 0; b < dB; ++b) out(a, c) += m(a * dB + b, c * dB + b);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(dB, dB);
  for (Eigen::Index b = 0; b < dB; ++b)
    for (Eigen::Index e = 0; e < dB; ++e)
      for (Eigen::Index a = 0; a < dA; ++a) out(b, e) += m(a * dB + b, a * dB + e);
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix &m, DimsPair dims, Subsystem which) {
  require_bipartite(m, dims, "partial_transpose");
  const auto dA = static_cast<Eigen::Index>(dims.dimA);
  const auto dB = static_cast<Eigen::Index>(dims.dimB);
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index a = 0; a < dA; ++a)
    for (Eigen::Index b = 0; b < dB; ++b)
      for (Eigen::Index c = 0; c < dA; ++c)
        for (Eigen::Index e = 0; e < dB; ++e) {
          if (which == Subsystem::Second)
            out(a * dB + b, c * dB + e) = m(a * dB + e, c * dB + b);
          else
            out(a * dB + b, c * dB + e) = m(c * dB + b, a * dB + e);
        }
  return out;
}

ComplexMatrix reshuffle(const ComplexMatrix &m, std::size_t d) {
  require_square(m, "reshuffle");
  const auto n = static_cast<Eigen::Index>(d);
  if (d == 0 || m.rows() != n * n) {
    throw DimensionError("reshuffle: side " + std::to_string(m.rows()) + " is not " +
                         std::to_string(d) + "^2");
  }
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l) out(i * n + j, k * n + l) = m(i * n + k, j * n + l);
  return out;
}

ComplexVector flatten(const ComplexMatrix &m) {
  ComplexVector v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

ComplexMatrix unflatten(const ComplexVector &v, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(v.size()) != rows * cols) {
    throw DimensionError("unflatten: vector length does not equal rows*cols");
  }
  ComplexMatrix m(rows, cols);
  const auto c = static_cast<Eigen::Index>(cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = v(i * c + j);
  return m;
}

ComplexVector basis_ket(std::size_t dim, std::size_t k) {
  if (k >= dim) throw DimensionError("basis_ket: index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(k)) = 1.0;
  return v;
}

ComplexMatrix basis_op(std::size_t dim, std::size_t a, std::size_t b) {
  if (a >= dim || b >= dim) throw DimensionError("basis_op: index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                        static_cast<Eigen::Index>(dim));
  m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
  return m;
}

double max_abs(const ComplexMatrix &m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix &m) {
  require_square(m, "hermiticity_defect");
  return max_abs(m - m.adjoint());
}

RealVector eigvals_hermitian(const ComplexMatrix &m, double hermiticity_tol) {
  const double defect = hermiticity_defect(m);
  if (!(defect <= hermiticity_tol)) {
    throw ContractError("matrix is not Hermitian: max |m - m^dagger| = " +
                        std::to_string(defect));
  }
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double min_eig_hermitian(const ComplexMatrix &m, double hermiticity_tol) {
  return eigvals_hermitian(m, hermiticity_tol).minCoeff();
}

bool is_psd(const ComplexMatrix &m, double tol) {
  if (m.rows() != m.cols() || !m.allFinite()) return false;
  if (m.size() == 0) return true;
  if (!(hermiticity_defect(m) <= tol)) return false;
  return min_eig_hermitian(m, tol) >= -tol;
}

bool is_unitary(const ComplexMatrix &m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols())) <= tol;
}

ComplexMatrix complete_orthonormal_basis(const ComplexMatrix &columns, double tol) {
  const Eigen::Index n = columns.rows();
  if (columns.cols() > n) throw DimensionError("complete_orthonormal_basis: too many columns");
  ComplexMatrix basis(n, n);
  Eigen::Index filled = columns.cols();
  basis.leftCols(filled) = columns;
  for (Eigen::Index k = 0; k < n && filled < n; ++k) {
    ComplexVector v = ComplexVector::Unit(n, k);
    // two passes of modified Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index c = 0; c < filled; ++c) v -= basis.col(c).dot(v) * basis.col(c);
    const double norm = v.norm();
    if (norm > tol) basis.col(filled++) = v / norm;
  }
  if (filled != n) throw ContractError("complete_orthonormal_basis: input is not orthonormal");
  return basis;
}

} // namespace dephkit
