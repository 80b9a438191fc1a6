#include "dephkit/channels.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dephkit/errors.hpp"

namespace dephkit {

namespace {

void check_square_dims(const Channel &ch, const char *op) {
  if (ch.dim_in() != ch.dim_out()) {
    throw DimensionError(std::string(op) + ": channel must map a space to itself");
  }
}

void check_tp(const Channel &ch, const char *op) {
  const double defect = ch.trace_preservation_defect();
  if (!(defect <= kStateTol)) {
    throw ContractError(std::string(op) + ": channel is not trace preserving (defect " +
                        std::to_string(defect) + ")");
  }
}

} // namespace

DensityMatrix::DensityMatrix(ComplexMatrix mat, double tol) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() == 0) {
    throw DimensionError("DensityMatrix: expected a non-empty square matrix");
  }
  require_finite(mat_);
  const double herm = hermiticity_defect(mat_);
  if (herm > tol) throw ValidationError("hermitian", herm, "DensityMatrix: not Hermitian");
  const double trace_dev = std::abs(mat_.trace() - Complex(1.0));
  if (trace_dev > tol) throw ValidationError("unit trace", trace_dev, "DensityMatrix: trace != 1");
  const double min_eig = min_eig_hermitian(mat_, tol);
  if (min_eig < -tol) {
    throw ValidationError("psd", -min_eig, "DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(const ComplexVector &psi) {
  const ComplexVector n = psi / psi.norm();
  return DensityMatrix(n * n.adjoint());
}

DensityMatrix DensityMatrix::basis(std::size_t dim, std::size_t k) {
  return DensityMatrix(basis_op(dim, k, k));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return DensityMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(dim));
}

Channel::Channel(std::size_t dim_in, std::size_t dim_out, std::vector<ComplexMatrix> kraus)
    : dim_in_(dim_in), dim_out_(dim_out), kraus_(std::move(kraus)) {
  if (dim_in_ == 0 || dim_out_ == 0) throw DimensionError("Channel: zero dimension");
  if (kraus_.empty()) throw DimensionError("Channel: empty Kraus list");
  for (const auto &k : kraus_) {
    if (static_cast<std::size_t>(k.rows()) != dim_out_ ||
        static_cast<std::size_t>(k.cols()) != dim_in_) {
      throw DimensionError("Channel: Kraus operator of shape " + std::to_string(k.rows()) + "x" +
                           std::to_string(k.cols()) + ", expected " + std::to_string(dim_out_) +
                           "x" + std::to_string(dim_in_));
    }
    require_finite(k);
  }
}

double Channel::trace_preservation_defect() const {
  const auto n = static_cast<Eigen::Index>(dim_in_);
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (const auto &k : kraus_) sum += k.adjoint() * k;
  return max_abs(sum - ComplexMatrix::Identity(n, n));
}

bool Channel::is_trace_preserving(double tol) const { return trace_preservation_defect() <= tol; }

ComplexMatrix Channel::operator()(const ComplexMatrix &x) const {
  if (static_cast<std::size_t>(x.rows()) != dim_in_ ||
      static_cast<std::size_t>(x.cols()) != dim_in_) {
    throw DimensionError("Channel: input has wrong dimension");
  }
  const auto n = static_cast<Eigen::Index>(dim_out_);
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (const auto &k : kraus_) out += k * x * k.adjoint();
  return out;
}

GramMatrix::GramMatrix(ComplexMatrix mat, double tol) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() == 0) {
    throw DimensionError("GramMatrix: expected a non-empty square matrix");
  }
  require_finite(mat_);
  const double diag_dev =
      (mat_.diagonal() - ComplexVector::Ones(mat_.rows())).cwiseAbs().maxCoeff();
  if (diag_dev > tol) {
    throw ValidationError("unit diagonal", diag_dev, "GramMatrix: diagonal entries differ from 1");
  }
  const double herm = hermiticity_defect(mat_);
  if (herm > tol) throw ValidationError("psd", herm, "GramMatrix: not Hermitian");
  const double min_eig = min_eig_hermitian(mat_, tol);
  if (min_eig < -tol) throw ValidationError("psd", -min_eig, "GramMatrix: not positive");
}

GramMatrix GramMatrix::ones(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return GramMatrix(ComplexMatrix::Ones(n, n));
}

GramMatrix GramMatrix::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return GramMatrix(ComplexMatrix::Identity(n, n));
}

TransitionMatrix::TransitionMatrix(RealMatrix mat, double tol) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) throw DimensionError("TransitionMatrix: not square");
  if (mat_.minCoeff() < -tol || mat_.maxCoeff() > 1.0 + tol) {
    throw ValidationError("probabilities", 0.0, "TransitionMatrix: entries outside [0,1]");
  }
  const double col_dev = (mat_.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (col_dev > tol) {
    throw ValidationError("column stochastic", col_dev, "TransitionMatrix: columns do not sum to 1");
  }
}

Channel identity_channel(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return Channel(d, d, {ComplexMatrix::Identity(n, n)});
}

Channel unitary_channel(const ComplexMatrix &u) {
  if (u.rows() != u.cols()) throw DimensionError("unitary_channel: not square");
  if (!is_unitary(u)) throw ContractError("unitary_channel: matrix is not unitary");
  const auto d = static_cast<std::size_t>(u.rows());
  return Channel(d, d, {u});
}

// D_C has Kraus operators sqrt(lambda_a) diag(v_a) for each eigenpair of C.
Channel dephasing_channel(const GramMatrix &c) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(c.mat());
  const auto &vals = solver.eigenvalues();
  const auto &vecs = solver.eigenvectors();
  std::vector<ComplexMatrix> kraus;
  for (Eigen::Index a = 0; a < vals.size(); ++a) {
    if (vals(a) <= 1e-14) continue;
    kraus.emplace_back((std::sqrt(vals(a)) * vecs.col(a)).asDiagonal());
  }
  return Channel(c.dim(), c.dim(), std::move(kraus));
}

Channel channel_from_jamiolkowski(const ComplexMatrix &jam, std::size_t d, double tol) {
  const auto n = static_cast<Eigen::Index>(d);
  if (jam.rows() != n * n || jam.cols() != n * n) {
    throw DimensionError("channel_from_jamiolkowski: expected a d^2 x d^2 matrix");
  }
  require_finite(jam);
  const double herm = hermiticity_defect(jam);
  if (herm > tol) {
    throw ContractError("channel_from_jamiolkowski: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (jam + jam.adjoint()));
  const auto &vals = solver.eigenvalues();
  const auto &vecs = solver.eigenvectors();
  if (vals.minCoeff() < -tol) {
    throw ContractError("channel_from_jamiolkowski: matrix is not PSD (min eigenvalue " +
                        std::to_string(vals.minCoeff()) + ")");
  }
  std::vector<ComplexMatrix> kraus;
  // J = (1/d) sum_n vec(K_n) vec(K_n)^dagger with vec(K)[idx(i,k)] = K(i,k)
  for (Eigen::Index a = vals.size() - 1; a >= 0; --a) {
    if (vals(a) <= 1e-15) continue;
    kraus.push_back(unflatten(std::sqrt(static_cast<double>(d) * vals(a)) * vecs.col(a), d, d));
  }
  if (kraus.empty()) kraus.push_back(ComplexMatrix::Zero(n, n));
  return Channel(d, d, std::move(kraus));
}

Channel compose(const Channel &second, const Channel &first) {
  if (first.dim_out() != second.dim_in()) throw DimensionError("compose: dimension mismatch");
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(first.kraus().size() * second.kraus().size());
  for (const auto &b : second.kraus())
    for (const auto &a : first.kraus()) kraus.emplace_back(b * a);
  return Channel(first.dim_in(), second.dim_out(), std::move(kraus));
}

Channel tensor(const Channel &first, const Channel &second) {
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(first.kraus().size() * second.kraus().size());
  for (const auto &a : first.kraus())
    for (const auto &b : second.kraus()) kraus.push_back(kron(a, b));
  return Channel(first.dim_in() * second.dim_in(), first.dim_out() * second.dim_out(),
                 std::move(kraus));
}

ComplexMatrix superop_from_kraus(const Channel &ch) {
  const auto rows = static_cast<Eigen::Index>(ch.dim_out() * ch.dim_out());
  const auto cols = static_cast<Eigen::Index>(ch.dim_in() * ch.dim_in());
  ComplexMatrix phi = ComplexMatrix::Zero(rows, cols);
  for (const auto &k : ch.kraus()) phi += kron(k, k.conjugate());
  return phi;
}

ComplexMatrix jamiolkowski(const Channel &ch) {
  check_square_dims(ch, "jamiolkowski");
  const std::size_t d = ch.dim_in();
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix jam = ComplexMatrix::Zero(n * n, n * n);
  for (const auto &k : ch.kraus()) {
    const ComplexVector v = flatten(k);
    jam += v * v.adjoint();
  }
  return jam / static_cast<double>(d);
}

DensityMatrix apply_channel(const Channel &ch, const DensityMatrix &rho) {
  if (rho.dim() != ch.dim_in()) throw DimensionError("apply_channel: dimension mismatch");
  const ComplexMatrix out = ch(rho.mat());
  // rejects the output of a trace-decreasing map
  return DensityMatrix(out);
}

DensityMatrix dephase_state(const DensityMatrix &rho, const GramMatrix &c) {
  if (rho.dim() != c.dim()) throw DimensionError("dephase_state: dimension mismatch");
  return DensityMatrix(schur(rho.mat(), c.mat()));
}

DensityMatrix max_dephase(const DensityMatrix &rho) {
  return dephase_state(rho, GramMatrix::identity(rho.dim()));
}

TransitionMatrix classical_action(const Channel &ch) {
  check_square_dims(ch, "classical_action");
  check_tp(ch, "classical_action");
  const std::size_t d = ch.dim_in();
  const auto n = static_cast<Eigen::Index>(d);
  RealMatrix t(n, n);
  for (std::size_t j = 0; j < d; ++j) {
    const ComplexMatrix out = ch(basis_op(d, j, j));
    for (Eigen::Index i = 0; i < n; ++i) t(i, static_cast<Eigen::Index>(j)) = out(i, i).real();
  }
  return TransitionMatrix(std::move(t));
}

bool is_mio(const Channel &ch, double tol) {
  check_square_dims(ch, "is_mio");
  const std::size_t d = ch.dim_in();
  for (std::size_t k = 0; k < d; ++k) {
    ComplexMatrix out = ch(basis_op(d, k, k));
    out.diagonal().setZero();
    if (max_abs(out) > tol) return false;
  }
  return true;
}

double l1_coherence(const ComplexMatrix &rho) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
      if (i != j) sum += std::abs(rho(i, j));
  return sum;
}

double l1_coherence(const DensityMatrix &rho) { return l1_coherence(rho.mat()); }

double cgp(const Channel &ch) {
  check_square_dims(ch, "cgp");
  check_tp(ch, "cgp");
  double best = 0.0;
  for (std::size_t k = 0; k < ch.dim_in(); ++k) {
    best = std::max(best, l1_coherence(ch(basis_op(ch.dim_in(), k, k))));
  }
  return best;
}

ComplexMatrix random_unitary(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(n);
  ComplexMatrix g(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m, m);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix column phases so the distribution is Haar
  for (Eigen::Index j = 0; j < m; ++j) {
    const Complex rjj = r(j, j);
    if (std::abs(rjj) > 0.0) q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

Channel random_channel(std::size_t d, std::size_t env_dim, std::uint64_t seed) {
  if (d < 2) throw ContractError("random_channel: d must be at least 2");
  if (env_dim < 1) throw ContractError("random_channel: env_dim must be at least 1");
  const ComplexMatrix u = random_unitary(d * env_dim, seed);
  const auto n = static_cast<Eigen::Index>(d);
  const auto e = static_cast<Eigen::Index>(env_dim);
  // isometry V = first d columns; output space ordered system (x) environment
  std::vector<ComplexMatrix> kraus(env_dim, ComplexMatrix(n, n));
  for (Eigen::Index env = 0; env < e; ++env)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k) kraus[env](i, k) = u(i * e + env, k);
  return Channel(d, d, std::move(kraus));
}

} // namespace dephkit
