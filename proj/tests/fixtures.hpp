#pragma once

// Shared generators and independent oracles for the test suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dephkit/bloch.hpp"
#include "dephkit/channels.hpp"
#include "dephkit/matcore.hpp"
#include "dephkit/memory.hpp"
#include "dephkit/superchannels.hpp"

namespace fx {

using namespace dephkit;

inline const Complex kI(0.0, 1.0);

inline Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(ix(rows), ix(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = Complex(n(rng), n(rng));
  return m;
}

inline ComplexMatrix random_psd(std::size_t dim, std::mt19937_64 &rng) {
  const ComplexMatrix g = random_matrix(dim, dim, rng);
  return g * g.adjoint();
}

inline DensityMatrix random_state(std::size_t dim, std::mt19937_64 &rng) {
  ComplexMatrix p = random_psd(dim, rng);
  p /= p.trace().real();
  return DensityMatrix(0.5 * (p + p.adjoint()));
}

/// Gram matrix of `dim` random unit vectors in C^rank.
inline GramMatrix random_gram(std::size_t dim, std::mt19937_64 &rng, std::size_t rank = 0) {
  if (rank == 0) rank = dim;
  ComplexMatrix v = random_matrix(rank, dim, rng);
  for (Eigen::Index c = 0; c < v.cols(); ++c) v.col(c).normalize();
  ComplexMatrix g = v.adjoint() * v;
  for (Eigen::Index k = 0; k < g.rows(); ++k) g(k, k) = 1.0;
  return GramMatrix(g);
}

/// 2x2 Gram [[1, c], [c*, 1]].
inline GramMatrix qubit_gram(Complex c) {
  ComplexMatrix g(2, 2);
  g << 1.0, c, std::conj(c), 1.0;
  return GramMatrix(g);
}

/// 2x2 Gram with off-diagonal uniformly drawn in the disk of radius r.
inline GramMatrix random_disk_gram(double r, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rad = r * std::sqrt(u(rng));
  return qubit_gram(std::polar(rad, 2.0 * M_PI * u(rng)));
}

inline ControlledUnitaryFamily random_family(std::size_t d, std::mt19937_64 &rng) {
  std::vector<ComplexMatrix> us;
  for (std::size_t i = 0; i < d; ++i) us.push_back(random_unitary(d * d, rng()));
  return ControlledUnitaryFamily(d, std::move(us));
}

inline SuperGram random_super_gram(std::size_t d, std::mt19937_64 &rng) {
  return gram_from_controlled_unitaries(random_family(d, rng), random_family(d, rng));
}

/// Gram matrix of the vectors psi_ik = V_i U_k |0>, by explicit inner products.
inline ComplexMatrix gram_by_vectors(const ControlledUnitaryFamily &pre, const ControlledUnitaryFamily &post) {
  const std::size_t d = pre.d();
  std::vector<ComplexVector> psi;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) psi.push_back(post.unitaries()[i] * pre.unitaries()[k].col(0));
  ComplexMatrix c(ix(d * d), ix(d * d));
  for (std::size_t r = 0; r < d * d; ++r)
    for (std::size_t s = 0; s < d * d; ++s) c(ix(r), ix(s)) = psi[s].dot(psi[r]);
  return c;
}

/// Random convex mixture of products of random 2x2 Grams (passive-compatible).
inline ComplexMatrix random_passive_mixture(std::size_t terms, double radius, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
  double total = 0.0;
  for (std::size_t t = 0; t < terms; ++t) {
    const double w = u(rng);
    total += w;
    sum += w * kron(random_disk_gram(radius, rng).mat(), random_disk_gram(radius, rng).mat());
  }
  return sum / total;
}

/// <i| E(|k><l|) |j> by direct Kraus application.
inline Complex channel_entry(const Channel &ch, std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  return ch(basis_op(ch.dim_in(), k, l))(ix(i), ix(j));
}

inline ComplexMatrix hadamard() {
  ComplexMatrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

inline ComplexMatrix sigma_x() {
  ComplexMatrix x(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  return x;
}

/// The maximally active qubit Gram matrix C_max.
inline ComplexMatrix c_max() {
  ComplexMatrix c(4, 4);
  c << 1, 0, 1, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1;
  return c;
}

/// Controlled-unitary families realizing C_max: psi_00 = psi_10 = |0>,
/// psi_01 = |1>, psi_11 = |2>.
inline std::pair<ControlledUnitaryFamily, ControlledUnitaryFamily> c_max_families() {
  const auto perm = [](std::size_t a, std::size_t b) {
    ComplexMatrix p = ComplexMatrix::Identity(4, 4);
    p.row(ix(a)).swap(p.row(ix(b)));
    return p;
  };
  const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  return {ControlledUnitaryFamily(2, {id, perm(0, 1)}), ControlledUnitaryFamily(2, {id, perm(1, 2)})};
}

/// Conjugation of system (x) memory by sum_i |i><i| (x) W_i, W_i unitary on the memory.
inline Channel controlled_on_system(std::size_t d, const std::vector<ComplexMatrix> &ws) {
  const std::size_t m = static_cast<std::size_t>(ws.front().rows());
  ComplexMatrix u = ComplexMatrix::Zero(ix(d * m), ix(d * m));
  for (std::size_t i = 0; i < d; ++i) u += kron(basis_op(d, i, i), ws[i]);
  return unitary_channel(u);
}

/// Realization with system-controlled memory unitaries, a mixed initial memory
/// and different memory dimensions before and after encoding:
/// encoder (d, m0) -> (d, m1) is an isometric embedding m0 -> m1 followed by
/// controlled unitaries; decoder (d, m1) -> (d, m2) is controlled unitaries
/// followed by tracing out part of the memory.
struct GeneralRealization {
  BipartiteChannel encoder;
  BipartiteChannel decoder;
  DensityMatrix tau;
};

inline GeneralRealization random_general_realization(std::size_t d, std::size_t m0, std::size_t m1,
                                                     std::size_t m2, std::mt19937_64 &rng) {
  // encoder: embed m0 into m1 (m1 >= m0), then controlled W_i
  std::vector<ComplexMatrix> w, v;
  for (std::size_t i = 0; i < d; ++i) {
    w.push_back(random_unitary(m1, rng()));
    v.push_back(random_unitary(m1, rng()));
  }
  ComplexMatrix embed = ComplexMatrix::Zero(ix(m1), ix(m0));
  embed.topLeftCorner(ix(m0), ix(m0)).setIdentity();
  const Channel embed_ch(d * m0, d * m1, {kron(ComplexMatrix::Identity(ix(d), ix(d)), embed)});
  const Channel enc = compose(controlled_on_system(d, w), embed_ch);

  // decoder: controlled V_i on m1 = m2 * rest, then discard the rest
  const std::size_t rest = m1 / m2;
  std::vector<ComplexMatrix> kraus;
  const ComplexMatrix cu = controlled_on_system(d, v).kraus().front();
  for (std::size_t r = 0; r < rest; ++r) {
    const ComplexMatrix bra = basis_ket(rest, r).adjoint();
    kraus.push_back(kron(ComplexMatrix::Identity(ix(d * m2), ix(d * m2)), bra) * cu);
  }
  const Channel dec(d * m1, d * m2, std::move(kraus));
  return {BipartiteChannel(d, m0, d, m1, enc), BipartiteChannel(d, m1, d, m2, dec), random_state(m0, rng)};
}

/// Jamiolkowski matrix of a channel by the explicit |Psi><Psi| construction.
inline ComplexMatrix jamiolkowski_oracle(const Channel &ch) {
  const std::size_t d = ch.dim_in();
  ComplexVector psi = ComplexVector::Zero(ix(d * d));
  for (std::size_t k = 0; k < d; ++k) psi(ix(idx(k, k, d))) = 1.0 / std::sqrt(static_cast<double>(d));
  const Channel ext = tensor(ch, identity_channel(d));
  return ext(psi * psi.adjoint());
}

/// Closed-form action of C_max on (Lambda, t).
inline AffineMap c_max_closed_form(const AffineMap &a) {
  const double w1 = a.lambda(0, 2), w2 = a.lambda(1, 2), w3 = a.lambda(2, 2);
  AffineMap out;
  out.lambda.setZero();
  out.lambda(0, 2) = 0.5 * (w1 + a.t(0));
  out.lambda(1, 2) = 0.5 * (w2 + a.t(1));
  out.lambda(2, 2) = w3;
  out.t = Eigen::Vector3d(0.5 * (w1 + a.t(0)), 0.5 * (w2 + a.t(1)), a.t(2));
  return out;
}

} // namespace fx
