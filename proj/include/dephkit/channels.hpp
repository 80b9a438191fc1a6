#pragma once

#include <cstdint>
#include <vector>

#include "dephkit/matcore.hpp"

namespace dephkit {

inline constexpr double kStateTol = 1e-9;

/// Hermitian, unit-trace, positive semidefinite matrix. Validated on
/// construction; inputs outside tolerance are rejected, never repaired.
class DensityMatrix {
public:
  explicit DensityMatrix(ComplexMatrix mat, double tol = kStateTol);

  const ComplexMatrix &mat() const noexcept { return mat_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mat_.rows()); }

  static DensityMatrix pure(const ComplexVector &psi);
  static DensityMatrix basis(std::size_t dim, std::size_t k);
  static DensityMatrix maximally_mixed(std::size_t dim);

private:
  ComplexMatrix mat_;
};

/// A completely positive map stored by its Kraus operators (each
/// dimOut x dimIn). Superoperator and Jamiolkowski forms are derived views.
class Channel {
public:
  Channel(std::size_t dim_in, std::size_t dim_out, std::vector<ComplexMatrix> kraus);

  std::size_t dim_in() const noexcept { return dim_in_; }
  std::size_t dim_out() const noexcept { return dim_out_; }
  const std::vector<ComplexMatrix> &kraus() const noexcept { return kraus_; }

  /// max |sum K^dagger K - I|
  double trace_preservation_defect() const;
  bool is_trace_preserving(double tol = kStateTol) const;

  /// Applies the map to an arbitrary (not necessarily positive) operator.
  ComplexMatrix operator()(const ComplexMatrix &x) const;

private:
  std::size_t dim_in_;
  std::size_t dim_out_;
  std::vector<ComplexMatrix> kraus_;
};

/// Positive matrix with unit diagonal; the dephasing channel rho -> rho (.) C.
class GramMatrix {
public:
  explicit GramMatrix(ComplexMatrix mat, double tol = kStateTol);

  const ComplexMatrix &mat() const noexcept { return mat_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mat_.rows()); }

  static GramMatrix ones(std::size_t dim);
  static GramMatrix identity(std::size_t dim);

private:
  ComplexMatrix mat_;
};

/// Column-stochastic matrix T with T(i, j) = <i| E(|j><j|) |i>.
class TransitionMatrix {
public:
  explicit TransitionMatrix(RealMatrix mat, double tol = kStateTol);

  const RealMatrix &mat() const noexcept { return mat_; }

private:
  RealMatrix mat_;
};

// Constructors of common channels.
Channel identity_channel(std::size_t d);
Channel unitary_channel(const ComplexMatrix &u);
Channel dephasing_channel(const GramMatrix &c);

/// Channel from its Jamiolkowski matrix J = (E (x) I)(|Psi><Psi|). J must be
/// PSD within `tol`; the Kraus operators come from its eigendecomposition.
Channel channel_from_jamiolkowski(const ComplexMatrix &jam, std::size_t d,
                                  double tol = kDefaultPsdTol);

/// Kraus-level composition: (second o first).
Channel compose(const Channel &second, const Channel &first);

/// E (x) F with Kraus operators K_a (x) L_b.
Channel tensor(const Channel &first, const Channel &second);

/// Phi = sum_n K_n (x) conj(K_n); Phi[idx(i,j), idx(k,l)] = <i|E(|k><l|)|j>.
ComplexMatrix superop_from_kraus(const Channel &ch);

/// J = (E (x) I)(|Psi><Psi|) for a d -> d channel. Satisfies Phi = d * reshuffle(J).
ComplexMatrix jamiolkowski(const Channel &ch);

DensityMatrix apply_channel(const Channel &ch, const DensityMatrix &rho);

/// rho (.) C
DensityMatrix dephase_state(const DensityMatrix &rho, const GramMatrix &c);
DensityMatrix max_dephase(const DensityMatrix &rho);

TransitionMatrix classical_action(const Channel &ch);

/// Whether every basis state is mapped to a state with off-diagonal
/// magnitudes <= tol.
bool is_mio(const Channel &ch, double tol = kStateTol);

/// Sum of off-diagonal magnitudes.
double l1_coherence(const ComplexMatrix &rho);
double l1_coherence(const DensityMatrix &rho);

/// Coherence-generating power: max_k l1_coherence(E(|k><k|)).
double cgp(const Channel &ch);

/// TP channel obtained from a Haar-random isometry d -> d * env_dim
/// (Stinespring form). Deterministic for a fixed seed.
Channel random_channel(std::size_t d, std::size_t env_dim, std::uint64_t seed);

/// Haar-random unitary of dimension n.
ComplexMatrix random_unitary(std::size_t n, std::uint64_t seed);

} // namespace dephkit
