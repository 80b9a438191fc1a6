#pragma once

// Affine Bloch-ball representation of qubit linear maps:
//   (I + r.sigma)/2  ->  (I + (Lambda r + t).sigma)/2

#include <Eigen/Dense>

#include "dephkit/channels.hpp"
#include "dephkit/superchannels.hpp"

namespace dephkit {

struct AffineMap {
  Eigen::Matrix3d lambda = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  /// Lambda^T Lambda <= I within tol (necessary for positivity).
  bool is_contraction(double tol = 1e-9) const;

  static AffineMap identity() { return {}; }
};

/// The Pauli matrices sigma_1, sigma_2, sigma_3 (k = 0, 1, 2).
ComplexMatrix pauli(int k);

AffineMap affine_from_channel(const Channel &ch);

/// Affine parameters of the (trace-preserving) map encoded by a 4x4
/// Jamiolkowski matrix, using E(X) = 2 Tr_2[J (I (x) X^T)].
AffineMap affine_from_jamiolkowski(const ComplexMatrix &jam);

/// Closed-form 4x4 Jamiolkowski matrix of an affine map. Hermitian with
/// unit trace; PSD iff the map is completely positive.
ComplexMatrix jam_from_affine(const AffineMap &a);

/// The x-y plane projection: Lambda = diag(1,1,0), t = 0. Positive but not
/// completely positive.
AffineMap l_star();

/// l_star after `a`.
AffineMap l_star_apply(const AffineMap &a);

/// l_star extended linearly to an arbitrary 2x2 operator: keeps the
/// off-diagonal entries and replaces both diagonal entries by their mean.
ComplexMatrix l_star_operator(const ComplexMatrix &x);

/// Affine parameters of Xi_C[L] for a CP-TP qubit map L, computed through the
/// Jamiolkowski Schur action. Throws ContractError when the Schur product is
/// not a valid Jamiolkowski state.
AffineMap gram_action_on_affine(const SuperGram &sg, const AffineMap &a, double tol = 1e-9);

} // namespace dephkit
