#include "dephkit/bloch.hpp"

#include "dephkit/errors.hpp"

namespace dephkit {

namespace {

const Complex I(0.0, 1.0);

// Bloch vector components Tr(X sigma_j) of a 2x2 operator.
Eigen::Vector3d bloch_components(const ComplexMatrix &x) {
  Eigen::Vector3d r;
  for (int j = 0; j < 3; ++j) r(j) = (x * pauli(j)).trace().real();
  return r;
}

AffineMap affine_from_action(const auto &apply) {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  AffineMap a;
  a.t = bloch_components(apply(0.5 * id));
  for (int k = 0; k < 3; ++k) {
    const ComplexMatrix plus = apply(0.5 * (id + pauli(k)));
    const ComplexMatrix minus = apply(0.5 * (id - pauli(k)));
    a.lambda.col(k) = 0.5 * bloch_components(plus - minus);
  }
  return a;
}

} // namespace

bool AffineMap::is_contraction(double tol) const {
  const Eigen::Matrix3d gram = lambda.transpose() * lambda;
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(gram).eigenvalues().maxCoeff() <= 1.0 + tol;
}

ComplexMatrix pauli(int k) {
  ComplexMatrix s(2, 2);
  switch (k) {
  case 0: s << 0, 1, 1, 0; break;
  case 1: s << 0, -I, I, 0; break;
  case 2: s << 1, 0, 0, -1; break;
  default: throw DimensionError("pauli: index must be 0, 1 or 2");
  }
  return s;
}

AffineMap affine_from_channel(const Channel &ch) {
  if (ch.dim_in() != 2 || ch.dim_out() != 2) {
    throw UnsupportedDimensionError("affine_from_channel: qubit channel required");
  }
  if (!ch.is_trace_preserving()) throw ContractError("affine_from_channel: channel is not TP");
  return affine_from_action([&](const ComplexMatrix &x) { return ch(x); });
}

AffineMap affine_from_jamiolkowski(const ComplexMatrix &jam) {
  if (jam.rows() != 4 || jam.cols() != 4) {
    throw UnsupportedDimensionError("affine_from_jamiolkowski: 4x4 matrix required");
  }
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  return affine_from_action([&](const ComplexMatrix &x) -> ComplexMatrix {
    return 2.0 * partial_trace(jam * kron(id, x.transpose()), {2, 2}, Subsystem::Second);
  });
}

ComplexMatrix jam_from_affine(const AffineMap &a) {
  const auto &L = a.lambda;
  const double u1 = L(0, 0), u2 = L(1, 0), u3 = L(2, 0);
  const double v1 = L(0, 1), v2 = L(1, 1), v3 = L(2, 1);
  const double w1 = L(0, 2), w2 = L(1, 2), w3 = L(2, 2);
  const double t1 = a.t(0), t2 = a.t(1), t3 = a.t(2);
  ComplexMatrix j(4, 4);
  j << 1 + t3 + w3, u3 + I * v3, t1 - I * t2 + w1 - I * w2, u1 - I * u2 + I * v1 + v2,
      u3 - I * v3, 1 + t3 - w3, u1 - I * u2 - I * v1 - v2, t1 - I * t2 - w1 + I * w2,
      t1 + I * t2 + w1 + I * w2, u1 + I * u2 + I * v1 - v2, 1 - t3 - w3, -u3 - I * v3,
      u1 + I * u2 - I * v1 + v2, t1 + I * t2 - w1 - I * w2, -u3 + I * v3, 1 - t3 + w3;
  return 0.25 * j;
}

AffineMap l_star() {
  AffineMap a;
  a.lambda = Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal();
  return a;
}

AffineMap l_star_apply(const AffineMap &a) {
  const Eigen::Matrix3d proj = l_star().lambda;
  return {proj * a.lambda, proj * a.t};
}

ComplexMatrix l_star_operator(const ComplexMatrix &x) {
  if (x.rows() != 2 || x.cols() != 2) {
    throw UnsupportedDimensionError("l_star_operator: 2x2 operator required");
  }
  ComplexMatrix out = x;
  const Complex mean = 0.5 * (x(0, 0) + x(1, 1));
  out(0, 0) = mean;
  out(1, 1) = mean;
  return out;
}

AffineMap gram_action_on_affine(const SuperGram &sg, const AffineMap &a, double tol) {
  if (sg.d() != 2) throw UnsupportedDimensionError("gram_action_on_affine: qubit SuperGram required");
  const ComplexMatrix jam = jam_from_affine(a);
  if (!is_psd(jam, tol)) {
    throw ContractError("gram_action_on_affine: input map is not completely positive");
  }
  const ComplexMatrix out = schur(jam, sg.mat());
  const double tp_defect =
      max_abs(partial_trace(out, {2, 2}, Subsystem::First) - 0.5 * ComplexMatrix::Identity(2, 2));
  if (tp_defect > tol || !is_psd(out, tol)) {
    throw ContractError("gram_action_on_affine: result is not a valid Jamiolkowski state");
  }
  return affine_from_jamiolkowski(out);
}

} // namespace dephkit
