#include "dephkit/memory.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dephkit/bloch.hpp"
#include "dephkit/errors.hpp"

namespace dephkit {

namespace {

Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

void require_qubit(const SuperGram &sg, const char *op) {
  if (sg.d() != 2) {
    throw UnsupportedDimensionError(std::string(op) + ": only defined for qubit superchannels (d = 2)");
  }
}

// Applies a 2x2 operator map to the second tensor factor of a 4x4 matrix.
template <class Map>
ComplexMatrix on_second_factor(const ComplexMatrix &m, const Map &map) {
  ComplexMatrix out(4, 4);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = map(m.block(2 * i, 2 * j, 2, 2));
  return out;
}

// out[idx(k,i), idx(l,j)] = m[idx(i,k), idx(j,l)]
ComplexMatrix swap_factors(const ComplexMatrix &m, std::size_t d) {
  const auto n = ix(d);
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l) out(k * n + i, l * n + j) = m(i * n + k, j * n + l);
  return out;
}

ComplexMatrix xy_plane_gram(double angle) {
  ComplexMatrix c(2, 2);
  c << 1.0, std::polar(1.0, -angle), std::polar(1.0, angle), 1.0;
  return c;
}

std::optional<ProductDecomposition> try_single_product(const ComplexMatrix &target, double tol) {
  const ComplexMatrix realigned = reshuffle(target, 2);
  Eigen::JacobiSVD<ComplexMatrix> svd(realigned, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto &s = svd.singularValues();
  if (s(1) > tol) return std::nullopt;
  // realigned = a b^T with a = vec(C1), b = vec(C2)
  const ComplexVector a = s(0) * svd.matrixU().col(0);
  const ComplexVector b = svd.matrixV().col(0).conjugate();
  if (std::abs(a(0)) < 1e-12) return std::nullopt;
  const ComplexMatrix first = unflatten(a / a(0), 2, 2);
  const ComplexMatrix second = unflatten(b * a(0), 2, 2);
  try {
    ProductDecomposition dec;
    dec.terms.push_back({1.0, GramMatrix(first, tol), GramMatrix(second, tol)});
    return dec;
  } catch (const ValidationError &) {
    return std::nullopt;
  }
}

ProductDecomposition fit_on_grid(const ComplexMatrix &target, std::size_t grid) {
  const std::size_t atoms = grid * grid;
  RealMatrix a(32, ix(atoms));
  std::vector<ComplexMatrix> factors(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    factors[g] = xy_plane_gram(2.0 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(grid));
  }
  for (std::size_t p = 0; p < grid; ++p)
    for (std::size_t q = 0; q < grid; ++q) {
      const ComplexMatrix atom = kron(factors[p], factors[q]);
      const auto col = ix(p * grid + q);
      for (Eigen::Index e = 0; e < 16; ++e) {
        a(e, col) = atom(e / 4, e % 4).real();
        a(16 + e, col) = atom(e / 4, e % 4).imag();
      }
    }
  RealVector b(32);
  for (Eigen::Index e = 0; e < 16; ++e) {
    b(e) = target(e / 4, e % 4).real();
    b(16 + e) = target(e / 4, e % 4).imag();
  }
  const RealVector x = nnls(a, b);
  const double total = x.sum();
  ProductDecomposition dec;
  for (std::size_t p = 0; p < grid; ++p)
    for (std::size_t q = 0; q < grid; ++q) {
      const double w = x(ix(p * grid + q));
      if (w <= 0.0) continue;
      dec.terms.push_back({w / total, GramMatrix(factors[p]), GramMatrix(factors[q])});
    }
  return dec;
}

} // namespace

ComplexMatrix ProductDecomposition::reconstruct() const {
  if (terms.empty()) return {};
  const auto n = terms.front().first.mat().rows() * terms.front().second.mat().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (const auto &t : terms) sum += t.weight * kron(t.first.mat(), t.second.mat());
  return sum;
}

double ProductDecomposition::total_weight() const {
  double s = 0.0;
  for (const auto &t : terms) s += t.weight;
  return s;
}

FamilyParams::FamilyParams(Complex a, Complex b) : alpha(a), beta(b) {
  constexpr double slack = 1e-12;
  if (!std::isfinite(std::abs(a)) || !std::isfinite(std::abs(b)) || std::abs(a) > 1.0 + slack ||
      std::abs(b) > 1.0 + slack) {
    throw ContractError("FamilyParams: alpha and beta must lie in the closed unit disk");
  }
}

bool is_passive_compatible(const SuperGram &sg, double tol) {
  const std::size_t d = sg.d();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const ComplexVector diag = sg.block(i, j).diagonal();
      const Complex mean = diag.mean();
      if ((diag.array() - mean).abs().maxCoeff() > tol) return false;
    }
  return true;
}

double memory_activity_qubit(const SuperGram &sg) {
  require_qubit(sg, "memory_activity_qubit");
  return 2.0 * std::abs(sg.at(0, 0, 1, 0) - sg.at(0, 1, 1, 1));
}

double l1_distance(const ComplexMatrix &a, const ComplexMatrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("l1_distance: shape mismatch");
  }
  return (a - b).cwiseAbs().sum();
}

SuperGram nearest_passive_qubit(const SuperGram &sg, double tol) {
  require_qubit(sg, "nearest_passive_qubit");
  return SuperGram(on_second_factor(sg.mat(), l_star_operator), 2, tol);
}

ProductDecomposition decompose_product_qubit(const SuperGram &sg, double tol,
                                             const DecomposeOptions &options) {
  require_qubit(sg, "decompose_product_qubit");
  if (!is_passive_compatible(sg, tol)) {
    throw ContractError("decompose_product_qubit: Gram matrix is not passive-compatible "
                        "(diagonal of C_01 is not constant)");
  }
  // (l_star (x) l_star)(C); leaves a passive-compatible C unchanged up to tol
  const ComplexMatrix projected = swap_factors(
      on_second_factor(swap_factors(on_second_factor(sg.mat(), l_star_operator), 2), l_star_operator),
      2);

  if (auto single = try_single_product(projected, tol)) {
    if (max_abs(single->reconstruct() - sg.mat()) <= tol) return *single;
  }

  double residual = 0.0;
  for (const std::size_t grid : {options.grid, options.refined_grid}) {
    ProductDecomposition dec = fit_on_grid(projected, grid);
    residual = max_abs(dec.reconstruct() - sg.mat());
    if (residual <= tol) return dec;
  }
  throw SearchFailureError(residual, "decompose_product_qubit: residual " +
                                         std::to_string(residual) + " above tolerance");
}

double ppt_min_eig(const ComplexMatrix &m, DimsPair dims) {
  return min_eig_hermitian(partial_transpose(m, dims, Subsystem::Second));
}

double ppt_min_eig(const SuperGram &sg, DimsPair dims) { return ppt_min_eig(sg.mat(), dims); }

SuperGram family_gram(const FamilyParams &p) {
  ComplexMatrix c = ComplexMatrix::Identity(9, 9);
  // A(alpha) at block (0,1), entry (2,0); B(beta) at block (0,2), entry (0,0)
  c(2, 3 + 0) = p.alpha;
  c(3 + 0, 2) = std::conj(p.alpha);
  c(0, 6 + 0) = p.beta;
  c(6 + 0, 0) = std::conj(p.beta);
  return SuperGram(std::move(c), 3);
}

std::pair<ControlledUnitaryFamily, ControlledUnitaryFamily> family_realization(const FamilyParams &p) {
  constexpr std::size_t d = 3;
  const auto ket = [](std::size_t a, std::size_t b) { return basis_ket(9, idx(a, b, d)); };
  const ComplexMatrix id = ComplexMatrix::Identity(9, 9);

  // U_k |00> = |0k>: the ancilla's second qutrit is permuted 0 <-> k
  const auto transposition = [&](std::size_t a, std::size_t b) {
    ComplexMatrix perm = ComplexMatrix::Identity(3, 3);
    perm.row(ix(a)).swap(perm.row(ix(b)));
    return kron(ComplexMatrix::Identity(3, 3), perm);
  };
  ControlledUnitaryFamily pre(d, {id, transposition(0, 1), transposition(0, 2)});

  // V_i |0k> = |psi_ik>
  std::vector<std::vector<ComplexVector>> psi(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) psi[i].push_back(ket(i, k));
  psi[1][0] = std::conj(p.alpha) * ket(0, 2) + std::sqrt(std::max(0.0, 1.0 - std::norm(p.alpha))) * ket(1, 0);
  psi[2][0] = std::conj(p.beta) * ket(0, 0) + std::sqrt(std::max(0.0, 1.0 - std::norm(p.beta))) * ket(2, 0);

  ComplexMatrix inputs(9, 3);
  for (std::size_t k = 0; k < d; ++k) inputs.col(ix(k)) = ket(0, k);
  const ComplexMatrix in_basis = complete_orthonormal_basis(inputs);

  std::vector<ComplexMatrix> post{id};
  for (std::size_t i = 1; i < d; ++i) {
    ComplexMatrix outputs(9, 3);
    for (std::size_t k = 0; k < d; ++k) outputs.col(ix(k)) = psi[i][k];
    post.push_back(complete_orthonormal_basis(outputs) * in_basis.adjoint());
  }
  return {std::move(pre), ControlledUnitaryFamily(d, std::move(post))};
}

SuperGram nmr_experimental_gram() {
  // Published three-decimal blocks C_00 and C_01 of the NMR gate experiment.
  const Complex I(0.0, 1.0);
  ComplexMatrix c00(2, 2), c01(2, 2);
  c00 << 1.000, -0.066 - 0.368 * I, -0.066 + 0.368 * I, 1.000;
  c01 << 0.003 + 0.465 * I, 0.701 + 0.000 * I, 0.199 + 0.078 * I, -0.129 + 0.182 * I;
  ComplexMatrix c(4, 4);
  c << c00, c01, c01.adjoint(), c00;
  return SuperGram(std::move(c), 2, kNmrTol);
}

RealVector nnls(const RealMatrix &a, const RealVector &b, std::size_t max_iter) {
  if (a.rows() != b.size()) throw DimensionError("nnls: row count mismatch");
  const Eigen::Index n = a.cols();
  if (max_iter == 0) max_iter = 3 * static_cast<std::size_t>(n) + 30;
  const double eps = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()) *
                     static_cast<double>(std::max(a.rows(), n));

  RealVector x = RealVector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> set;

  const auto solve_on_set = [&]() {
    RealMatrix sub(a.rows(), static_cast<Eigen::Index>(set.size()));
    for (std::size_t c = 0; c < set.size(); ++c) sub.col(ix(c)) = a.col(set[c]);
    RealVector z_sub = sub.completeOrthogonalDecomposition().solve(b);
    RealVector z = RealVector::Zero(n);
    for (std::size_t c = 0; c < set.size(); ++c) z(set[c]) = z_sub(ix(c));
    return z;
  };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const RealVector w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = eps;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    set.push_back(best);

    for (std::size_t inner = 0; inner < max_iter; ++inner) {
      const RealVector z = solve_on_set();
      bool feasible = true;
      for (auto j : set) feasible = feasible && z(j) > 0.0;
      if (feasible) {
        x = z;
        break;
      }
      double step = 1.0;
      for (auto j : set) {
        if (z(j) <= 0.0) step = std::min(step, x(j) / (x(j) - z(j)));
      }
      x += step * (z - x);
      std::vector<Eigen::Index> kept;
      for (auto j : set) {
        if (x(j) <= 1e-15) {
          x(j) = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        } else {
          kept.push_back(j);
        }
      }
      set = std::move(kept);
      if (set.empty()) break;
    }
  }
  return x;
}

} // namespace dephkit
