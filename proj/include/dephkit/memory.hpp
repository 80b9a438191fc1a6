#pragma once

// Passive versus active memory in dephasing-superchannel realizations.

#include <utility>
#include <vector>

#include "dephkit/superchannels.hpp"

namespace dephkit {

struct ProductTerm {
  double weight;
  GramMatrix first;  ///< acts on the output (block) index
  GramMatrix second; ///< acts on the input (in-block) index
};

/// sum_i q_i C1_i (x) C2_i
struct ProductDecomposition {
  std::vector<ProductTerm> terms;

  ComplexMatrix reconstruct() const;
  double total_weight() const;
};

/// Parameters of the qutrit family C(alpha, beta); both in the closed unit disk.
struct FamilyParams {
  Complex alpha;
  Complex beta;

  FamilyParams(Complex alpha, Complex beta);
};

/// For every block C_ij all diagonal entries lie within `tol` of their mean.
bool is_passive_compatible(const SuperGram &sg, double tol = kStateTol);

/// 2 |C[00,10] - C[01,11]|: the l1 distance to the closest Gram matrix
/// realizable with passive memory (qubit only).
double memory_activity_qubit(const SuperGram &sg);

/// sum_ij |a_ij - b_ij|
double l1_distance(const ComplexMatrix &a, const ComplexMatrix &b);

/// (I (x) l_star)(C): the passive Gram matrix achieving memory_activity_qubit.
SuperGram nearest_passive_qubit(const SuperGram &sg, double tol = kStateTol);

struct DecomposeOptions {
  std::size_t grid = 64;         ///< angles per factor in the dictionary
  std::size_t refined_grid = 256;
};

/// Writes a passive-compatible 4x4 SuperGram as a convex mixture of products
/// of 2x2 Gram matrices. Product inputs are factored exactly; otherwise
/// nonnegative weights are fitted over products of x-y plane pure states on
/// an angle grid, refined once if needed. Throws ContractError when the input
/// is not passive-compatible and SearchFailureError when the reconstruction
/// error stays above `tol`.
ProductDecomposition decompose_product_qubit(const SuperGram &sg, double tol = 1e-6,
                                             const DecomposeOptions &options = {});

/// Smallest eigenvalue of the partial transpose (second factor).
double ppt_min_eig(const ComplexMatrix &m, DimsPair dims);
double ppt_min_eig(const SuperGram &sg, DimsPair dims);

SuperGram family_gram(const FamilyParams &p);

/// Controlled-unitary realization (pre, post) of family_gram(p).
std::pair<ControlledUnitaryFamily, ControlledUnitaryFamily> family_realization(const FamilyParams &p);

/// Tolerance used to validate the published three-decimal NMR matrix.
inline constexpr double kNmrTol = 5e-3;

/// Gram matrix reconstructed from NMR gate tomography, as published with
/// three decimals.
SuperGram nmr_experimental_gram();

/// Solves min ||A x - b||_2 subject to x >= 0 (Lawson-Hanson active set).
RealVector nnls(const RealMatrix &a, const RealVector &b, std::size_t max_iter = 0);

} // namespace dephkit
