#pragma once

// Dephasing superchannels identified by their d^2 x d^2 Gram matrix.
//
// The superchannel acts on Jamiolkowski states by Schur product,
// J(Xi[E]) = J(E) (.) C, where C[idx(i,k), idx(j,l)] pairs output indices
// (i, j) with input indices (k, l). Block C_ij is the d x d sub-matrix with
// rows idx(i, .) and columns idx(j, .); all diagonal blocks coincide.
//
// Bipartite maps act on system (x) memory, system factor first.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dephkit/channels.hpp"

namespace dephkit {

class SuperGram {
public:
  /// Validates the Gram and block invariants; throws ValidationError naming
  /// the first violated one ("unit diagonal", "block structure", "psd").
  SuperGram(ComplexMatrix mat, std::size_t d, double tol = kStateTol);

  std::size_t d() const noexcept { return d_; }
  const ComplexMatrix &mat() const noexcept { return mat_; }

  /// Block C_ij (d x d).
  ComplexMatrix block(std::size_t i, std::size_t j) const;

  /// Entry C[idx(i,k), idx(j,l)].
  Complex at(std::size_t i, std::size_t k, std::size_t j, std::size_t l) const;

  static SuperGram ones(std::size_t d);
  static SuperGram identity(std::size_t d);

private:
  std::size_t d_;
  ComplexMatrix mat_;
};

/// Measured deviations of each SuperGram invariant, without throwing.
struct SuperGramAudit {
  bool shape_ok = false;
  double diagonal_deviation = 0.0; ///< max |C_xx - 1|
  double block_deviation = 0.0;    ///< max |C_ii - C_00|
  double hermiticity_deviation = 0.0;
  double min_eigenvalue = 0.0;

  bool passes(double tol) const;
};

SuperGramAudit audit_super_gram(const ComplexMatrix &m, std::size_t d);

SuperGram validate_super_gram(const ComplexMatrix &m, std::size_t d, double tol = kStateTol);

/// d controlled unitaries U_0..U_{d-1}, each acting on a d^2-dimensional ancilla.
class ControlledUnitaryFamily {
public:
  ControlledUnitaryFamily(std::size_t d, std::vector<ComplexMatrix> unitaries, double tol = 1e-9);

  std::size_t d() const noexcept { return d_; }
  std::size_t ancilla_dim() const noexcept { return d_ * d_; }
  const std::vector<ComplexMatrix> &unitaries() const noexcept { return unitaries_; }

  /// sum_i |i><i| (x) U_i
  ComplexMatrix controlled() const;

  static ControlledUnitaryFamily identity(std::size_t d);

private:
  std::size_t d_;
  std::vector<ComplexMatrix> unitaries_;
};

/// A TP map (system sysIn (x) memory memIn) -> (system sysOut (x) memory memOut).
class BipartiteChannel {
public:
  BipartiteChannel(std::size_t sys_in, std::size_t mem_in, std::size_t sys_out,
                   std::size_t mem_out, Channel inner);

  std::size_t sys_in() const noexcept { return sys_in_; }
  std::size_t mem_in() const noexcept { return mem_in_; }
  std::size_t sys_out() const noexcept { return sys_out_; }
  std::size_t mem_out() const noexcept { return mem_out_; }
  const Channel &inner() const noexcept { return inner_; }

  static BipartiteChannel identity(std::size_t sys, std::size_t mem);

  /// Conjugation by sum_i |i><i| (x) U_i.
  static BipartiteChannel controlled(const ControlledUnitaryFamily &family);

private:
  std::size_t sys_in_, mem_in_, sys_out_, mem_out_;
  Channel inner_;
};

/// J(out) = J(ch) (.) C, converted back to Kraus form. The output is
/// checked to be CP and TP within `tol`.
Channel apply_super(const SuperGram &sg, const Channel &ch, double tol = kStateTol);

/// C[idx(i,k), idx(j,l)] = <0| U_l^dag V_j^dag V_i U_k |0>.
SuperGram gram_from_controlled_unitaries(const ControlledUnitaryFamily &pre,
                                         const ControlledUnitaryFamily &post);

/// Encoder, decoder and initial memory |0><0| of the controlled-unitary
/// realization.
struct Realization {
  BipartiteChannel encoder;
  BipartiteChannel decoder;
  DensityMatrix memory;
};

Realization controlled_unitary_realization(const ControlledUnitaryFamily &pre,
                                           const ControlledUnitaryFamily &post);

/// Result of evaluating the encode/decode contraction
///   R(i,j,p,q,k,l,m,n) = sum_{g,h} <i|Tr_2 N_de(|p><q| (x) |g><h|)|j>
///                                  <k g| N_en(|m><n| (x) tau) |l h>
/// at every index tuple. For a genuine dephasing realization R vanishes
/// unless (p,q,m,n) = (i,j,k,l), where it equals C[idx(i,k), idx(j,l)].
struct SimulationConsistency {
  ComplexMatrix gram;          ///< R at matched tuples
  double max_mismatch = 0.0;   ///< max |R| over mismatched tuples
  std::array<std::size_t, 8> worst_tuple{}; ///< (i,j,p,q,k,l,m,n) of max_mismatch
  bool consistent = false;     ///< max_mismatch <= tol
};

SimulationConsistency verify_simulation_consistency(const BipartiteChannel &enc,
                                                    const BipartiteChannel &dec,
                                                    const DensityMatrix &tau,
                                                    double tol = kStateTol);

struct ConditionCheck {
  std::string name;      ///< stable identifier, e.g. "encoder_dephasing"
  std::string construct; ///< the property being checked, in words
  bool passed = false;
  double deviation = 0.0;
  std::string detail;
};

struct RealizationReport {
  std::vector<ConditionCheck> checks;
  ComplexMatrix c_en;               ///< extracted encoder Gram matrix
  std::vector<ComplexMatrix> c_de;  ///< extracted decoder Gram matrix per input m
  std::vector<ComplexMatrix> sigma; ///< memory state sigma_m after encoding |m><m|
  SimulationConsistency consistency;

  bool passed() const;
  /// First failing check in evaluation order, or nullptr.
  const ConditionCheck *first_failure() const;
  const ConditionCheck *find(const std::string &name) const;
};

/// Checks, on the operator basis {|m><n|}:
///  - encoder_mio: Tr_2 N_en(|m><m| (x) tau) is diagonal (necessary)
///  - encoder_dephasing: Tr_2 N_en(rho (x) tau) = rho (.) C_en
///  - decoder_population_blind: coherences of the input never reach the
///    output populations, Tr_2 N_de(|p><q| (x) sigma_m) has zero diagonal
///    for p != q (necessary)
///  - decoder_dephasing: Tr_2 N_de(rho (x) sigma_m) = rho (.) C_de^m
///  - simulation_consistency: mismatched-index audit of the contraction
///  - marginals: C_en = C_00 and (C_de^m)_ij = (C_ij)_mm
RealizationReport verify_dephasing_realization(const BipartiteChannel &enc,
                                               const BipartiteChannel &dec,
                                               const DensityMatrix &tau,
                                               double tol = kStateTol);

/// The Gram matrix simulated by (enc, dec, tau). Throws
/// NotDephasingRealizationError naming the violated condition when the
/// triple does not realize a dephasing superchannel. A diagonal tau takes
/// the reduced superoperator sum over the memory populations.
SuperGram gram_from_simulation(const BipartiteChannel &enc, const BipartiteChannel &dec,
                               const DensityMatrix &tau, double tol = kStateTol);

/// Tr_mem o N_de o (E (x) I) o N_en( . (x) tau), by Kraus composition.
Channel circuit_oracle(const BipartiteChannel &enc, const BipartiteChannel &dec,
                       const DensityMatrix &tau, const Channel &ch);

struct MarginalGrams {
  GramMatrix encoder;               ///< C_00
  std::vector<GramMatrix> decoder;  ///< C_de^m = sum_ij (C_ij)_mm |i><j|
};

MarginalGrams marginal_grams(const SuperGram &sg, double tol = kStateTol);

} // namespace dephkit
