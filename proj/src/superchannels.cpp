#include "dephkit/superchannels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "dephkit/errors.hpp"

namespace dephkit {

namespace {

std::size_t side_of(const ComplexMatrix &m) { return static_cast<std::size_t>(m.rows()); }

Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

void require_dim_at_least_two(std::size_t d, const char *what) {
  if (d < 2) {
    throw DimensionError(std::string(what) + ": system dimension must be at least 2");
  }
}

struct ChainDims {
  std::size_t d;      // system
  std::size_t mem0;   // tau
  std::size_t mem1;   // between encoder and decoder
  std::size_t mem2;   // discarded after decoding
};

ChainDims check_chain(const BipartiteChannel &enc, const BipartiteChannel &dec,
                      const DensityMatrix &tau) {
  const std::size_t d = enc.sys_in();
  if (enc.sys_out() != d || dec.sys_in() != d || dec.sys_out() != d) {
    throw DimensionError("realization: encoder and decoder must act on the same system dimension");
  }
  require_dim_at_least_two(d, "realization");
  if (enc.mem_in() != tau.dim()) {
    throw DimensionError("realization: memory state has dimension " + std::to_string(tau.dim()) +
                         ", encoder expects " + std::to_string(enc.mem_in()));
  }
  if (dec.mem_in() != enc.mem_out()) {
    throw DimensionError("realization: decoder memory input does not match encoder memory output");
  }
  return {d, enc.mem_in(), enc.mem_out(), dec.mem_out()};
}

// N_en(|m><n| (x) tau) for every (m, n), row-major in (m, n).
std::vector<ComplexMatrix> encoder_images(const BipartiteChannel &enc, const DensityMatrix &tau,
                                          std::size_t d) {
  std::vector<ComplexMatrix> out;
  out.reserve(d * d);
  for (std::size_t m = 0; m < d; ++m)
    for (std::size_t n = 0; n < d; ++n) out.push_back(enc.inner()(kron(basis_op(d, m, n), tau.mat())));
  return out;
}

// Tr_2 N_de(|p><q| (x) |g><h|), indexed [((p*d + q)*mem + g)*mem + h].
std::vector<ComplexMatrix> decoder_images(const BipartiteChannel &dec, std::size_t d) {
  const std::size_t mem = dec.mem_in();
  const DimsPair out_dims{dec.sys_out(), dec.mem_out()};
  std::vector<ComplexMatrix> out;
  out.reserve(d * d * mem * mem);
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < d; ++q)
      for (std::size_t g = 0; g < mem; ++g)
        for (std::size_t h = 0; h < mem; ++h) {
          const ComplexMatrix in = kron(basis_op(d, p, q), basis_op(mem, g, h));
          out.push_back(partial_trace(dec.inner()(in), out_dims, Subsystem::Second));
        }
  return out;
}

bool is_diagonal(const ComplexMatrix &m, double tol) {
  ComplexMatrix off = m;
  off.diagonal().setZero();
  return max_abs(off) <= tol;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// SuperGram

bool SuperGramAudit::passes(double tol) const {
  return shape_ok && diagonal_deviation <= tol && block_deviation <= tol &&
         hermiticity_deviation <= tol && min_eigenvalue >= -tol;
}

SuperGramAudit audit_super_gram(const ComplexMatrix &m, std::size_t d) {
  SuperGramAudit audit;
  const auto n = ix(d);
  if (d == 0 || m.rows() != n * n || m.cols() != n * n || !m.allFinite()) return audit;
  audit.shape_ok = true;
  audit.diagonal_deviation = (m.diagonal() - ComplexVector::Ones(m.rows())).cwiseAbs().maxCoeff();
  const ComplexMatrix c00 = m.block(0, 0, n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    audit.block_deviation =
        std::max(audit.block_deviation, max_abs(m.block(i * n, i * n, n, n) - c00));
  }
  audit.hermiticity_deviation = hermiticity_defect(m);
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  audit.min_eigenvalue =
      Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return audit;
}

SuperGram::SuperGram(ComplexMatrix mat, std::size_t d, double tol) : d_(d), mat_(std::move(mat)) {
  require_dim_at_least_two(d_, "SuperGram");
  const auto n = ix(d_);
  if (mat_.rows() != n * n || mat_.cols() != n * n) {
    throw DimensionError("SuperGram: expected a " + std::to_string(d_ * d_) + "x" +
                         std::to_string(d_ * d_) + " matrix");
  }
  require_finite(mat_);
  const SuperGramAudit audit = audit_super_gram(mat_, d_);
  if (audit.diagonal_deviation > tol) {
    throw ValidationError("unit diagonal", audit.diagonal_deviation,
                          "SuperGram: diagonal entries differ from 1 by " +
                              fmt(audit.diagonal_deviation));
  }
  if (audit.block_deviation > tol) {
    throw ValidationError("block structure", audit.block_deviation,
                          "SuperGram: diagonal blocks differ from C_00 by " +
                              fmt(audit.block_deviation));
  }
  if (audit.hermiticity_deviation > tol) {
    throw ValidationError("psd", audit.hermiticity_deviation, "SuperGram: matrix is not Hermitian");
  }
  if (audit.min_eigenvalue < -tol) {
    throw ValidationError("psd", -audit.min_eigenvalue,
                          "SuperGram: matrix is not positive semidefinite (min eigenvalue " +
                              fmt(audit.min_eigenvalue) + ")");
  }
}

ComplexMatrix SuperGram::block(std::size_t i, std::size_t j) const {
  if (i >= d_ || j >= d_) throw DimensionError("SuperGram::block: index out of range");
  const auto n = ix(d_);
  return mat_.block(ix(i) * n, ix(j) * n, n, n);
}

Complex SuperGram::at(std::size_t i, std::size_t k, std::size_t j, std::size_t l) const {
  return mat_(ix(idx(i, k, d_)), ix(idx(j, l, d_)));
}

SuperGram SuperGram::ones(std::size_t d) {
  const auto n = ix(d * d);
  return SuperGram(ComplexMatrix::Ones(n, n), d);
}

SuperGram SuperGram::identity(std::size_t d) {
  const auto n = ix(d * d);
  return SuperGram(ComplexMatrix::Identity(n, n), d);
}

SuperGram validate_super_gram(const ComplexMatrix &m, std::size_t d, double tol) {
  return SuperGram(m, d, tol);
}

// ---------------------------------------------------------------------------
// Controlled unitaries and bipartite channels

ControlledUnitaryFamily::ControlledUnitaryFamily(std::size_t d, std::vector<ComplexMatrix> unitaries,
                                                 double tol)
    : d_(d), unitaries_(std::move(unitaries)) {
  require_dim_at_least_two(d_, "ControlledUnitaryFamily");
  if (unitaries_.size() != d_) {
    throw DimensionError("ControlledUnitaryFamily: expected " + std::to_string(d_) + " unitaries");
  }
  for (std::size_t i = 0; i < d_; ++i) {
    const auto &u = unitaries_[i];
    if (side_of(u) != d_ * d_ || u.cols() != u.rows()) {
      throw DimensionError("ControlledUnitaryFamily: member " + std::to_string(i) +
                           " must be d^2 x d^2");
    }
    require_finite(u);
    if (!is_unitary(u, tol)) {
      throw ContractError("ControlledUnitaryFamily: member " + std::to_string(i) +
                          " is not unitary");
    }
  }
}

ComplexMatrix ControlledUnitaryFamily::controlled() const {
  const auto total = ix(d_ * d_ * d_);
  ComplexMatrix u = ComplexMatrix::Zero(total, total);
  for (std::size_t i = 0; i < d_; ++i) u += kron(basis_op(d_, i, i), unitaries_[i]);
  return u;
}

ControlledUnitaryFamily ControlledUnitaryFamily::identity(std::size_t d) {
  const auto n = ix(d * d);
  return ControlledUnitaryFamily(d, std::vector<ComplexMatrix>(d, ComplexMatrix::Identity(n, n)));
}

BipartiteChannel::BipartiteChannel(std::size_t sys_in, std::size_t mem_in, std::size_t sys_out,
                                   std::size_t mem_out, Channel inner)
    : sys_in_(sys_in), mem_in_(mem_in), sys_out_(sys_out), mem_out_(mem_out),
      inner_(std::move(inner)) {
  if (inner_.dim_in() != sys_in_ * mem_in_ || inner_.dim_out() != sys_out_ * mem_out_) {
    throw DimensionError("BipartiteChannel: Kraus shape does not match declared dimensions");
  }
  const double defect = inner_.trace_preservation_defect();
  if (defect > kStateTol) {
    throw ContractError("BipartiteChannel: map is not trace preserving (defect " + fmt(defect) +
                        ")");
  }
}

BipartiteChannel BipartiteChannel::identity(std::size_t sys, std::size_t mem) {
  return BipartiteChannel(sys, mem, sys, mem, identity_channel(sys * mem));
}

BipartiteChannel BipartiteChannel::controlled(const ControlledUnitaryFamily &family) {
  const std::size_t d = family.d();
  return BipartiteChannel(d, family.ancilla_dim(), d, family.ancilla_dim(),
                          unitary_channel(family.controlled()));
}

// ---------------------------------------------------------------------------
// Action and construction

Channel apply_super(const SuperGram &sg, const Channel &ch, double tol) {
  if (ch.dim_in() != sg.d() || ch.dim_out() != sg.d()) {
    throw DimensionError("apply_super: channel dimension does not match the SuperGram");
  }
  if (!ch.is_trace_preserving(tol)) throw ContractError("apply_super: channel is not TP");
  const ComplexMatrix out = schur(jamiolkowski(ch), sg.mat());
  const std::size_t d = sg.d();
  const auto n = ix(d);
  const double tp_defect = max_abs(partial_trace(out, {d, d}, Subsystem::First) -
                                   ComplexMatrix::Identity(n, n) / static_cast<double>(d));
  if (tp_defect > tol) {
    throw ContractError("apply_super: output Jamiolkowski state violates trace preservation");
  }
  if (!is_psd(out, tol)) {
    throw ContractError("apply_super: output Jamiolkowski state is not positive");
  }
  return channel_from_jamiolkowski(out, d, tol);
}

SuperGram gram_from_controlled_unitaries(const ControlledUnitaryFamily &pre,
                                         const ControlledUnitaryFamily &post) {
  if (pre.d() != post.d()) throw DimensionError("gram_from_controlled_unitaries: d mismatch");
  const std::size_t d = pre.d();
  const ComplexVector zero = basis_ket(d * d, 0);
  std::vector<ComplexVector> psi(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      psi[idx(i, k, d)] = post.unitaries()[i] * (pre.unitaries()[k] * zero);
  const auto n = ix(d * d);
  ComplexMatrix c(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index s = 0; s < n; ++s) c(r, s) = psi[s].dot(psi[r]); // <psi_s|psi_r>
  return SuperGram(std::move(c), d);
}

Realization controlled_unitary_realization(const ControlledUnitaryFamily &pre,
                                           const ControlledUnitaryFamily &post) {
  if (pre.d() != post.d()) throw DimensionError("controlled_unitary_realization: d mismatch");
  return {BipartiteChannel::controlled(pre), BipartiteChannel::controlled(post),
          DensityMatrix::basis(pre.ancilla_dim(), 0)};
}

SimulationConsistency verify_simulation_consistency(const BipartiteChannel &enc,
                                                    const BipartiteChannel &dec,
                                                    const DensityMatrix &tau, double tol) {
  const ChainDims dims = check_chain(enc, dec, tau);
  const std::size_t d = dims.d;
  const std::size_t mem = dims.mem1;
  const auto enc_img = encoder_images(enc, tau, d);
  const auto dec_img = decoder_images(dec, d);

  SimulationConsistency result;
  result.gram = ComplexMatrix::Zero(ix(d * d), ix(d * d));
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < d; ++q)
      for (std::size_t m = 0; m < d; ++m)
        for (std::size_t n = 0; n < d; ++n) {
          const ComplexMatrix &e = enc_img[idx(m, n, d)];
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
              for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = 0; l < d; ++l) {
                  Complex r = 0.0;
                  for (std::size_t g = 0; g < mem; ++g)
                    for (std::size_t h = 0; h < mem; ++h) {
                      const ComplexMatrix &de = dec_img[((p * d + q) * mem + g) * mem + h];
                      r += de(ix(i), ix(j)) * e(ix(idx(k, g, mem)), ix(idx(l, h, mem)));
                    }
                  const bool matched = p == i && q == j && m == k && n == l;
                  if (matched) {
                    result.gram(ix(idx(i, k, d)), ix(idx(j, l, d))) = r;
                  } else if (std::abs(r) > result.max_mismatch) {
                    result.max_mismatch = std::abs(r);
                    result.worst_tuple = {i, j, p, q, k, l, m, n};
                  }
                }
        }
  result.consistent = result.max_mismatch <= tol;
  return result;
}

bool RealizationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto &c) { return c.passed; });
}

const ConditionCheck *RealizationReport::first_failure() const {
  for (const auto &c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

const ConditionCheck *RealizationReport::find(const std::string &name) const {
  for (const auto &c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

RealizationReport verify_dephasing_realization(const BipartiteChannel &enc,
                                               const BipartiteChannel &dec,
                                               const DensityMatrix &tau, double tol) {
  const ChainDims dims = check_chain(enc, dec, tau);
  const std::size_t d = dims.d;
  const auto n = ix(d);
  const DimsPair enc_out{d, dims.mem1};
  const DimsPair dec_out{d, dims.mem2};

  RealizationReport report;
  report.c_en = ComplexMatrix::Zero(n, n);

  double mio_dev = 0.0, enc_dev = 0.0;
  std::size_t enc_worst_m = 0, enc_worst_n = 0;
  for (std::size_t m = 0; m < d; ++m)
    for (std::size_t k = 0; k < d; ++k) {
      const ComplexMatrix full = enc.inner()(kron(basis_op(d, m, k), tau.mat()));
      ComplexMatrix sys = partial_trace(full, enc_out, Subsystem::Second);
      report.c_en(ix(m), ix(k)) = sys(ix(m), ix(k));
      if (m == k) {
        ComplexMatrix off = sys;
        off.diagonal().setZero();
        mio_dev = std::max(mio_dev, max_abs(off));
        report.sigma.push_back(partial_trace(full, enc_out, Subsystem::First));
      }
      sys(ix(m), ix(k)) = 0.0;
      const double dev = max_abs(sys);
      if (dev > enc_dev) {
        enc_dev = dev;
        enc_worst_m = m;
        enc_worst_n = k;
      }
    }

  report.checks.push_back({"encoder_mio", "encoding acts as a maximally incoherent operation on the system",
                           mio_dev <= tol, mio_dev,
                           "max off-diagonal of Tr_2 N_en(|m><m| (x) tau)"});
  report.checks.push_back({"encoder_dephasing", "encoding acts on the system as rho -> rho (.) C_en",
                           enc_dev <= tol, enc_dev,
                           "worst input |" + std::to_string(enc_worst_m) + "><" +
                               std::to_string(enc_worst_n) + "|"});

  double pop_dev = 0.0, dec_dev = 0.0;
  std::size_t dec_worst_m = 0;
  for (std::size_t m = 0; m < d; ++m) {
    ComplexMatrix cde = ComplexMatrix::Zero(n, n);
    const ComplexMatrix &sigma = report.sigma[m];
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = 0; q < d; ++q) {
        const ComplexMatrix full = dec.inner()(kron(basis_op(d, p, q), sigma));
        ComplexMatrix sys = partial_trace(full, dec_out, Subsystem::Second);
        cde(ix(p), ix(q)) = sys(ix(p), ix(q));
        if (p != q) pop_dev = std::max(pop_dev, sys.diagonal().cwiseAbs().maxCoeff());
        sys(ix(p), ix(q)) = 0.0;
        const double dev = max_abs(sys);
        if (dev > dec_dev) {
          dec_dev = dev;
          dec_worst_m = m;
        }
      }
    report.c_de.push_back(std::move(cde));
  }
  report.checks.push_back({"decoder_population_blind",
                           "decoding cannot turn input coherence into output populations",
                           pop_dev <= tol, pop_dev,
                           "max diagonal of Tr_2 N_de(|p><q| (x) sigma_m), p != q"});
  report.checks.push_back({"decoder_dephasing",
                           "decoding acts on the system as rho -> rho (.) C_de^m for every sigma_m",
                           dec_dev <= tol, dec_dev,
                           "worst memory input sigma_" + std::to_string(dec_worst_m)});

  report.consistency = verify_simulation_consistency(enc, dec, tau, tol);
  {
    const auto &w = report.consistency.worst_tuple;
    std::string tuple;
    for (std::size_t t = 0; t < w.size(); ++t) tuple += (t ? "," : "") + std::to_string(w[t]);
    report.checks.push_back({"simulation_consistency",
                             "encode/decode contraction vanishes off the matched indices",
                             report.consistency.consistent, report.consistency.max_mismatch,
                             "worst (i,j,p,q,k,l,m,n) = (" + tuple + ")"});
  }

  const ComplexMatrix &gram = report.consistency.gram;
  double marg_dev = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    marg_dev = std::max(marg_dev, max_abs(gram.block(ix(i) * n, ix(i) * n, n, n) - report.c_en));
  }
  for (std::size_t m = 0; m < d; ++m)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const Complex expected = gram(ix(idx(i, m, d)), ix(idx(j, m, d)));
        marg_dev = std::max(marg_dev, std::abs(report.c_de[m](ix(i), ix(j)) - expected));
      }
  report.checks.push_back({"marginals", "C_en = C_00 and (C_de^m)_ij = (C_ij)_mm",
                           marg_dev <= tol, marg_dev,
                           "max deviation between extracted marginals and blocks of C"});
  return report;
}

SuperGram gram_from_simulation(const BipartiteChannel &enc, const BipartiteChannel &dec,
                               const DensityMatrix &tau, double tol) {
  const RealizationReport report = verify_dephasing_realization(enc, dec, tau, tol);
  if (const ConditionCheck *failure = report.first_failure()) {
    throw NotDephasingRealizationError(
        failure->name, failure->deviation,
        "gram_from_simulation: not a dephasing superchannel realization (" + failure->name +
            ": " + failure->construct + "; deviation " + fmt(failure->deviation) + ")");
  }
  const ChainDims dims = check_chain(enc, dec, tau);
  if (!is_diagonal(tau.mat(), 0.0)) return SuperGram(report.consistency.gram, dims.d, tol);

  // Classical memory: C_{ik,jl} = sum_a p_a sum_{t,g,h}
  //   Phi_de[(i t)(j t), (i g)(j h)] Phi_en[(k g)(l h), (k a)(l a)]
  const std::size_t d = dims.d;
  const std::size_t m0 = dims.mem0, m1 = dims.mem1, m2 = dims.mem2;
  const ComplexMatrix phi_en = superop_from_kraus(enc.inner());
  const ComplexMatrix phi_de = superop_from_kraus(dec.inner());
  const std::size_t en_in = d * m0, en_out = d * m1;
  const std::size_t de_in = d * m1, de_out = d * m2;
  ComplexMatrix c = ComplexMatrix::Zero(ix(d * d), ix(d * d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t l = 0; l < d; ++l) {
          Complex sum = 0.0;
          for (std::size_t g = 0; g < m1; ++g)
            for (std::size_t h = 0; h < m1; ++h) {
              Complex dec_part = 0.0;
              for (std::size_t t = 0; t < m2; ++t) {
                dec_part += phi_de(ix(idx(idx(i, t, m2), idx(j, t, m2), de_out)),
                                   ix(idx(idx(i, g, m1), idx(j, h, m1), de_in)));
              }
              Complex enc_part = 0.0;
              for (std::size_t a = 0; a < m0; ++a) {
                const double p = tau.mat()(ix(a), ix(a)).real();
                if (p == 0.0) continue;
                enc_part += p * phi_en(ix(idx(idx(k, g, m1), idx(l, h, m1), en_out)),
                                       ix(idx(idx(k, a, m0), idx(l, a, m0), en_in)));
              }
              sum += dec_part * enc_part;
            }
          c(ix(idx(i, k, d)), ix(idx(j, l, d))) = sum;
        }
  return SuperGram(std::move(c), d, tol);
}

Channel circuit_oracle(const BipartiteChannel &enc, const BipartiteChannel &dec,
                       const DensityMatrix &tau, const Channel &ch) {
  const ChainDims dims = check_chain(enc, dec, tau);
  if (ch.dim_in() != dims.d || ch.dim_out() != dims.d) {
    throw DimensionError("circuit_oracle: channel dimension does not match the system");
  }
  const std::size_t d = dims.d;
  const ComplexMatrix sys_id = ComplexMatrix::Identity(ix(d), ix(d));

  // rho -> rho (x) tau, one Kraus operator per eigenvector of tau
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(tau.mat());
  std::vector<ComplexMatrix> attach;
  for (Eigen::Index a = 0; a < solver.eigenvalues().size(); ++a) {
    const double w = solver.eigenvalues()(a);
    if (w <= 0.0) continue;
    attach.push_back(std::sqrt(w) * kron(sys_id, solver.eigenvectors().col(a)));
  }
  const Channel prepare(d, d * dims.mem0, std::move(attach));

  const Channel middle = tensor(ch, identity_channel(dims.mem1));

  std::vector<ComplexMatrix> discard;
  for (std::size_t mu = 0; mu < dims.mem2; ++mu) {
    discard.push_back(kron(sys_id, basis_ket(dims.mem2, mu).transpose()));
  }
  const Channel trace_memory(d * dims.mem2, d, std::move(discard));

  return compose(trace_memory,
                 compose(dec.inner(), compose(middle, compose(enc.inner(), prepare))));
}

MarginalGrams marginal_grams(const SuperGram &sg, double tol) {
  const std::size_t d = sg.d();
  const auto n = ix(d);
  std::vector<GramMatrix> decoder;
  for (std::size_t m = 0; m < d; ++m) {
    ComplexMatrix c(n, n);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) c(ix(i), ix(j)) = sg.at(i, m, j, m);
    decoder.emplace_back(std::move(c), tol);
  }
  return {GramMatrix(sg.block(0, 0), tol), std::move(decoder)};
}

} // namespace dephkit
