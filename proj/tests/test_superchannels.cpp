#include "doctest.h"

#include "dephkit/errors.hpp"
#include "fixtures.hpp"

using namespace dephkit;
using fx::kI;

namespace {

double jam_diff(const Channel &a, const Channel &b) { return max_abs(jamiolkowski(a) - jamiolkowski(b)); }

BipartiteChannel hadamard_then(const BipartiteChannel &ch) {
  const std::size_t m = ch.mem_out();
  const Channel h = unitary_channel(kron(fx::hadamard(), ComplexMatrix::Identity(fx::ix(m), fx::ix(m))));
  return BipartiteChannel(ch.sys_in(), ch.mem_in(), ch.sys_out(), m, compose(h, ch.inner()));
}

BipartiteChannel swap_channel(std::size_t d) {
  ComplexMatrix s = ComplexMatrix::Zero(fx::ix(d * d), fx::ix(d * d));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) s(fx::ix(idx(b, a, d)), fx::ix(idx(a, b, d))) = 1.0;
  return BipartiteChannel(d, d, d, d, unitary_channel(s));
}

} // namespace

TEST_CASE("validate_super_gram") {
  for (std::size_t d : {2u, 3u}) {
    const auto n = fx::ix(d * d);
    CHECK_NOTHROW(validate_super_gram(ComplexMatrix::Ones(n, n), d));
    CHECK_NOTHROW(validate_super_gram(ComplexMatrix::Identity(n, n), d));
  }
  CHECK_NOTHROW(validate_super_gram(fx::c_max(), 2));

  const auto invariant_of = [](const ComplexMatrix &m) {
    try {
      validate_super_gram(m, 2);
    } catch (const ValidationError &e) {
      return e.invariant();
    }
    return std::string("none");
  };
  ComplexMatrix bad = ComplexMatrix::Ones(4, 4);
  bad(1, 1) = 0.9;
  CHECK(invariant_of(bad) == "unit diagonal");

  // valid Gram matrix with unequal diagonal blocks
  ComplexMatrix blocks = ComplexMatrix::Identity(4, 4);
  blocks(0, 1) = blocks(1, 0) = 0.5;
  CHECK(invariant_of(blocks) == "block structure");

  ComplexMatrix neg = ComplexMatrix::Identity(4, 4);
  neg(0, 2) = neg(2, 0) = 2.0;
  CHECK(invariant_of(neg) == "psd");

  CHECK_THROWS_AS(validate_super_gram(ComplexMatrix::Ones(1, 1), 1), DimensionError);
  CHECK_THROWS_AS(validate_super_gram(ComplexMatrix::Ones(4, 4), 3), DimensionError);
}

TEST_CASE("apply_super") {
  const Channel ch = random_channel(3, 2, 31);
  CHECK(jam_diff(apply_super(SuperGram::ones(3), ch), ch) < 1e-12);
  CHECK(jam_diff(apply_super(SuperGram::identity(2), identity_channel(2)),
                 dephasing_channel(GramMatrix::identity(2))) < 1e-12);
  CHECK_THROWS_AS(apply_super(SuperGram::ones(2), ch), DimensionError);
}

TEST_CASE("gram_from_controlled_unitaries") {
  CHECK(max_abs(gram_from_controlled_unitaries(ControlledUnitaryFamily::identity(2),
                                               ControlledUnitaryFamily::identity(2))
                    .mat() -
                ComplexMatrix::Ones(4, 4)) < 1e-15);

  // diagonal phase unitaries acting on different ancilla levels
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::vector<ComplexMatrix> pre, post;
  for (std::size_t i = 0; i < 3; ++i) {
    ComplexMatrix perm = ComplexMatrix::Identity(9, 9);
    perm.row(0).swap(perm.row(fx::ix(i)));
    pre.push_back(perm);
    ComplexVector ph(9);
    for (Eigen::Index k = 0; k < 9; ++k) ph(k) = std::polar(1.0, ang(rng));
    post.push_back(ph.asDiagonal());
  }
  const ControlledUnitaryFamily u(3, pre), v(3, post);
  const SuperGram sg = gram_from_controlled_unitaries(u, v);
  CHECK(max_abs(sg.mat() - fx::gram_by_vectors(u, v)) < 1e-12);

  const FamilyParams p(1.0, 1.0);
  const auto [fp, fv] = family_realization(p);
  CHECK(max_abs(gram_from_controlled_unitaries(fp, fv).mat() - family_gram(p).mat()) < 1e-12);

  std::vector<ComplexMatrix> bad{ComplexMatrix::Identity(4, 4), 2.0 * ComplexMatrix::Identity(4, 4)};
  CHECK_THROWS_AS(ControlledUnitaryFamily(2, bad), ContractError);
}

TEST_CASE("gram_from_simulation") {
  std::mt19937_64 rng(33);
  const DensityMatrix tau = fx::random_state(3, rng);
  const BipartiteChannel id = BipartiteChannel::identity(2, 3);
  CHECK(max_abs(gram_from_simulation(id, id, tau).mat() - ComplexMatrix::Ones(4, 4)) < 1e-12);

  for (std::size_t d : {2u, 3u}) {
    const ControlledUnitaryFamily pre = fx::random_family(d, rng), post = fx::random_family(d, rng);
    const Realization r = controlled_unitary_realization(pre, post);
    const SuperGram sim = gram_from_simulation(r.encoder, r.decoder, r.memory);
    CHECK(max_abs(sim.mat() - gram_from_controlled_unitaries(pre, post).mat()) < 1e-9);

    for (int t = 0; t < (d == 2 ? 50 : 10); ++t) {
      const Channel ch = random_channel(d, 1 + static_cast<std::size_t>(t % 3), rng());
      CHECK(jam_diff(apply_super(sim, ch), circuit_oracle(r.encoder, r.decoder, r.memory, ch)) < 1e-9);
    }
  }
}

TEST_CASE("gram_from_simulation with mixed memory and changing memory dimensions") {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 6; ++t) {
    const std::size_t d = 2 + static_cast<std::size_t>(t % 2);
    const fx::GeneralRealization g = fx::random_general_realization(d, 2, 4, 2, rng);
    const SuperGram sg = gram_from_simulation(g.encoder, g.decoder, g.tau);
    const Channel ch = random_channel(d, 2, rng());
    CHECK(jam_diff(apply_super(sg, ch), circuit_oracle(g.encoder, g.decoder, g.tau, ch)) < 1e-9);
  }
}

TEST_CASE("diagonal memory takes the reduced sum") {
  std::mt19937_64 rng(35);
  const fx::GeneralRealization g = fx::random_general_realization(2, 3, 6, 3, rng);
  const DensityMatrix diag(Eigen::Vector3cd(0.5, 0.3, 0.2).asDiagonal().toDenseMatrix());
  const SuperGram fast = gram_from_simulation(g.encoder, g.decoder, diag);
  const SimulationConsistency full = verify_simulation_consistency(g.encoder, g.decoder, diag);
  CHECK(max_abs(fast.mat() - full.gram) < 1e-12);
}

TEST_CASE("verify_simulation_consistency") {
  std::mt19937_64 rng(36);
  const Realization r = controlled_unitary_realization(fx::random_family(2, rng), fx::random_family(2, rng));
  const SimulationConsistency ok = verify_simulation_consistency(r.encoder, r.decoder, r.memory);
  CHECK(ok.consistent);
  CHECK(ok.max_mismatch <= 1e-10);

  const SimulationConsistency bad = verify_simulation_consistency(hadamard_then(r.encoder), r.decoder, r.memory);
  CHECK_FALSE(bad.consistent);
  CHECK(bad.max_mismatch > 1e-3);

  const BipartiteChannel id = BipartiteChannel::identity(2, 2);
  const SimulationConsistency triv = verify_simulation_consistency(id, id, DensityMatrix::basis(2, 0));
  CHECK(triv.max_mismatch == 0.0);
  CHECK(max_abs(triv.gram - ComplexMatrix::Ones(4, 4)) < 1e-15);
}

TEST_CASE("verify_dephasing_realization") {
  const auto [pre, post] = fx::c_max_families();
  const Realization r = controlled_unitary_realization(pre, post);
  const RealizationReport rep = verify_dephasing_realization(r.encoder, r.decoder, r.memory);
  CHECK(rep.passed());
  CHECK(max_abs(rep.c_en - ComplexMatrix::Identity(2, 2)) < 1e-12);
  CHECK(max_abs(rep.c_en - fx::c_max().topLeftCorner(2, 2)) < 1e-12);

  const BipartiteChannel id = BipartiteChannel::identity(3, 2);
  std::mt19937_64 rng(37);
  const RealizationReport triv = verify_dephasing_realization(id, id, fx::random_state(2, rng));
  CHECK(triv.passed());
  CHECK(max_abs(triv.c_en - ComplexMatrix::Ones(3, 3)) < 1e-12);
  for (const auto &c : triv.c_de) CHECK(max_abs(c - ComplexMatrix::Ones(3, 3)) < 1e-12);

  // swapping system and memory hands the memory state to the system
  const BipartiteChannel sw = swap_channel(2);
  const DensityMatrix tau = fx::random_state(2, rng);
  const RealizationReport swapped = verify_dephasing_realization(sw, BipartiteChannel::identity(2, 2), tau);
  CHECK_FALSE(swapped.find("encoder_dephasing")->passed);
  const DensityMatrix diag_tau(Eigen::Vector2cd(0.7, 0.3).asDiagonal().toDenseMatrix());
  const RealizationReport sw_diag = verify_dephasing_realization(sw, BipartiteChannel::identity(2, 2), diag_tau);
  REQUIRE(sw_diag.first_failure() != nullptr);
  CHECK(sw_diag.first_failure()->name == "encoder_dephasing");
}

TEST_CASE("gram_from_simulation refuses non-dephasing realizations") {
  std::mt19937_64 rng(38);
  const Realization r = controlled_unitary_realization(fx::random_family(2, rng), fx::random_family(2, rng));
  try {
    gram_from_simulation(hadamard_then(r.encoder), r.decoder, r.memory);
    FAIL("expected NotDephasingRealizationError");
  } catch (const NotDephasingRealizationError &e) {
    CHECK(e.condition() == "encoder_mio");
  }
}

TEST_CASE("circuit_oracle") {
  const Channel ch = random_channel(2, 3, 39);
  const BipartiteChannel id = BipartiteChannel::identity(2, 3);
  std::mt19937_64 rng(40);
  CHECK(jam_diff(circuit_oracle(id, id, fx::random_state(3, rng), ch), ch) < 1e-12);
  const Realization r =
      controlled_unitary_realization(ControlledUnitaryFamily::identity(2), ControlledUnitaryFamily::identity(2));
  CHECK(jam_diff(circuit_oracle(r.encoder, r.decoder, r.memory, ch), ch) < 1e-12);
  CHECK(circuit_oracle(r.encoder, r.decoder, r.memory, ch).trace_preservation_defect() < 1e-9);
}

TEST_CASE("marginal_grams") {
  const MarginalGrams ones = marginal_grams(SuperGram::ones(3));
  CHECK(max_abs(ones.encoder.mat() - ComplexMatrix::Ones(3, 3)) == 0.0);
  for (const auto &g : ones.decoder) CHECK(max_abs(g.mat() - ComplexMatrix::Ones(3, 3)) == 0.0);

  const MarginalGrams cm = marginal_grams(SuperGram(fx::c_max(), 2));
  CHECK(max_abs(cm.encoder.mat() - ComplexMatrix::Identity(2, 2)) == 0.0);
  CHECK(max_abs(cm.decoder[0].mat() - ComplexMatrix::Ones(2, 2)) == 0.0);
  CHECK(max_abs(cm.decoder[1].mat() - ComplexMatrix::Identity(2, 2)) == 0.0);

  const MarginalGrams exp = marginal_grams(nmr_experimental_gram(), kNmrTol);
  CHECK(std::abs(exp.decoder[0].mat()(0, 1) - Complex(0.003, 0.465)) < 1e-12);
  CHECK(std::abs(exp.decoder[1].mat()(0, 1) - Complex(-0.129, 0.182)) < 1e-12);
}

TEST_CASE("property: Definition 1 invariance, CP/TP output and cgp monotonicity") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 60; ++t) {
    const std::size_t d = t < 45 ? 2 : 3;
    const SuperGram sg = fx::random_super_gram(d, rng);
    const Channel ch = random_channel(d, 1 + static_cast<std::size_t>(t % 3), rng());
    const Channel out = apply_super(sg, ch);
    CHECK(out.trace_preservation_defect() < 1e-9);
    CHECK(is_psd(jamiolkowski(out), 1e-9));
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        worst = std::max(worst, std::abs(fx::channel_entry(out, i, i, j, j) - fx::channel_entry(ch, i, i, j, j)));
    CHECK(worst < 1e-9);
    CHECK((classical_action(out).mat() - classical_action(ch).mat()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(cgp(out) <= cgp(ch) + 1e-9);
  }
}

TEST_CASE("property: controlled-unitary Grams have the block structure") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 2 + static_cast<std::size_t>(t % 2);
    const ControlledUnitaryFamily pre = fx::random_family(d, rng), post = fx::random_family(d, rng);
    const SuperGram sg = gram_from_controlled_unitaries(pre, post);
    CHECK(audit_super_gram(sg.mat(), d).block_deviation < 1e-12);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l) {
        // <0|U_l^dag U_k|0>, the same in every diagonal block
        const Complex direct = pre.unitaries()[l].col(0).dot(pre.unitaries()[k].col(0));
        for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(sg.at(i, k, i, l) - direct) < 1e-12);
      }
  }
}
