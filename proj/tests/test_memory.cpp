#include "doctest.h"

#include "dephkit/errors.hpp"
#include "fixtures.hpp"

using namespace dephkit;
using fx::kI;

TEST_CASE("is_passive_compatible") {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 5; ++t) {
    const std::size_t d = 2 + static_cast<std::size_t>(t % 2);
    const SuperGram prod(kron(fx::random_gram(d, rng).mat(), fx::random_gram(d, rng).mat()), d);
    CHECK(is_passive_compatible(prod));
  }
  CHECK_FALSE(is_passive_compatible(SuperGram(fx::c_max(), 2)));
  CHECK_FALSE(is_passive_compatible(nmr_experimental_gram(), kNmrTol));
}

TEST_CASE("memory_activity_qubit") {
  CHECK(std::abs(memory_activity_qubit(nmr_experimental_gram()) - 0.625) <= 5e-4);
  CHECK(memory_activity_qubit(SuperGram(fx::c_max(), 2)) == doctest::Approx(2.0));
  std::mt19937_64 rng(52);
  const SuperGram prod(kron(fx::random_gram(2, rng).mat(), fx::random_gram(2, rng).mat()), 2);
  CHECK(memory_activity_qubit(prod) < 1e-15);
  CHECK_THROWS_AS(memory_activity_qubit(SuperGram::ones(3)), UnsupportedDimensionError);
}

TEST_CASE("l1_distance") {
  std::mt19937_64 rng(53);
  const ComplexMatrix m = fx::random_matrix(3, 3, rng);
  CHECK(l1_distance(m, m) == 0.0);
  CHECK(l1_distance(ComplexMatrix::Identity(2, 2), ComplexMatrix::Ones(2, 2)) == doctest::Approx(2.0));
  const SuperGram exp = nmr_experimental_gram();
  CHECK(std::abs(l1_distance(exp.mat(), nearest_passive_qubit(exp, kNmrTol).mat()) - memory_activity_qubit(exp)) <
        1e-9);
  CHECK_THROWS_AS(l1_distance(m, ComplexMatrix::Ones(2, 2)), DimensionError);
}

TEST_CASE("nearest_passive_qubit") {
  // product with an x-y plane second factor is a fixed point
  const SuperGram prod(kron(fx::qubit_gram(0.3 * kI).mat(), fx::qubit_gram(std::polar(0.8, 0.4)).mat()), 2);
  CHECK(max_abs(nearest_passive_qubit(prod).mat() - prod.mat()) < 1e-15);

  const SuperGram cm(fx::c_max(), 2);
  const SuperGram near = nearest_passive_qubit(cm);
  CHECK(is_passive_compatible(near));
  CHECK(l1_distance(cm.mat(), near.mat()) == doctest::Approx(2.0));

  const SuperGram exp = nmr_experimental_gram();
  const SuperGram near_exp = nearest_passive_qubit(exp, kNmrTol);
  CHECK(is_passive_compatible(near_exp, 1e-12));
  CHECK(std::abs(l1_distance(exp.mat(), near_exp.mat()) - 0.625) <= 5e-4);

  CHECK_THROWS_AS(nearest_passive_qubit(SuperGram::ones(3)), UnsupportedDimensionError);
}

TEST_CASE("decompose_product_qubit") {
  const GramMatrix c1 = fx::qubit_gram(std::polar(0.4, 1.1)), c2 = fx::qubit_gram(std::polar(0.9, -2.0));
  const SuperGram prod(kron(c1.mat(), c2.mat()), 2);
  const ProductDecomposition single = decompose_product_qubit(prod);
  REQUIRE(single.terms.size() == 1);
  CHECK(single.terms[0].weight == doctest::Approx(1.0));
  CHECK(max_abs(single.terms[0].first.mat() - c1.mat()) < 1e-9);
  CHECK(max_abs(single.terms[0].second.mat() - c2.mat()) < 1e-9);

  const ProductDecomposition ones = decompose_product_qubit(SuperGram::ones(2));
  REQUIRE(ones.terms.size() == 1);
  CHECK(max_abs(ones.terms[0].first.mat() - ComplexMatrix::Ones(2, 2)) < 1e-9);
  CHECK(max_abs(ones.terms[0].second.mat() - ComplexMatrix::Ones(2, 2)) < 1e-9);

  std::mt19937_64 rng(54);
  const ComplexMatrix mix = 0.5 * kron(fx::random_disk_gram(0.95, rng).mat(), fx::random_disk_gram(0.95, rng).mat()) +
                            0.5 * kron(fx::random_disk_gram(0.95, rng).mat(), fx::random_disk_gram(0.95, rng).mat());
  const ProductDecomposition dec = decompose_product_qubit(SuperGram(mix, 2));
  CHECK(max_abs(dec.reconstruct() - mix) <= 1e-6);
  CHECK(dec.total_weight() == doctest::Approx(1.0).epsilon(1e-6));
  for (const auto &t : dec.terms) CHECK(t.weight >= 0.0);

  CHECK_THROWS_AS(decompose_product_qubit(SuperGram(fx::c_max(), 2)), ContractError);
}

TEST_CASE("decompose_product_qubit reports search failure") {
  // a mixture of two off-grid pure products is outside the reach of a coarse grid
  const ComplexMatrix mix = 0.5 * kron(fx::qubit_gram(std::polar(1.0, 0.123)).mat(),
                                       fx::qubit_gram(std::polar(1.0, 2.345)).mat()) +
                            0.5 * kron(fx::qubit_gram(std::polar(1.0, -1.01)).mat(),
                                       fx::qubit_gram(std::polar(1.0, 0.77)).mat());
  DecomposeOptions coarse;
  coarse.grid = 8;
  coarse.refined_grid = 16;
  try {
    decompose_product_qubit(SuperGram(mix, 2), 1e-6, coarse);
    FAIL("expected SearchFailureError");
  } catch (const SearchFailureError &e) {
    CHECK(e.residual() > 1e-6);
  }
}

TEST_CASE("ppt_min_eig") {
  std::mt19937_64 rng(55);
  const SuperGram prod(kron(fx::random_gram(2, rng).mat(), fx::random_gram(2, rng).mat()), 2);
  CHECK(ppt_min_eig(prod, {2, 2}) >= -1e-10);
  CHECK(std::abs(ppt_min_eig(family_gram(FamilyParams(1.0, 1.0)), {3, 3}) - (1.0 - std::sqrt(2.0))) < 1e-9);
  CHECK(std::abs(ppt_min_eig(family_gram(FamilyParams(0.6, 0.6)), {3, 3}) - (1.0 - std::sqrt(0.72))) < 1e-9);
  CHECK(ppt_min_eig(family_gram(FamilyParams(0.6, 0.6)), {3, 3}) == doctest::Approx(0.1515).epsilon(1e-3));
  CHECK_THROWS_AS(ppt_min_eig(ComplexMatrix::Identity(4, 4), {3, 3}), DimensionError);
}

TEST_CASE("family_gram") {
  CHECK(max_abs(family_gram(FamilyParams(0.0, 0.0)).mat() - ComplexMatrix::Identity(9, 9)) == 0.0);

  const SuperGram a_only = family_gram(FamilyParams(1.0, 0.0));
  CHECK(a_only.at(0, 2, 1, 0) == Complex(1.0));
  CHECK(is_passive_compatible(a_only));

  for (const Complex beta : {Complex(0.2), 0.5 * kI, std::polar(1.0, 2.0)}) {
    CHECK_FALSE(is_passive_compatible(family_gram(FamilyParams(0.3, beta))));
  }
  CHECK_THROWS_AS(FamilyParams(1.01, 0.0), ContractError);
  CHECK_THROWS_AS(FamilyParams(0.0, Complex(0.8, 0.8)), ContractError);
}

TEST_CASE("family_realization") {
  const auto [pre, post] = family_realization(FamilyParams(1.0, 1.0));
  // psi_10 = |02> and psi_20 = |00> at alpha = beta = 1 (0-based labels)
  const ComplexVector psi10 = post.unitaries()[1] * pre.unitaries()[0].col(0);
  const ComplexVector psi20 = post.unitaries()[2] * pre.unitaries()[0].col(0);
  CHECK(max_abs(psi10 - basis_ket(9, idx(0, 2, 3))) < 1e-12);
  CHECK(max_abs(psi20 - basis_ket(9, idx(0, 0, 3))) < 1e-12);

  const auto [p0, v0] = family_realization(FamilyParams(0.0, 0.0));
  CHECK(max_abs(gram_from_controlled_unitaries(p0, v0).mat() - ComplexMatrix::Identity(9, 9)) < 1e-12);

  std::mt19937_64 rng(56);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const FamilyParams p(std::polar(std::sqrt(u(rng)) * 0.999, 2 * M_PI * u(rng)),
                         std::polar(std::sqrt(u(rng)) * 0.999, 2 * M_PI * u(rng)));
    const auto [fp, fv] = family_realization(p);
    CHECK(max_abs(gram_from_controlled_unitaries(fp, fv).mat() - family_gram(p).mat()) < 1e-9);
    CHECK(max_abs(fx::gram_by_vectors(fp, fv) - family_gram(p).mat()) < 1e-9);
  }
}

TEST_CASE("nmr_experimental_gram") {
  const SuperGram exp = nmr_experimental_gram();
  CHECK(std::abs(exp.block(0, 0)(0, 1) - Complex(-0.066, -0.368)) < 1e-15);
  CHECK(std::abs(exp.block(0, 1)(0, 1) - Complex(0.701, 0.0)) < 1e-15);
  CHECK(std::abs(memory_activity_qubit(exp) - 0.625) <= 5e-4);
}

TEST_CASE("nnls") {
  RealMatrix a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  RealVector b(3);
  b << 2, -1, 1;
  const RealVector x = nnls(a, b);
  // unconstrained optimum has x2 < 0; the constrained optimum puts x2 = 0
  CHECK(x(1) == 0.0);
  CHECK(x(0) == doctest::Approx(1.5));

  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealMatrix big(10, 30);
  for (Eigen::Index r = 0; r < 10; ++r)
    for (Eigen::Index c = 0; c < 30; ++c) big(r, c) = u(rng);
  RealVector truth = RealVector::Zero(30);
  truth(3) = 0.7;
  truth(17) = 0.2;
  const RealVector sol = nnls(big, big * truth);
  CHECK((big * sol - big * truth).norm() < 1e-10);
  CHECK(sol.minCoeff() >= 0.0);
}

TEST_CASE("property: nearest passive distance equals memory activity") {
  std::mt19937_64 rng(58);
  for (int t = 0; t < 40; ++t) {
    const SuperGram sg = fx::random_super_gram(2, rng);
    const double m = memory_activity_qubit(sg);
    const SuperGram near = nearest_passive_qubit(sg);
    CHECK(std::abs(l1_distance(sg.mat(), near.mat()) - m) < 1e-9);
    const ComplexMatrix passive = fx::random_passive_mixture(3, 1.0, rng);
    CHECK(l1_distance(sg.mat(), passive) >= m - 1e-9);
    if (!is_passive_compatible(sg, 1e-9)) CHECK(m > 0.0);
  }
}

TEST_CASE("property: realizable qubit Grams are PPT") {
  std::mt19937_64 rng(59);
  for (int t = 0; t < 40; ++t) CHECK(ppt_min_eig(fx::random_super_gram(2, rng), {2, 2}) >= -1e-9);
}

TEST_CASE("property: passive mixtures decompose") {
  std::mt19937_64 rng(60);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix mix = fx::random_passive_mixture(2 + static_cast<std::size_t>(t % 3), 0.95, rng);
    const ProductDecomposition dec = decompose_product_qubit(SuperGram(mix, 2));
    CHECK(max_abs(dec.reconstruct() - mix) <= 1e-6);
  }
}
