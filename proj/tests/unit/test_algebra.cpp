#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

#include "minor_dyson/algebra.hpp"

namespace md = minor_dyson;
using md::AlgebraElement;
using md::Beta;

namespace {

constexpr Beta kAllBetas[] = {Beta::kReal, Beta::kComplex, Beta::kQuaternion};

AlgebraElement random_element(Beta beta, md::RandomStream& rng) {
  AlgebraElement z(beta);
  for (int r = 0; r < md::components(beta); ++r) z[r] = rng.normal();
  return z;
}

}  // namespace

TEST(AlgebraElement, MultiplicationExamples) {
  EXPECT_EQ(md::algebra_mul(AlgebraElement::real(Beta::kReal, 2), AlgebraElement::real(Beta::kReal, 3)),
            AlgebraElement::real(Beta::kReal, 6));
  const auto i = AlgebraElement::basis(Beta::kComplex, 1);
  EXPECT_EQ(i * i, AlgebraElement::real(Beta::kComplex, -1));
  const auto e1 = AlgebraElement::basis(Beta::kQuaternion, 1);
  const auto e2 = AlgebraElement::basis(Beta::kQuaternion, 2);
  const auto e3 = AlgebraElement::basis(Beta::kQuaternion, 3);
  EXPECT_EQ(e1 * e2, e3);
  EXPECT_EQ(e2 * e1, -e3);
  EXPECT_EQ(e2 * e3, e1);
  EXPECT_EQ(e3 * e1, e2);
  EXPECT_EQ(e1 * e1, AlgebraElement::real(Beta::kQuaternion, -1));
}

TEST(AlgebraElement, MismatchedBetaThrows) {
  EXPECT_THROW(md::algebra_mul(AlgebraElement::unit(Beta::kReal), AlgebraElement::unit(Beta::kComplex)),
               md::InvalidInput);
  EXPECT_THROW(AlgebraElement(Beta::kReal, {1, 2, 0, 0}), md::InvalidInput);
}

TEST(AlgebraElement, NormMultiplicativeAssociativeConjugate) {
  md::RandomStream rng(1, 0);
  for (Beta beta : kAllBetas) {
    for (int k = 0; k < 200; ++k) {
      const auto a = random_element(beta, rng), b = random_element(beta, rng), c = random_element(beta, rng);
      EXPECT_NEAR((a * b).abs(), a.abs() * b.abs(), 1e-14 * (1 + a.abs() * b.abs()));
      const auto lhs = (a * b) * c, rhs = a * (b * c);
      EXPECT_LT((lhs - rhs).abs(), 1e-12);
      EXPECT_LT(((a * b).conj() - b.conj() * a.conj()).abs(), 1e-13);
      if (beta != Beta::kQuaternion) EXPECT_LT((a * b - b * a).abs(), 1e-13);
      EXPECT_NEAR((a * a.conj()).re(), a.norm2(), 1e-12);
    }
  }
}

TEST(AlgebraElement, Conjugate) {
  const AlgebraElement z(Beta::kQuaternion, {1, 2, 3, 4});
  EXPECT_EQ(z.conj(), AlgebraElement(Beta::kQuaternion, {1, -2, -3, -4}));
  EXPECT_DOUBLE_EQ(z.norm2(), 30.0);
}

TEST(Embedding, BlockExamples) {
  md::SelfAdjointMatrix one = md::SelfAdjointMatrix::diagonal(Beta::kQuaternion, {1.0});
  const Eigen::MatrixXcd e = md::embed_quaternion_matrix(one);
  EXPECT_TRUE(e.isApprox(Eigen::MatrixXcd::Identity(2, 2)));
  const auto blk = md::quaternion_block(AlgebraElement::basis(Beta::kQuaternion, 1));
  EXPECT_EQ(blk[0], std::complex<double>(0, 1));
  EXPECT_EQ(blk[3], std::complex<double>(0, -1));
  EXPECT_EQ(blk[1], 0.0);
  EXPECT_EQ(blk[2], 0.0);
  EXPECT_THROW(md::embed_quaternion_matrix(md::SelfAdjointMatrix::diagonal(Beta::kComplex, {1.0})),
               md::InvalidInput);
}

TEST(Embedding, IsHomomorphism) {
  md::RandomStream rng(2, 0);
  for (int k = 0; k < 50; ++k) {
    const auto a = random_element(Beta::kQuaternion, rng), b = random_element(Beta::kQuaternion, rng);
    const auto ba = md::quaternion_block(a), bb = md::quaternion_block(b), bab = md::quaternion_block(a * b);
    Eigen::Matrix2cd ma, mb, mab;
    ma << ba[0], ba[1], ba[2], ba[3];
    mb << bb[0], bb[1], bb[2], bb[3];
    mab << bab[0], bab[1], bab[2], bab[3];
    EXPECT_LT((ma * mb - mab).norm(), 1e-12);
  }
}

TEST(Embedding, HermitianAndDoublyDegenerate) {
  md::RandomStream rng(3, 0);
  const auto b = md::sample_gaussian_ensemble(4, Beta::kQuaternion, rng);
  const Eigen::MatrixXcd e = md::embed_quaternion_matrix(b);
  EXPECT_LT((e - e.adjoint()).norm(), 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(es.eigenvalues()(2 * k), es.eigenvalues()(2 * k + 1), 1e-10);
}

TEST(Eigenvalues, Examples) {
  const auto d = md::eigenvalues(md::SelfAdjointMatrix::diagonal(Beta::kReal, {3, -1, 2}));
  EXPECT_EQ(d.values(), (std::vector<double>{-1, 2, 3}));

  md::SelfAdjointMatrix flip(Beta::kReal, 2);
  flip.set_offdiagonal(0, 1, AlgebraElement::real(Beta::kReal, 1));
  const auto f = md::eigenvalues(flip);
  EXPECT_NEAR(f[0], -1, 1e-14);
  EXPECT_NEAR(f[1], 1, 1e-14);

  md::SelfAdjointMatrix q(Beta::kQuaternion, 2);
  q.set_offdiagonal(0, 1, AlgebraElement::basis(Beta::kQuaternion, 2));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(md::embed_quaternion_matrix(q));
  EXPECT_NEAR(es.eigenvalues()(0), -1, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(1), -1, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(3), 1, 1e-14);
  const auto qs = md::eigenvalues(q);
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_NEAR(qs[0], -1, 1e-13);
  EXPECT_NEAR(qs[1], 1, 1e-13);

  const auto s = md::eigenvalues(md::SelfAdjointMatrix::diagonal(Beta::kQuaternion, {3.0}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0], 3.0);
}

TEST(Eigenvalues, AgreeWithEigenSolverAndTrace) {
  md::RandomStream rng(4, 0);
  for (Beta beta : kAllBetas) {
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto b = md::sample_gaussian_ensemble(n, beta, rng);
      const auto ev = md::eigenvalues(b);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.to_complex());
      const int stride = beta == Beta::kQuaternion ? 2 : 1;
      for (std::size_t k = 0; k < n; ++k)
        EXPECT_NEAR(ev[k], es.eigenvalues()(static_cast<int>(k) * stride), 1e-11);
      const double sum = std::accumulate(ev.begin(), ev.end(), 0.0);
      EXPECT_NEAR(sum, b.trace(), 1e-10 * n * std::max(1.0, b.max_abs()));
    }
  }
}

TEST(Eigenvalues, DecompositionReassembles) {
  md::RandomStream rng(5, 0);
  for (Beta beta : kAllBetas) {
    const auto b = md::sample_gaussian_ensemble(5, beta, rng);
    const auto ed = md::eigen_decompose(b);
    md::AlgebraMatrix d(beta, 5, 5);
    for (std::size_t i = 0; i < 5; ++i) d(i, i) = AlgebraElement::real(beta, ed.values[i]);
    const auto back = ed.vectors * d * ed.vectors.adjoint();
    const auto unit = ed.vectors.adjoint() * ed.vectors;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        EXPECT_LT((back(i, j) - b(i, j)).abs(), 1e-11);
        EXPECT_LT((unit(i, j) - AlgebraElement::real(beta, i == j ? 1.0 : 0.0)).abs(), 1e-12);
      }
  }
}

TEST(Eigenvalues, ConjugationInvariance) {
  md::RandomStream rng(6, 0);
  for (Beta beta : kAllBetas) {
    for (int k = 0; k < 20; ++k) {
      const auto b = md::sample_gaussian_ensemble(4, beta, rng);
      const auto u = md::sample_haar(4, beta, rng);
      const auto e1 = md::eigenvalues(b), e2 = md::eigenvalues(b.conjugate_by(u));
      for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(e1[i], e2[i], 1e-9);
    }
  }
}

TEST(Eigenvalues, PairingFailureIsReported) {
  // A Hermitian 2x2 complex matrix with a simple spectrum is not a quaternion embedding.
  Eigen::VectorXd doubled(2);
  doubled << 0.0, 1.0;
  EXPECT_THROW(md::detail::collapse_pairs(doubled, md::kPairingTolerance), md::NumericalFailure);
}

TEST(Haar, IsUnitary) {
  md::RandomStream rng(7, 0);
  for (Beta beta : kAllBetas) {
    const auto u = md::sample_haar(5, beta, rng);
    const auto p = u * u.adjoint();
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        EXPECT_LT((p(i, j) - AlgebraElement::real(beta, i == j ? 1.0 : 0.0)).abs(), 1e-12);
  }
}

TEST(Haar, FirstColumnUniform) {
  // |U_11|^2 ~ Beta(beta/2, (n-1) beta/2); mean 1/n.
  md::RandomStream rng(8, 0);
  const int trials = 20000;
  for (Beta beta : kAllBetas) {
    double s = 0;
    for (int k = 0; k < trials; ++k) s += md::sample_haar(3, beta, rng)(0, 0).norm2();
    const double b = md::beta_value(beta);
    const double a = b / 2, c = b;  // Beta(a, c) for n = 3
    const double var = a * c / ((a + c) * (a + c) * (a + c + 1));
    EXPECT_NEAR(s / trials, 1.0 / 3, 4 * std::sqrt(var / trials));
  }
}

TEST(Pfaffian, MatchesExpansionAndDeterminant) {
  md::RandomStream rng(9, 0);
  for (int m : {2, 4, 6, 8}) {
    Eigen::MatrixXcd a(m, m);
    for (int i = 0; i < m; ++i) {
      a(i, i) = 0;
      for (int j = i + 1; j < m; ++j) {
        a(i, j) = {rng.normal(), rng.normal()};
        a(j, i) = -a(i, j);
      }
    }
    const auto pf = md::pfaffian<std::complex<double>>(a);
    const auto ex = md::pfaffian_expansion<std::complex<double>>(a);
    EXPECT_LT(std::abs(pf - ex), 1e-10 * std::max(1.0, std::abs(ex)));
    EXPECT_LT(std::abs(pf * pf - a.determinant()), 1e-9 * std::max(1.0, std::abs(a.determinant())));
  }
  Eigen::MatrixXd odd = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_EQ(md::pfaffian<double>(odd), 0.0);
}

TEST(Pfaffian, PivotingHandlesZeroLeadingEntry) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 2) = 2;
  a(1, 3) = 3;
  a(2, 0) = -2;
  a(3, 1) = -3;
  EXPECT_NEAR(md::pfaffian<double>(a), md::pfaffian_expansion<double>(a), 1e-14);
  EXPECT_NEAR(md::pfaffian<double>(a), -6.0, 1e-14);
}

TEST(QuaternionDeterminant, Examples) {
  EXPECT_NEAR(md::quaternion_determinant(md::SelfAdjointMatrix::diagonal(Beta::kQuaternion, {1, 1, 1})), 1.0, 1e-14);
  EXPECT_NEAR(md::quaternion_determinant(md::SelfAdjointMatrix::diagonal(Beta::kQuaternion, {2, 3})), 6.0, 1e-14);
  EXPECT_THROW(md::quaternion_determinant(md::SelfAdjointMatrix::diagonal(Beta::kReal, {2})), md::InvalidInput);
}

TEST(QuaternionDeterminant, RecursiveOracleOnThreeByThree) {
  md::RandomStream rng(10, 0);
  for (int k = 0; k < 20; ++k) {
    const auto b = md::sample_gaussian_ensemble(3, Beta::kQuaternion, rng);
    const auto skew = md::quaternion_skew_form(b);
    EXPECT_LT((skew + skew.transpose()).norm(), 1e-13);
    const double oracle = md::pfaffian_expansion<std::complex<double>>(skew).real();
    const auto ev = md::eigenvalues(b);
    const double prod = ev[0] * ev[1] * ev[2];
    EXPECT_NEAR(md::quaternion_determinant(b), oracle, 1e-10 * std::abs(oracle));
    EXPECT_NEAR(oracle, prod, 1e-8 * std::abs(prod));
  }
}

TEST(QuaternionDeterminant, ProductOfCollapsedEigenvalues) {
  md::RandomStream rng(11, 0);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(k % 4);
    const auto b = md::sample_gaussian_ensemble(n, Beta::kQuaternion, rng);
    const auto ev = md::eigenvalues(b);
    double prod = 1;
    for (double x : ev) prod *= x;
    EXPECT_NEAR(md::quaternion_determinant(b), prod, 1e-8 * std::abs(prod));
  }
}

TEST(GaussianEnsemble, ParameterRoundTrip) {
  md::RandomStream rng(12, 0);
  for (Beta beta : kAllBetas) {
    const auto b = md::sample_gaussian_ensemble(4, beta, rng);
    const auto p = b.parameters();
    EXPECT_EQ(p.size(), 4u + md::components(beta) * 6u);
    const auto c = md::SelfAdjointMatrix::from_parameters(beta, 4, p);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(b(i, j), c(i, j));
  }
}

TEST(GaussianEnsemble, EntryMomentsAndTraceVariance) {
  const int draws = 1000000;
  for (Beta beta : kAllBetas) {
    md::RandomStream rng(13, static_cast<std::uint64_t>(beta));
    double s11 = 0, q11 = 0, q12 = 0, st = 0, qt = 0;
    for (int k = 0; k < draws; ++k) {
      const auto b = md::sample_gaussian_ensemble(2, beta, rng);
      s11 += b(0, 0).re();
      q11 += b(0, 0).re() * b(0, 0).re();
      q12 += b(0, 1)[0] * b(0, 1)[0];
      st += b.trace();
      qt += b.trace() * b.trace();
    }
    const double bv = md::beta_value(beta);
    EXPECT_NEAR(s11 / draws, 0.0, 4e-3);
    EXPECT_NEAR(q11 / draws, 1 / bv, 0.01 / bv);
    EXPECT_NEAR(q12 / draws, 1 / (2 * bv), 0.01 / (2 * bv));
    const double vt = 2 / bv;
    EXPECT_NEAR(st / draws, 0.0, 3 * std::sqrt(vt / draws));
    EXPECT_NEAR(qt / draws, vt, 3 * vt * std::sqrt(2.0 / draws));
  }
}

TEST(SelfAdjointMatrix, RejectsNonHermitian) {
  md::AlgebraMatrix m(Beta::kComplex, 2, 2);
  m(0, 1) = AlgebraElement(Beta::kComplex, {1, 1, 0, 0});
  m(1, 0) = AlgebraElement(Beta::kComplex, {1, 1, 0, 0});
  EXPECT_THROW(md::SelfAdjointMatrix{m}, md::InvalidInput);
  m(1, 0) = m(0, 1).conj();
  EXPECT_NO_THROW(md::SelfAdjointMatrix{m});
}
