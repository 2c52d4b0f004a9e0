// Copyright 2026 The QSN Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qsn/fisher.hpp"
#include "qsn/states.hpp"
#include "test_support.hpp"

namespace qsn {
namespace {

using testing::kSqrtHalf;
using testing::max_diff;
using testing::plus_state;
using testing::qubit_network;

// Square root of a PSD matrix through its eigendecomposition.
ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((m + m.adjoint()) * 0.5);
  const RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// Bures oracle: F_Q(phi) = 8 (1 - sqrt fidelity(rho(0), rho(delta))) / delta^2.
double bures_qfi(const DensityOperator& rho, const HermitianOperator& h, double delta) {
  const ComplexMatrix u = expm_i(h, -delta);
  const ComplexMatrix moved = u * rho.matrix() * u.adjoint();
  const ComplexMatrix s = psd_sqrt(rho.matrix());
  const double root_fid = psd_sqrt(s * moved * s).trace().real();
  return 8.0 * (1.0 - root_fid) / (delta * delta);
}

// Schur complement oracle: [F^-1]_[kk] = (F_kk - F_kc F_cc^-1 F_ck)^-1.
RealMatrix schur_inverse_block(const RealMatrix& f, Eigen::Index off, Eigen::Index n) {
  const Eigen::Index d = f.rows();
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < d; ++i)
    if (i < off || i >= off + n) rest.push_back(i);
  const auto r = static_cast<Eigen::Index>(rest.size());
  RealMatrix fcc(r, r), fkc(n, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) fcc(i, j) = f(rest[i], rest[j]);
    for (Eigen::Index a = 0; a < n; ++a) fkc(a, i) = f(off + a, rest[i]);
  }
  const RealMatrix schur = f.block(off, off, n, n) - fkc * fcc.inverse() * fkc.transpose();
  return schur.inverse();
}

TEST(QfimPureTest, PlusStateGivesOne) {
  const SensorNetwork net({testing::qubit_sensor()});
  EXPECT_NEAR(qfim_pure(plus_state(), net)(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(qfim_pure(PureState::basis(2, 0), net)(0, 0), 0.0, 1e-12);
  EXPECT_THROW(qfim_pure(testing::bell_state(), net), DimensionError);
}

TEST(QfimPureTest, GhzMatchesClosedForm) {
  for (std::size_t d = 2; d <= 4; ++d) {
    const SensorNetwork net = qubit_network(d);
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << d));
    v(0) = v(v.size() - 1) = kSqrtHalf;
    const Qfim f = qfim_pure(PureState(v, net.layout()), net);
    EXPECT_LE(max_diff(f.matrix(), RealMatrix::Ones(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))), 1e-12);
  }
}

TEST(QfimPureTest, AgreesWithCovarianceFormAndIsPsd) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    Rng rng = trial_rng(41, t);
    const SensorNetwork net({SensorSpec(2, {random_hermitian(rng, 2), random_hermitian(rng, 2)}, ops::zero(2)),
                             SensorSpec(3, {random_hermitian(rng, 3)}, ops::zero(3))});
    const PureState psi = haar_state(rng, net.layout());
    const Qfim f = qfim_pure(psi, net);
    // Oracle: 2<{H_m, H_n}> - 4<H_m><H_n> with full-space operators.
    const auto gens = global_generators(net);
    const ComplexVector& a = psi.amplitudes();
    for (std::size_t m = 0; m < gens.size(); ++m)
      for (std::size_t n = 0; n < gens.size(); ++n) {
        const ComplexMatrix& hm = gens[m].matrix();
        const ComplexMatrix& hn = gens[n].matrix();
        const double anti = a.dot((hm * hn + hn * hm) * a).real();
        const double expect = 2 * anti - 4 * a.dot(hm * a).real() * a.dot(hn * a).real();
        EXPECT_NEAR(f(m, n), expect, 1e-10);
      }
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<RealMatrix>(f.matrix()).eigenvalues().minCoeff(), -1e-10);
    EXPECT_LE(max_diff(qfim_mixed(DensityOperator::from_pure(psi), net).qfim.matrix(), f.matrix()), 1e-9);
  }
}

TEST(QfimMixedTest, SldResidualIsSmall) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    Rng rng = trial_rng(42, t);
    const SensorNetwork net({SensorSpec(2, {random_hermitian(rng, 2)}, ops::zero(2)),
                             SensorSpec(2, {random_hermitian(rng, 2)}, ops::zero(2))});
    const DensityOperator rho = random_density(rng, net.layout(), uniform_index(rng, 1, 4));
    const MixedQfim m = qfim_mixed(rho, net);
    const auto gens = global_generators(net);
    for (std::size_t k = 0; k < gens.size(); ++k) EXPECT_LE(sld_residual(rho, gens[k], m.slds.operators[k]), 1e-8);
  }
}

TEST(QfimMixedTest, PartiallyMixedQubitMatchesBuresOracle) {
  const HermitianOperator h = ops::scaled(ops::sigma_z(), 0.5);
  const SensorNetwork net({SensorSpec(2, {h}, ops::zero(2))});
  for (double p : {0.0, 0.3, 0.75, 1.0}) {
    const ComplexMatrix plus = plus_state().amplitudes() * plus_state().amplitudes().adjoint();
    const DensityOperator rho(p * plus + (1 - p) * 0.5 * identity(2), {2});
    EXPECT_NEAR(qfim_mixed(rho, net).qfim(0, 0), p * p, 1e-12);
    EXPECT_NEAR(bures_qfi(rho, h, 1e-3), p * p, 1e-5);
  }
}

TEST(QfimMixedTest, RandomStatesMatchBuresOracle) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    Rng rng = trial_rng(43, t);
    const HermitianOperator h = random_hermitian(rng, 3);
    const SensorNetwork net({SensorSpec(3, {h}, ops::zero(3))});
    // Full rank keeps the fidelity oracle smooth.
    const DensityOperator rho = random_density(rng, {3}, 4);
    EXPECT_NEAR(qfim_mixed(rho, net).qfim(0, 0), bures_qfi(rho, h, 1e-4), 1e-4);
  }
}

TEST(QfimMixedTest, MaximallyMixedHasNoInformation) {
  const SensorNetwork net = qubit_network(2);
  const MixedQfim m = qfim_mixed(DensityOperator(identity(4) * 0.25, {2, 2}), net);
  EXPECT_LE(m.qfim.matrix().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(m.support_dim, 4u);
}

TEST(RotationTest, MatchesRotatedGenerators) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    Rng rng = trial_rng(44, t);
    const SensorNetwork net = qubit_network(3);
    const PureState psi = haar_state(rng, net.layout());
    const Qfim f = qfim_pure(psi, net);
    const RealVector v = gaussian_real(rng, 3, 1).col(0).normalized();
    const RealMatrix m = orthogonal_completion(v);
    EXPECT_TRUE(is_orthogonal(m));
    EXPECT_MAT_NEAR(RealVector(m.row(0).transpose()), v, 1e-15);
    const auto gens = global_generators(net);
    std::vector<HermitianOperator> rotated;
    for (Eigen::Index j = 0; j < 3; ++j) {
      ComplexMatrix acc = ComplexMatrix::Zero(8, 8);
      for (Eigen::Index k = 0; k < 3; ++k) acc += m(j, k) * gens[static_cast<std::size_t>(k)].matrix();
      rotated.emplace_back(acc);
    }
    EXPECT_LE(max_diff(rotate_qfim(f, m).matrix(), qfim_pure(psi, rotated).matrix()), 1e-10);
  }
  EXPECT_THROW(rotate_qfim(Qfim(RealMatrix::Identity(2, 2), Partition::whole(2)), RealMatrix::Ones(2, 2)),
               PreconditionError);
}

TEST(QcrbTest, DiagonalAndWeighted) {
  RealMatrix f(2, 2);
  f << 4, 0, 0, 2;
  const Qfim q(f, Partition({1, 1}));
  const BoundReport r = qcrb(q, WeightMatrix((RealVector(2) << 1, 3).finished()), 2);
  EXPECT_NEAR(r.bound, (0.25 + 1.5) / 2, 1e-15);
  EXPECT_FALSE(r.singular);
  EXPECT_NEAR(weighted_inverse_trace(q, WeightMatrix::identity(2)), 0.75, 1e-15);
  EXPECT_THROW(qcrb(q, WeightMatrix::identity(3), 1), DimensionError);
  EXPECT_THROW(qcrb(q, WeightMatrix::identity(2), 0), PreconditionError);
}

TEST(QcrbTest, SingularReportsUndeterminedDirections) {
  // GHZ on two qubits: only phi_1 + phi_2 is visible.
  const Qfim f(RealMatrix::Ones(2, 2), Partition({1, 1}));
  const BoundReport r = qcrb(f, WeightMatrix::identity(2), 1);
  EXPECT_TRUE(r.singular);
  EXPECT_EQ(r.support_dim, 1u);
  EXPECT_TRUE(std::isinf(r.bound));
  EXPECT_EQ(r.undetermined_parameters, (std::vector<std::size_t>{0, 1}));
  ASSERT_EQ(r.undetermined_directions.cols(), 1);
  EXPECT_NEAR(std::abs(r.undetermined_directions(0, 0) + r.undetermined_directions(1, 0)), 0.0, 1e-12);
  EXPECT_THROW(weighted_inverse_trace(f, WeightMatrix::identity(2)), SingularError);
  const LinearBound sum = linear_functional_bound(f, (RealVector(2) << kSqrtHalf, kSqrtHalf).finished(), 1);
  EXPECT_TRUE(sum.determined);
  EXPECT_NEAR(sum.variance, 0.5, 1e-12);  // F = 2 v v^T
  EXPECT_FALSE(linear_functional_bound(f, (RealVector(2) << kSqrtHalf, -kSqrtHalf).finished(), 1).determined);
}

TEST(QcrbTest, MonotoneUnderPsdIncrease) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng rng = trial_rng(45, t);
    const std::size_t d = uniform_index(rng, 1, 6);
    const RealMatrix g = gaussian_real(rng, d, d), h = gaussian_real(rng, d, 2);
    const RealMatrix f = g * g.transpose() + 0.1 * RealMatrix::Identity(g.rows(), g.cols());
    const Qfim a(f, Partition::whole(d));
    const Qfim b(f + h * h.transpose(), Partition::whole(d));
    RealVector w(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = uniform_real(rng, 0.1, 2.0);
    EXPECT_LE(qcrb(b, WeightMatrix(w), 1).bound, qcrb(a, WeightMatrix(w), 1).bound + 1e-12);
    EXPECT_NEAR(qcrb(a, WeightMatrix(w), 3).bound * 3, qcrb(a, WeightMatrix(w), 1).bound, 1e-10);
  }
}

TEST(Prop1Test, HandCase) {
  RealMatrix f(2, 2);
  f << 2, 1, 1, 2;
  const Prop1Report r = prop1_check(Qfim(f, Partition({1, 1})));
  ASSERT_EQ(r.blocks.size(), 2u);
  for (const auto& b : r.blocks) {
    EXPECT_NEAR(b.min_eigenvalue, 2.0 / 3.0 - 0.5, 1e-15);
    EXPECT_FALSE(b.block_diagonal);
  }
  EXPECT_NEAR(r.min_residual(), 1.0 / 6.0, 1e-15);
  EXPECT_THROW(prop1_check(Qfim(RealMatrix::Ones(2, 2), Partition({1, 1}))), SingularError);
}

TEST(Prop1Test, MatchesSchurComplementOracle) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng = trial_rng(46, t);
    const std::size_t d = uniform_index(rng, 2, 8);
    std::vector<std::size_t> sizes;
    for (std::size_t left = d; left > 0;) {
      const std::size_t s = uniform_index(rng, 1, left);
      sizes.push_back(s);
      left -= s;
    }
    const RealMatrix g = gaussian_real(rng, d, d);
    const RealMatrix f = g * g.transpose() + 0.05 * RealMatrix::Identity(g.rows(), g.cols());
    const Qfim q(f, Partition(sizes));
    const Prop1Report r = prop1_check(q);
    const RealMatrix inv = f.inverse();
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(q.partition().offset(k));
      const auto n = static_cast<Eigen::Index>(sizes[k]);
      if (n < static_cast<Eigen::Index>(d)) {
        EXPECT_LE(max_diff(schur_inverse_block(f, off, n), RealMatrix(inv.block(off, off, n, n))),
                  1e-8 * std::max(1.0, inv.cwiseAbs().maxCoeff()));
      }
      const RealMatrix diff = inv.block(off, off, n, n) - f.block(off, off, n, n).inverse();
      const double oracle = Eigen::SelfAdjointEigenSolver<RealMatrix>((diff + diff.transpose()) * 0.5).eigenvalues().minCoeff();
      EXPECT_NEAR(r.blocks[k].min_eigenvalue, oracle, 1e-8 * std::max(1.0, std::abs(oracle)));
      EXPECT_GE(r.blocks[k].min_eigenvalue, -1e-9);
    }
  }
}

TEST(Prop1Test, BlockDiagonalGivesEquality) {
  RealMatrix f = RealMatrix::Zero(3, 3);
  f << 2, 0.5, 0, 0.5, 1, 0, 0, 0, 3;
  const Prop1Report r = prop1_check(Qfim(f, Partition({2, 1})));
  for (const auto& b : r.blocks) {
    EXPECT_TRUE(b.block_diagonal);
    EXPECT_LE(b.max_abs_difference, 1e-12);
  }
}

TEST(CfimTest, QubitMeasurements) {
  const SensorNetwork net({testing::qubit_sensor()});
  // sigma_y eigenbasis saturates the QFI at phi = 0; sigma_z eigenbasis sees nothing.
  ComplexVector yp(2), ym(2);
  yp << kSqrtHalf, cplx(0, kSqrtHalf);
  ym << kSqrtHalf, cplx(0, -kSqrtHalf);
  const std::vector<ComplexMatrix> y_basis{yp * yp.adjoint(), ym * ym.adjoint()};
  EXPECT_NEAR(cfim(y_basis, net, plus_state(), ParameterPoint::zero(1))(0, 0), 1.0, 1e-5);
  const std::vector<ComplexMatrix> z_basis{PureState::basis(2, 0).amplitudes() * PureState::basis(2, 0).amplitudes().adjoint(),
                                           PureState::basis(2, 1).amplitudes() * PureState::basis(2, 1).amplitudes().adjoint()};
  EXPECT_NEAR(cfim(z_basis, net, plus_state(), ParameterPoint::zero(1))(0, 0), 0.0, 1e-10);
}

TEST(CfimTest, RejectsInvalidPovms) {
  const SensorNetwork net({testing::qubit_sensor()});
  const std::vector<ComplexMatrix> half{identity(2) * 0.5};
  EXPECT_THROW(cfim(half, net, plus_state(), ParameterPoint::zero(1)), PreconditionError);
  const std::vector<ComplexMatrix> wrong{identity(4)};
  EXPECT_THROW(cfim(wrong, net, plus_state(), ParameterPoint::zero(1)), DimensionError);
  ComplexMatrix neg = identity(2);
  neg(0, 0) = 2.0;
  neg(1, 1) = -1.0;
  const std::vector<ComplexMatrix> signed_effects{neg, identity(2) - neg};
  EXPECT_THROW(cfim(signed_effects, net, plus_state(), ParameterPoint::zero(1)), PreconditionError);
}

TEST(CfimTest, RandomPovmNeedsFullRankSum) {
  Rng rng = trial_rng(48, 0);
  EXPECT_THROW(random_povm(rng, 4, 2, 1), PreconditionError);
  const auto povm = random_povm(rng, 3, 2, 2);
  ComplexMatrix sum = ComplexMatrix::Zero(3, 3);
  for (const auto& e : povm) {
    EXPECT_LE(max_diff(e, ComplexMatrix(e.adjoint())), 1e-14);
    EXPECT_GE(eigh(HermitianOperator((e + e.adjoint()) * 0.5)).values.minCoeff(), -1e-12);
    sum += e;
  }
  EXPECT_LE(max_diff(sum, identity(3)), 1e-12);
}

TEST(CfimTest, BoundedByQfimForRandomPovms) {
  auto min_gap = [](const RealMatrix& q, const RealMatrix& c) {
    const RealMatrix gap = q - c;
    return Eigen::SelfAdjointEigenSolver<RealMatrix>((gap + gap.transpose()) * 0.5).eigenvalues().minCoeff();
  };
  for (std::uint64_t t = 0; t < 30; ++t) {
    Rng rng = trial_rng(47, t);
    const std::size_t rank = uniform_index(rng, 1, 2);
    const auto povm = random_povm(rng, 4, uniform_index(rng, 4 / rank, 6), rank);
    // Non-commuting generators on one sensor: -i[H_k, rho] is the derivative only at phi = 0.
    const SensorNetwork mixed_regime({SensorSpec(2, {random_hermitian(rng, 2)}, ops::zero(2)),
                                      SensorSpec(2, {random_hermitian(rng, 2), random_hermitian(rng, 2)}, ops::zero(2))});
    const DensityOperator rho = random_density(rng, mixed_regime.layout(), 2);
    EXPECT_GE(min_gap(qfim_mixed(rho, mixed_regime).qfim.matrix(), cfim(povm, mixed_regime, rho, ParameterPoint::zero(3))),
              -1e-6);
    // One generator per sensor commutes with the encoding, so the QFIM at the encoded state
    // bounds the CFIM at any phi.
    const SensorNetwork commuting({SensorSpec(2, {random_hermitian(rng, 2)}, ops::zero(2)),
                                   SensorSpec(2, {random_hermitian(rng, 2)}, ops::zero(2))});
    RealVector phi(2);
    for (Eigen::Index k = 0; k < 2; ++k) phi(k) = uniform_real(rng, -1, 1);
    const RealMatrix c = cfim(povm, commuting, rho, ParameterPoint(phi));
    const Qfim q = qfim_mixed(encode(commuting, rho, ParameterPoint(phi)), commuting).qfim;
    EXPECT_GE(min_gap(q.matrix(), c), -1e-6);
  }
}

}  // namespace
}  // namespace qsn
