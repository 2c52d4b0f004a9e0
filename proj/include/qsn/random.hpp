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

// Seeded random ensembles. Every sampler takes the engine explicitly; audits
// derive one engine per trial from (seed, trial index) so trials are
// independent of evaluation order.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qsn/hilbert.hpp"

namespace qsn {

using Rng = std::mt19937_64;

inline Rng trial_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline ComplexMatrix gaussian_complex(Rng& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = cplx(re, im);
    }
  return m;
}

inline RealMatrix gaussian_real(Rng& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  RealMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = n(rng);
  return m;
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of R's
/// diagonal moved into Q.
inline ComplexMatrix haar_unitary(Rng& rng, std::size_t dim) {
  const ComplexMatrix g = gaussian_complex(rng, dim, dim);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * identity(dim);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const double a = std::abs(r(i, i));
    if (a > 0.0) q.col(i) *= r(i, i) / a;
  }
  return q;
}

/// Haar-random pure state (normalised complex Gaussian vector).
inline PureState haar_state(Rng& rng, const Layout& layout) {
  const std::size_t dim = layout_dimension(layout);
  return PureState::normalized(gaussian_complex(rng, dim, 1).col(0), layout);
}

/// Mixed state obtained by tracing an environment of dimension env_dim out of
/// a Haar-random pure state on system (x) environment.
inline DensityOperator random_density(Rng& rng, const Layout& layout, std::size_t env_dim) {
  Layout joint = layout;
  joint.push_back(env_dim);
  const PureState psi = haar_state(rng, joint);
  const std::size_t env_site = layout.size();
  return partial_trace(psi, std::span<const std::size_t>(&env_site, 1));
}

/// GUE-style random Hermitian matrix (G + G^dagger)/2.
inline HermitianOperator random_hermitian(Rng& rng, std::size_t dim) {
  const ComplexMatrix g = gaussian_complex(rng, dim, dim);
  return HermitianOperator((g + g.adjoint()) * 0.5);
}

/// Random POVM with `outcomes` rank-`rank` effects: A_m = G_m G_m^dagger
/// normalised as S^{-1/2} A_m S^{-1/2} with S = sum_m A_m. S is invertible
/// only when outcomes * rank >= dim.
inline std::vector<ComplexMatrix> random_povm(Rng& rng, std::size_t dim, std::size_t outcomes, std::size_t rank = 1) {
  if (rank == 0 || outcomes * rank < dim) {
    throw PreconditionError("random_povm: outcomes * rank must be at least the dimension");
  }
  std::vector<ComplexMatrix> raw;
  ComplexMatrix sum = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t m = 0; m < outcomes; ++m) {
    const ComplexMatrix g = gaussian_complex(rng, dim, rank);
    raw.push_back(g * g.adjoint());
    sum += raw.back();
  }
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sum);
  const ComplexMatrix inv_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  for (auto& a : raw) a = inv_sqrt * a * inv_sqrt;
  return raw;
}

}  // namespace qsn
