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

#pragma once

#include "qsn/hilbert.hpp"

namespace qsn::ops {

inline HermitianOperator sigma_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianOperator(m);
}

inline HermitianOperator sigma_y() {
  ComplexMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return HermitianOperator(m);
}

inline HermitianOperator sigma_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return HermitianOperator(m);
}

inline HermitianOperator scaled(const HermitianOperator& op, double factor) {
  return HermitianOperator(op.matrix() * factor);
}

inline HermitianOperator diagonal(const RealVector& entries) {
  return HermitianOperator(entries.cast<cplx>().asDiagonal().toDenseMatrix());
}

inline HermitianOperator zero(std::size_t dim) {
  return HermitianOperator(ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

/// Photon number on a mode truncated to {|0>, ..., |cutoff>}.
inline HermitianOperator number_operator(std::size_t cutoff) {
  RealVector n(static_cast<Eigen::Index>(cutoff + 1));
  for (Eigen::Index i = 0; i < n.size(); ++i) n(i) = static_cast<double>(i);
  return diagonal(n);
}

/// J_z = (1/2) sum_j sigma_z,j on n qubits in the full 2^n space. Basis bit 0
/// is |up> (sigma_z = +1), bit 1 is |down>, so |0...0> is all-up.
inline HermitianOperator jz_full(std::size_t qubits) {
  const std::size_t dim = layout_dimension(Layout(qubits, 2));
  RealVector d(static_cast<Eigen::Index>(dim));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    int down = 0;
    for (std::size_t q = 0; q < qubits; ++q) down += static_cast<int>((idx >> q) & 1U);
    d(static_cast<Eigen::Index>(idx)) = 0.5 * (static_cast<double>(qubits) - 2.0 * down);
  }
  return diagonal(d);
}

/// Number of excited (down) qubits in the full 2^n space.
inline HermitianOperator excitation_count_full(std::size_t qubits) {
  const std::size_t dim = layout_dimension(Layout(qubits, 2));
  RealVector d(static_cast<Eigen::Index>(dim));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    int down = 0;
    for (std::size_t q = 0; q < qubits; ++q) down += static_cast<int>((idx >> q) & 1U);
    d(static_cast<Eigen::Index>(idx)) = down;
  }
  return diagonal(d);
}

/// J_z on the (n+1)-dimensional symmetric sector, basis ordered m = -n/2 ... n/2.
inline HermitianOperator jz_collective(std::size_t qubits) {
  RealVector d(static_cast<Eigen::Index>(qubits + 1));
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = -0.5 * static_cast<double>(qubits) + static_cast<double>(i);
  return diagonal(d);
}

}  // namespace qsn::ops
