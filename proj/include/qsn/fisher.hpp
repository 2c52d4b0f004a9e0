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

// Quantum and classical Fisher information.
//
// All quantities are evaluated at the fiducial point phi = 0 of the
// exponential family U(phi) = exp(-i sum_k phi_k H_k) (per sensor), where the
// derivative of the encoded state is -i[H_k, rho].

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsn/hilbert.hpp"
#include "qsn/network.hpp"

namespace qsn {

/// Relative eigenvalue threshold deciding the support of a QFIM.
inline constexpr double kQfimRankTol = 1e-10;
/// Eigenvalue-sum threshold below which SLD matrix elements are set to zero.
inline constexpr double kDensityRankTol = 1e-12;

/// Real symmetric PSD d x d matrix with the parameter partition it was built for.
class Qfim {
 public:
  Qfim(RealMatrix matrix, Partition partition) : partition_(std::move(partition)) {
    if (matrix.rows() != matrix.cols()) throw DimensionError("QFIM must be square");
    if (partition_.num_blocks() > 0 && partition_.total() != static_cast<std::size_t>(matrix.rows())) {
      throw DimensionError("partition does not cover the QFIM dimension");
    }
    if (!matrix.allFinite()) throw Error("QFIM has non-finite entries");
    const double scale = std::max(1.0, matrix.size() ? matrix.cwiseAbs().maxCoeff() : 0.0);
    if (matrix.size() && (matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw Error("QFIM is not symmetric");
    }
    matrix_ = (matrix + matrix.transpose()) * 0.5;
    if (matrix_.size()) {
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(matrix_, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-9 * scale) {
        throw Error("QFIM is not positive semidefinite (min eigenvalue " +
                    std::to_string(es.eigenvalues().minCoeff()) + ")");
      }
    }
  }

  const RealMatrix& matrix() const { return matrix_; }
  const Partition& partition() const { return partition_; }
  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  RealMatrix matrix_;
  Partition partition_;
};

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

namespace detail {

inline Qfim qfim_from_images(const ComplexVector& psi, const std::vector<ComplexVector>& images, Partition partition) {
  const auto d = static_cast<Eigen::Index>(images.size());
  RealVector mean(d);
  for (Eigen::Index k = 0; k < d; ++k) mean(k) = psi.dot(images[static_cast<std::size_t>(k)]).real();
  RealMatrix f(d, d);
  for (Eigen::Index m = 0; m < d; ++m) {
    for (Eigen::Index n = m; n < d; ++n) {
      // 2 <{H_m, H_n}> = 4 Re <H_m psi | H_n psi>
      const double anti = 4.0 * images[static_cast<std::size_t>(m)].dot(images[static_cast<std::size_t>(n)]).real();
      f(m, n) = f(n, m) = anti - 4.0 * mean(m) * mean(n);
    }
  }
  return Qfim(std::move(f), std::move(partition));
}

}  // namespace detail

/// F_mn = 2<{H_m, H_n}> - 4<H_m><H_n> for full-space generators.
inline Qfim qfim_pure(const PureState& psi, std::span<const HermitianOperator> generators,
                      std::optional<Partition> partition = std::nullopt) {
  std::vector<ComplexVector> images;
  for (const auto& h : generators) {
    if (h.dim() != psi.dim()) throw DimensionError("qfim_pure: generator dimension does not match the state");
    images.push_back(h.matrix() * psi.amplitudes());
  }
  return detail::qfim_from_images(psi.amplitudes(), images,
                                  partition.value_or(Partition::whole(generators.size())));
}

/// Same quantity using the network's local generators (never forms full-space operators).
inline Qfim qfim_pure(const PureState& psi, const SensorNetwork& network) {
  if (psi.layout() != network.layout()) throw DimensionError("qfim_pure: state layout does not match the network");
  std::vector<ComplexVector> images;
  for (std::size_t k = 0; k < network.num_parameters(); ++k) {
    const auto [sensor, j] = network.owner(k);
    images.push_back(apply_local(network.sensor(sensor).generators()[j].matrix(), sensor, psi.layout(), psi.amplitudes()));
  }
  return detail::qfim_from_images(psi.amplitudes(), images, network.partition());
}

// ---------------------------------------------------------------------------
// Mixed states via symmetric logarithmic derivatives
// ---------------------------------------------------------------------------

/// One SLD per parameter, solving d_k rho = (rho L_k + L_k rho)/2 on the support of rho.
struct SldSet {
  std::vector<HermitianOperator> operators;
};

struct MixedQfim {
  Qfim qfim;
  SldSet slds;
  std::size_t support_dim = 0;     // eigenvalues of rho above kDensityRankTol
  std::size_t dropped_pairs = 0;   // (i, j) with p_i + p_j <= kDensityRankTol
};

/// d_k rho = -i [H_k, rho] at the fiducial point.
inline ComplexMatrix encoding_derivative(const DensityOperator& rho, const HermitianOperator& h) {
  const cplx minus_i(0.0, -1.0);
  return minus_i * (h.matrix() * rho.matrix() - rho.matrix() * h.matrix());
}

/// F_kl = Tr[rho (L_k L_l + L_l L_k)]/2 with L_ij = 2 (d rho)_ij / (p_i + p_j)
/// in the eigenbasis of rho.
inline MixedQfim qfim_mixed(const DensityOperator& rho, std::span<const HermitianOperator> generators,
                            std::optional<Partition> partition = std::nullopt) {
  const Eigh e = eigh(rho);
  const ComplexMatrix& v = e.vectors;
  const RealVector& p = e.values;
  const Eigen::Index n = p.size();
  const auto d = static_cast<Eigen::Index>(generators.size());

  MixedQfim out{Qfim(RealMatrix::Zero(d, d), partition.value_or(Partition::whole(generators.size()))), {}, 0, 0};
  for (Eigen::Index i = 0; i < n; ++i)
    if (p(i) > kDensityRankTol) ++out.support_dim;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (p(i) + p(j) <= kDensityRankTol) ++out.dropped_pairs;

  std::vector<ComplexMatrix> sld_eigenbasis;
  for (const auto& h : generators) {
    if (h.dim() != rho.dim()) throw DimensionError("qfim_mixed: generator dimension does not match the state");
    const ComplexMatrix deriv = v.adjoint() * encoding_derivative(rho, h) * v;
    ComplexMatrix l = ComplexMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = p(i) + p(j);
        if (s > kDensityRankTol) l(i, j) = 2.0 * deriv(i, j) / s;
      }
    l = (l + l.adjoint()).eval() * 0.5;
    out.slds.operators.emplace_back(v * l * v.adjoint());
    sld_eigenbasis.push_back(std::move(l));
  }

  RealMatrix f(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      // Re Tr[diag(p) L_a L_b]
      const ComplexMatrix& la = sld_eigenbasis[static_cast<std::size_t>(a)];
      const ComplexMatrix& lb = sld_eigenbasis[static_cast<std::size_t>(b)];
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) acc += p(i) * la.row(i).transpose().cwiseProduct(lb.col(i)).sum().real();
      f(a, b) = f(b, a) = acc;
    }
  }
  out.qfim = Qfim(std::move(f), partition.value_or(Partition::whole(generators.size())));
  return out;
}

inline MixedQfim qfim_mixed(const DensityOperator& rho, const SensorNetwork& network) {
  if (rho.layout() != network.layout()) throw DimensionError("qfim_mixed: state layout does not match the network");
  const auto gens = global_generators(network);
  return qfim_mixed(rho, gens, network.partition());
}

/// max-abs of d rho - (rho L + L rho)/2 restricted to eigenvector pairs of rho
/// with p_i + p_j above the rank tolerance.
inline double sld_residual(const DensityOperator& rho, const HermitianOperator& generator, const HermitianOperator& sld) {
  const Eigh e = eigh(rho);
  const ComplexMatrix lhs = encoding_derivative(rho, generator);
  const ComplexMatrix rhs = (rho.matrix() * sld.matrix() + sld.matrix() * rho.matrix()) * 0.5;
  const ComplexMatrix diff = e.vectors.adjoint() * (lhs - rhs) * e.vectors;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < diff.rows(); ++i)
    for (Eigen::Index j = 0; j < diff.cols(); ++j)
      if (e.values(i) + e.values(j) > kDensityRankTol) worst = std::max(worst, std::abs(diff(i, j)));
  return worst;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// Eigen-split of a QFIM into support and null space.
struct QfimSpectrum {
  RealVector values;
  RealMatrix vectors;
  double threshold = 0.0;
  std::size_t support_dim = 0;
  RealMatrix pseudo_inverse;
  RealMatrix null_projector;
};

inline QfimSpectrum qfim_spectrum(const RealMatrix& f) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(f);
  QfimSpectrum s;
  s.values = es.eigenvalues();
  s.vectors = es.eigenvectors();
  const double top = s.values.size() ? s.values.maxCoeff() : 0.0;
  s.threshold = kQfimRankTol * std::max(top, 0.0);
  const Eigen::Index d = f.rows();
  s.pseudo_inverse = RealMatrix::Zero(d, d);
  s.null_projector = RealMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const RealVector u = s.vectors.col(i);
    if (top > 0.0 && s.values(i) > s.threshold) {
      ++s.support_dim;
      s.pseudo_inverse += u * u.transpose() / s.values(i);
    } else {
      s.null_projector += u * u.transpose();
    }
  }
  return s;
}

/// Weighted QCRB. `bound` is (1/mu) sum_k W_kk [F^-1]_kk; it is +inf when a
/// weighted parameter lies outside the QFIM support. `support_bound` always
/// sums over the determined parameters only (pseudo-inverse on the support).
struct BoundReport {
  double bound = 0.0;
  double support_bound = 0.0;
  RealVector diag_inverse;                       // +inf for undetermined parameters
  bool singular = false;
  std::size_t support_dim = 0;
  std::vector<std::size_t> undetermined_parameters;
  RealMatrix undetermined_directions;            // orthonormal null-space columns
  std::vector<double> residuals;                 // per-block inverse residuals, when requested
};

inline constexpr double kDeterminedTol = 1e-8;

inline BoundReport qcrb(const Qfim& f, const WeightMatrix& w, std::size_t repeats) {
  if (repeats == 0) throw PreconditionError("qcrb: the number of repeats must be positive");
  if (w.size() != f.size()) throw DimensionError("qcrb: weight matrix size does not match the QFIM");
  const QfimSpectrum s = qfim_spectrum(f.matrix());
  const auto d = static_cast<Eigen::Index>(f.size());
  const double mu = static_cast<double>(repeats);
  BoundReport r;
  r.support_dim = s.support_dim;
  r.singular = s.support_dim < f.size();
  r.diag_inverse = RealVector::Zero(d);
  r.undetermined_directions = RealMatrix(d, static_cast<Eigen::Index>(f.size() - s.support_dim));
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const bool in_support = s.values(i) > s.threshold && s.values.maxCoeff() > 0.0;
    if (!in_support) r.undetermined_directions.col(col++) = s.vectors.col(i);
  }
  const double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < d; ++k) {
    const bool determined = s.null_projector.col(k).norm() <= kDeterminedTol;
    const double wk = w.diagonal()(k);
    if (determined) {
      r.diag_inverse(k) = s.pseudo_inverse(k, k);
      r.support_bound += wk * s.pseudo_inverse(k, k) / mu;
    } else {
      r.diag_inverse(k) = inf;
      r.undetermined_parameters.push_back(static_cast<std::size_t>(k));
    }
  }
  r.bound = r.support_bound;
  for (std::size_t k : r.undetermined_parameters)
    if (w.diagonal()(static_cast<Eigen::Index>(k)) > 0.0) r.bound = inf;
  return r;
}

/// Tr(W F^-1) for an invertible F; throws SingularError otherwise.
inline double weighted_inverse_trace(const Qfim& f, const WeightMatrix& w) {
  const BoundReport r = qcrb(f, w, 1);
  if (r.singular) throw SingularError("weighted_inverse_trace: QFIM is singular");
  return r.bound;
}

/// Bound on Var(v^T Phi) = v^T F^+ v / mu when v lies in the QFIM support, +inf otherwise.
struct LinearBound {
  double variance = 0.0;
  bool determined = true;
};

inline LinearBound linear_functional_bound(const Qfim& f, const RealVector& v, std::size_t repeats) {
  if (static_cast<std::size_t>(v.size()) != f.size()) throw DimensionError("linear_functional_bound: size mismatch");
  if (repeats == 0) throw PreconditionError("linear_functional_bound: the number of repeats must be positive");
  const QfimSpectrum s = qfim_spectrum(f.matrix());
  if ((s.null_projector * v).norm() > kDeterminedTol * std::max(1.0, v.norm())) {
    return {std::numeric_limits<double>::infinity(), false};
  }
  return {v.dot(s.pseudo_inverse * v) / static_cast<double>(repeats), true};
}

// ---------------------------------------------------------------------------
// Reparameterisation
// ---------------------------------------------------------------------------

inline bool is_orthogonal(const RealMatrix& m, double tolerance = 1e-10) {
  if (m.rows() != m.cols()) return false;
  return (m * m.transpose() - RealMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tolerance;
}

/// F(theta) = M F(phi) M^T for theta = M phi. The result carries a single
/// partition block since derived parameters are global.
inline Qfim rotate_qfim(const Qfim& f, const RealMatrix& m) {
  if (static_cast<std::size_t>(m.rows()) != f.size() || !is_orthogonal(m)) {
    throw PreconditionError("rotate_qfim: M must be a " + std::to_string(f.size()) + "x" +
                            std::to_string(f.size()) + " orthogonal matrix");
  }
  return Qfim(m * f.matrix() * m.transpose(), Partition::whole(f.size()));
}

/// Orthogonal matrix whose first row is v; the remaining rows come from
/// Gram-Schmidt over e_1, e_2, ... in order, skipping dependent vectors.
inline RealMatrix orthogonal_completion(const RealVector& v) {
  if (v.size() == 0 || v.norm() == 0.0) throw PreconditionError("orthogonal_completion: zero vector");
  if (std::abs(v.norm() - 1.0) > 1e-10) throw PreconditionError("orthogonal_completion: v must have unit norm");
  const Eigen::Index d = v.size();
  RealMatrix m = RealMatrix::Zero(d, d);
  m.row(0) = v.transpose();
  Eigen::Index filled = 1;
  for (Eigen::Index e = 0; e < d && filled < d; ++e) {
    RealVector u = RealVector::Unit(d, e);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index r = 0; r < filled; ++r) u -= m.row(r).dot(u) * m.row(r).transpose();
    const double n = u.norm();
    if (n < 1e-6) continue;
    m.row(filled++) = (u / n).transpose();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Partition blocks
// ---------------------------------------------------------------------------

inline RealMatrix block(const Qfim& f, std::size_t k) {
  const auto off = static_cast<Eigen::Index>(f.partition().offset(k));
  const auto n = static_cast<Eigen::Index>(f.partition().size(k));
  return f.matrix().block(off, off, n, n);
}

struct InverseBlock {
  RealMatrix matrix;
  bool singular = false;  // matrix is the block of the support pseudo-inverse
};

/// [F^-1]_[kk]; for singular F the block of the support pseudo-inverse, flagged.
inline InverseBlock inverse_block(const Qfim& f, std::size_t k) {
  const auto off = static_cast<Eigen::Index>(f.partition().offset(k));
  const auto n = static_cast<Eigen::Index>(f.partition().size(k));
  const QfimSpectrum s = qfim_spectrum(f.matrix());
  if (s.support_dim < f.size()) return {s.pseudo_inverse.block(off, off, n, n), true};
  const RealMatrix inv = f.matrix().ldlt().solve(RealMatrix::Identity(f.matrix().rows(), f.matrix().cols()));
  return {inv.block(off, off, n, n), false};
}

struct BlockResidual {
  double min_eigenvalue = 0.0;     // of [F^-1]_[kk] - [F_[kk]]^-1
  double max_abs_difference = 0.0;
  double off_diagonal_max = 0.0;   // largest |F_[jk]| over j != k
  bool block_diagonal = false;     // off_diagonal_max <= 1e-10
};

struct Prop1Report {
  std::vector<BlockResidual> blocks;
  double min_residual() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) m = std::min(m, b.min_eigenvalue);
    return m;
  }
};

inline constexpr double kBlockDiagonalTol = 1e-10;

/// Checks [F^-1]_[kk] >= [F_[kk]]^-1 in the PSD order for every block of an
/// invertible F. Equality is expected exactly when row-block k of F vanishes
/// off the diagonal.
inline Prop1Report prop1_check(const Qfim& f) {
  const QfimSpectrum s = qfim_spectrum(f.matrix());
  if (s.support_dim < f.size()) throw SingularError("prop1_check: QFIM is singular");
  const Partition& part = f.partition();
  if (part.num_blocks() == 0) throw DimensionError("prop1_check: QFIM has no partition");
  const Eigen::Index d = f.matrix().rows();
  const RealMatrix inv = f.matrix().ldlt().solve(RealMatrix::Identity(d, d));
  Prop1Report out;
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    const auto off = static_cast<Eigen::Index>(part.offset(k));
    const auto n = static_cast<Eigen::Index>(part.size(k));
    const RealMatrix fk = f.matrix().block(off, off, n, n);
    const RealMatrix fk_inv = fk.ldlt().solve(RealMatrix::Identity(n, n));
    RealMatrix diff = inv.block(off, off, n, n) - fk_inv;
    diff = (diff + diff.transpose()).eval() * 0.5;
    BlockResidual b;
    b.min_eigenvalue = Eigen::SelfAdjointEigenSolver<RealMatrix>(diff, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    b.max_abs_difference = diff.cwiseAbs().maxCoeff();
    RealMatrix rows = f.matrix().middleRows(off, n);
    rows.middleCols(off, n).setZero();
    b.off_diagonal_max = rows.size() ? rows.cwiseAbs().maxCoeff() : 0.0;
    b.block_diagonal = b.off_diagonal_max <= kBlockDiagonalTol;
    out.blocks.push_back(b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classical Fisher information
// ---------------------------------------------------------------------------

inline constexpr double kCfimStep = 1e-5;
inline constexpr double kCfimProbabilityFloor = 1e-12;

/// CFIM of the POVM `effects` on encode(network, rho, phi) at phi0, using
/// central differences of the outcome probabilities.
inline RealMatrix cfim(std::span<const ComplexMatrix> effects, const SensorNetwork& network, const DensityOperator& rho,
                       const ParameterPoint& phi0) {
  const std::size_t dim = network.total_dim();
  if (effects.empty()) throw PreconditionError("cfim: empty POVM");
  ComplexMatrix sum = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t m = 0; m < effects.size(); ++m) {
    if (static_cast<std::size_t>(effects[m].rows()) != dim || effects[m].rows() != effects[m].cols()) {
      throw DimensionError("cfim: effect " + std::to_string(m) + " does not match the network dimension");
    }
    const HermitianOperator e(effects[m]);
    if (eigh(e).values.minCoeff() < -1e-9) throw PreconditionError("cfim: effect " + std::to_string(m) + " is not PSD");
    sum += effects[m];
  }
  if (max_abs(sum - identity(dim)) > 1e-9) throw PreconditionError("cfim: POVM effects do not sum to the identity");

  const std::size_t d = network.num_parameters();
  auto probabilities = [&](const RealVector& phi) {
    const DensityOperator enc = encode(network, rho, ParameterPoint(phi));
    RealVector p(static_cast<Eigen::Index>(effects.size()));
    for (std::size_t m = 0; m < effects.size(); ++m)
      p(static_cast<Eigen::Index>(m)) = (effects[m] * enc.matrix()).trace().real();
    return p;
  };
  const RealVector p0 = probabilities(phi0.values());
  RealMatrix grads(static_cast<Eigen::Index>(effects.size()), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    RealVector plus = phi0.values(), minus = phi0.values();
    plus(static_cast<Eigen::Index>(k)) += kCfimStep;
    minus(static_cast<Eigen::Index>(k)) -= kCfimStep;
    grads.col(static_cast<Eigen::Index>(k)) = (probabilities(plus) - probabilities(minus)) / (2.0 * kCfimStep);
  }
  RealMatrix out = RealMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index m = 0; m < p0.size(); ++m) {
    if (p0(m) < kCfimProbabilityFloor) continue;
    out += grads.row(m).transpose() * grads.row(m) / p0(m);
  }
  return out;
}

inline RealMatrix cfim(std::span<const ComplexMatrix> effects, const SensorNetwork& network, const PureState& psi,
                       const ParameterPoint& phi0) {
  return cfim(effects, network, DensityOperator::from_pure(psi), phi0);
}

}  // namespace qsn
