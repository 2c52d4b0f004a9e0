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

// Dense complex linear algebra on tensor-product Hilbert spaces.
//
// Subsystems are ordered left to right: for a layout {d0, d1, ..., dn-1} the
// basis index of |i0 i1 ... in-1> is ((i0 * d1 + i1) * d2 + i2) ..., which is
// the same ordering the Kronecker product produces.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qsn/error.hpp"

namespace qsn {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Per-subsystem dimensions, leftmost subsystem first.
using Layout = std::vector<std::size_t>;

namespace tol {
inline constexpr double kHermiticity = 1e-12;  // relative to the largest entry
inline constexpr double kNorm = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kPsdSlack = 1e-10;
inline constexpr double kUnitarity = 1e-10;
}  // namespace tol

inline constexpr std::size_t kDefaultMaxDimension = 4096;

namespace detail {

inline std::size_t max_dimension_from_env() {
  const char* raw = std::getenv("QSN_MAX_DIM");
  if (raw == nullptr || *raw == '\0') return kDefaultMaxDimension;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0) return kDefaultMaxDimension;
  return static_cast<std::size_t>(v);
}

inline std::atomic<std::size_t>& max_dimension_storage() {
  static std::atomic<std::size_t> value{max_dimension_from_env()};
  return value;
}

}  // namespace detail

/// Largest total Hilbert-space dimension any operation may produce.
/// Initialised from QSN_MAX_DIM when set, otherwise 4096.
inline std::size_t max_dimension() { return detail::max_dimension_storage().load(); }

inline void set_max_dimension(std::size_t dim) {
  if (dim == 0) throw DimensionError("maximum dimension must be positive");
  detail::max_dimension_storage().store(dim);
}

inline void check_dimension(std::size_t dim, const char* what) {
  if (dim > max_dimension()) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(dim) +
                         " exceeds the configured maximum " + std::to_string(max_dimension()));
  }
}

/// Product of the layout entries, checked against max_dimension().
inline std::size_t layout_dimension(const Layout& layout) {
  std::size_t dim = 1;
  for (std::size_t d : layout) {
    if (d == 0) throw DimensionError("layout contains a zero-dimensional subsystem");
    if (dim > max_dimension() / d) {
      throw DimensionError("layout dimension exceeds the configured maximum " +
                           std::to_string(max_dimension()));
    }
    dim *= d;
  }
  return dim;
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

/// Max-abs entry of AB - BA.
inline double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
  return max_abs(a * b - b * a);
}

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

class HermitianOperator {
 public:
  /// Validates squareness, finiteness and Hermiticity, then stores (A + A^dagger)/2.
  explicit HermitianOperator(ComplexMatrix m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw DimensionError("Hermitian operator must be a non-empty square matrix");
    }
    if (!all_finite(m)) throw HermiticityError("operator has non-finite entries");
    const double scale = max_abs(m);
    const double skew = max_abs(m - m.adjoint());
    if (skew > tol::kHermiticity * scale) {
      throw HermiticityError("operator is not Hermitian (max |A - A^dagger| = " +
                             std::to_string(skew) + ")");
    }
    matrix_ = (m + m.adjoint()) * 0.5;
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  ComplexMatrix matrix_;
};

class PureState {
 public:
  PureState(ComplexVector amplitudes, Layout layout)
      : amplitudes_(std::move(amplitudes)), layout_(std::move(layout)) {
    if (layout_dimension(layout_) != static_cast<std::size_t>(amplitudes_.size())) {
      throw DimensionError("state vector length does not match the layout");
    }
    if (!all_finite(amplitudes_)) throw StateError("state has non-finite amplitudes");
    const double norm = amplitudes_.norm();
    if (std::abs(norm - 1.0) > tol::kNorm) {
      throw StateError("state is not normalised (norm = " + std::to_string(norm) + ")");
    }
  }

  /// Rescales a non-zero vector to unit norm before validation.
  static PureState normalized(ComplexVector amplitudes, Layout layout) {
    const double norm = amplitudes.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw StateError("cannot normalise a zero vector");
    amplitudes /= norm;
    return PureState(std::move(amplitudes), std::move(layout));
  }

  /// Computational basis vector |index> on a single subsystem of dimension dim.
  static PureState basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw DimensionError("basis index out of range");
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(std::move(v), Layout{dim});
  }

  const ComplexVector& amplitudes() const { return amplitudes_; }
  const Layout& layout() const { return layout_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }

 private:
  ComplexVector amplitudes_;
  Layout layout_;
};

class DensityOperator {
 public:
  /// Validates Hermiticity, unit trace and eigenvalues >= -1e-10.
  DensityOperator(ComplexMatrix m, Layout layout) : layout_(std::move(layout)) {
    const std::size_t dim = layout_dimension(layout_);
    if (static_cast<std::size_t>(m.rows()) != dim || m.rows() != m.cols()) {
      throw DimensionError("density matrix shape does not match the layout");
    }
    HermitianOperator h(std::move(m));
    matrix_ = h.matrix();
    check_trace();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(matrix_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::kPsdSlack) {
      throw StateError("density matrix is not positive semidefinite (min eigenvalue " +
                       std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
  }

  static DensityOperator from_pure(const PureState& psi) {
    const ComplexVector& a = psi.amplitudes();
    return DensityOperator(Unchecked{}, a * a.adjoint(), psi.layout());
  }

  /// Divides by the trace before validation.
  static DensityOperator normalized(ComplexMatrix m, Layout layout) {
    const cplx tr = m.trace();
    if (!(std::abs(tr) > 0.0)) throw StateError("cannot normalise a traceless matrix");
    m /= tr.real();
    return DensityOperator(std::move(m), std::move(layout));
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  const Layout& layout() const { return layout_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  struct Unchecked {};
  // Positivity holds by construction; only the trace is re-checked.
  DensityOperator(Unchecked, ComplexMatrix m, Layout layout)
      : matrix_(std::move(m)), layout_(std::move(layout)) {
    matrix_ = (matrix_ + matrix_.adjoint()).eval() * 0.5;
    check_trace();
  }

  void check_trace() const {
    const double tr = matrix_.trace().real();
    if (std::abs(tr - 1.0) > tol::kTrace) {
      throw StateError("density matrix trace is " + std::to_string(tr) + ", expected 1");
    }
  }

  friend DensityOperator partial_trace(const DensityOperator&, std::span<const std::size_t>);
  friend DensityOperator partial_trace(const PureState&, std::span<const std::size_t>);

  ComplexMatrix matrix_;
  Layout layout_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

/// Kronecker product: entry (i*rb + k, j*cb + l) = a(i, j) * b(k, l).
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!all_finite(a) || !all_finite(b)) throw DimensionError("tensor_product: non-finite input");
  const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
  const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
  check_dimension(rows, "tensor_product");
  check_dimension(cols, "tensor_product");
  ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Tensor product of state vectors; layouts concatenate.
inline PureState tensor_product(const PureState& a, const PureState& b) {
  ComplexMatrix v = tensor_product(ComplexMatrix(a.amplitudes()), ComplexMatrix(b.amplitudes()));
  Layout layout = a.layout();
  layout.insert(layout.end(), b.layout().begin(), b.layout().end());
  return PureState::normalized(v.col(0), std::move(layout));
}

namespace detail {

struct SiteStrides {
  std::size_t left = 1;   // product of dims before the site
  std::size_t local = 1;  // dim of the site
  std::size_t right = 1;  // product of dims after the site
};

inline SiteStrides site_strides(std::size_t site, const Layout& layout) {
  if (site >= layout.size()) {
    throw DimensionError("site " + std::to_string(site) + " out of range for a layout of " +
                         std::to_string(layout.size()) + " subsystems");
  }
  SiteStrides s;
  for (std::size_t i = 0; i < site; ++i) s.left *= layout[i];
  s.local = layout[site];
  for (std::size_t i = site + 1; i < layout.size(); ++i) s.right *= layout[i];
  return s;
}

}  // namespace detail

/// I (x) ... (x) op (x) ... (x) I with op at position `site` of `layout`.
inline HermitianOperator embed_local(const HermitianOperator& op, std::size_t site, const Layout& layout) {
  const auto s = detail::site_strides(site, layout);
  if (op.dim() != s.local) {
    throw DimensionError("embed_local: operator dimension " + std::to_string(op.dim()) +
                         " does not match subsystem dimension " + std::to_string(s.local));
  }
  layout_dimension(layout);
  ComplexMatrix out = tensor_product(identity(s.left), op.matrix());
  out = tensor_product(out, identity(s.right));
  return HermitianOperator(std::move(out));
}

/// Applies a local (site) operator to every column of `m` without forming the
/// full-space operator. `m` must have layout_dimension(layout) rows.
inline ComplexMatrix apply_local(const ComplexMatrix& op, std::size_t site, const Layout& layout,
                                 const ComplexMatrix& m) {
  const auto s = detail::site_strides(site, layout);
  if (static_cast<std::size_t>(op.rows()) != s.local || op.rows() != op.cols()) {
    throw DimensionError("apply_local: operator does not match the subsystem dimension");
  }
  if (static_cast<std::size_t>(m.rows()) != s.left * s.local * s.right) {
    throw DimensionError("apply_local: operand does not match the layout");
  }
  const auto local = static_cast<Eigen::Index>(s.local);
  const auto right = static_cast<Eigen::Index>(s.right);
  ComplexMatrix out = ComplexMatrix::Zero(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (std::size_t l = 0; l < s.left; ++l) {
      const Eigen::Index base = static_cast<Eigen::Index>(l) * local * right;
      for (Eigen::Index b = 0; b < local; ++b) {
        for (Eigen::Index a = 0; a < local; ++a) {
          const cplx w = op(b, a);
          if (w == cplx(0.0, 0.0)) continue;
          out.col(c).segment(base + b * right, right) += w * m.col(c).segment(base + a * right, right);
        }
      }
    }
  }
  return out;
}

inline ComplexVector apply_local(const ComplexMatrix& op, std::size_t site, const Layout& layout,
                                 const ComplexVector& v) {
  return apply_local(op, site, layout, ComplexMatrix(v)).col(0);
}

namespace detail {

// Splits every full basis index into (kept index, discarded index).
struct TraceIndexMap {
  std::vector<std::size_t> keep;
  std::vector<std::size_t> discard;
  Layout kept_layout;
  std::size_t kept_dim = 1;
  std::size_t discarded_dim = 1;
};

inline TraceIndexMap trace_index_map(const Layout& layout, std::span<const std::size_t> discard) {
  std::vector<bool> drop(layout.size(), false);
  for (std::size_t d : discard) {
    if (d >= layout.size()) {
      throw DimensionError("partial_trace: subsystem " + std::to_string(d) + " out of range");
    }
    drop[d] = true;
  }
  TraceIndexMap map;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (drop[i]) {
      map.discarded_dim *= layout[i];
    } else {
      map.kept_layout.push_back(layout[i]);
      map.kept_dim *= layout[i];
    }
  }
  if (map.kept_layout.empty()) {
    throw DimensionError("partial_trace: tracing out every subsystem leaves a scalar trace");
  }
  const std::size_t dim = layout_dimension(layout);
  map.keep.resize(dim);
  map.discard.resize(dim);
  std::vector<std::size_t> digits(layout.size(), 0);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    std::size_t k = 0, r = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      if (drop[i]) {
        r = r * layout[i] + digits[i];
      } else {
        k = k * layout[i] + digits[i];
      }
    }
    map.keep[idx] = k;
    map.discard[idx] = r;
    for (std::size_t i = layout.size(); i-- > 0;) {
      if (++digits[i] < layout[i]) break;
      digits[i] = 0;
    }
  }
  return map;
}

}  // namespace detail

/// Traces out the subsystems listed in `discard`; kept subsystems stay in order.
inline DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> discard) {
  const auto map = detail::trace_index_map(rho.layout(), discard);
  const auto kd = static_cast<Eigen::Index>(map.kept_dim);
  ComplexMatrix out = ComplexMatrix::Zero(kd, kd);
  const ComplexMatrix& m = rho.matrix();
  const std::size_t dim = rho.dim();
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t r = 0; r < dim; ++r) {
      if (map.discard[r] != map.discard[c]) continue;
      out(static_cast<Eigen::Index>(map.keep[r]), static_cast<Eigen::Index>(map.keep[c])) +=
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return DensityOperator(DensityOperator::Unchecked{}, std::move(out), map.kept_layout);
}

/// Reduced state of a pure state: reshape to (kept x discarded) then A A^dagger.
inline DensityOperator partial_trace(const PureState& psi, std::span<const std::size_t> discard) {
  const auto map = detail::trace_index_map(psi.layout(), discard);
  ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(map.kept_dim),
                                        static_cast<Eigen::Index>(map.discarded_dim));
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    a(static_cast<Eigen::Index>(map.keep[i]), static_cast<Eigen::Index>(map.discard[i])) =
        psi.amplitudes()(static_cast<Eigen::Index>(i));
  }
  return DensityOperator(DensityOperator::Unchecked{}, a * a.adjoint(), map.kept_layout);
}

/// Indices of every subsystem except `site`.
inline std::vector<std::size_t> complement_of(std::size_t site, std::size_t num_sites) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < num_sites; ++i)
    if (i != site) out.push_back(i);
  return out;
}

/// Reduced state of a single subsystem.
template <typename State>
DensityOperator reduced_state(const State& state, std::size_t site) {
  if (site >= state.layout().size()) throw DimensionError("reduced_state: site out of range");
  if (state.layout().size() == 1) {
    if constexpr (std::is_same_v<State, PureState>) return DensityOperator::from_pure(state);
    else return state;
  }
  const auto others = complement_of(site, state.layout().size());
  return partial_trace(state, others);
}

/// Schmidt coefficients, descending, of a pure state across the cut between
/// the contiguous sites [first, first + count) and the rest.
inline RealVector schmidt_coefficients(const PureState& psi, std::size_t first, std::size_t count = 1) {
  if (count == 0 || first + count > psi.layout().size()) throw DimensionError("schmidt_coefficients: bad site range");
  detail::SiteStrides s = detail::site_strides(first, psi.layout());
  for (std::size_t i = first + 1; i < first + count; ++i) {
    s.local *= psi.layout()[i];
    s.right /= psi.layout()[i];
  }
  ComplexMatrix a(static_cast<Eigen::Index>(s.local), static_cast<Eigen::Index>(s.left * s.right));
  for (std::size_t l = 0; l < s.left; ++l)
    for (std::size_t k = 0; k < s.local; ++k)
      for (std::size_t r = 0; r < s.right; ++r)
        a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l * s.right + r)) =
            psi.amplitudes()(static_cast<Eigen::Index>((l * s.local + k) * s.right + r));
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues();
}

struct Eigh {
  RealVector values;     // ascending
  ComplexMatrix vectors; // orthonormal columns, vectors.col(i) pairs with values(i)
};

inline Eigh eigh(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(op.matrix());
  if (es.info() != Eigen::Success) throw Error("eigh: eigendecomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Eigh eigh(const DensityOperator& rho) { return eigh(HermitianOperator(rho.matrix())); }

/// exp(-i * angle * op), via the eigendecomposition of op.
inline ComplexMatrix expm_i(const HermitianOperator& op, double angle) {
  const Eigh e = eigh(op);
  ComplexVector phases(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) phases(i) = std::polar(1.0, -angle * e.values(i));
  return e.vectors * phases.asDiagonal() * e.vectors.adjoint();
}

}  // namespace qsn
