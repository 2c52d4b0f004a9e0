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

// Closed-form variance bounds for a linear function theta = v^T phi of the
// network parameters, N particles spread over d sensors whose generators have
// spectral width kappa * n for n particles, and mu repeats.

#pragma once

#include <cmath>
#include <string>

#include "qsn/hilbert.hpp"

namespace qsn {

class LinearFunctional {
 public:
  LinearFunctional(RealVector v, double kappa, std::size_t particles, std::size_t repeats)
      : v_(std::move(v)), kappa_(kappa), particles_(particles), repeats_(repeats) {
    if (v_.size() == 0) throw PreconditionError("linear functional: empty coefficient vector");
    if (!v_.allFinite()) throw PreconditionError("linear functional: non-finite coefficients");
    if (v_.minCoeff() < 0.0) throw PreconditionError("linear functional: coefficients must be non-negative");
    if (std::abs(v_.norm() - 1.0) > 1e-9) {
      throw PreconditionError("linear functional: coefficients must have unit 2-norm (has " + std::to_string(v_.norm()) + ")");
    }
    if (!(kappa_ > 0.0) || !std::isfinite(kappa_)) throw PreconditionError("linear functional: kappa must be positive");
    if (particles_ == 0) throw PreconditionError("linear functional: N must be positive");
    if (repeats_ == 0) throw PreconditionError("linear functional: mu must be positive");
  }

  /// Uniform coefficients (1, ..., 1)/sqrt(d).
  static LinearFunctional uniform(std::size_t d, double kappa, std::size_t particles, std::size_t repeats) {
    return LinearFunctional(RealVector::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(static_cast<double>(d))),
                            kappa, particles, repeats);
  }

  const RealVector& v() const { return v_; }
  double kappa() const { return kappa_; }
  std::size_t particles() const { return particles_; }
  std::size_t repeats() const { return repeats_; }
  std::size_t dimension() const { return static_cast<std::size_t>(v_.size()); }

 private:
  RealVector v_;
  double kappa_;
  std::size_t particles_;
  std::size_t repeats_;
};

/// ||v||_p = (sum_k |v_k|^p)^(1/p) for any p > 0. Entries are scaled by the
/// largest magnitude first so tiny or huge vectors neither underflow nor overflow.
inline double pnorm(const RealVector& v, double p) {
  if (v.size() == 0) throw PreconditionError("pnorm: empty vector");
  if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError("pnorm: p must be positive");
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  const double top = v.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double a = std::abs(v(k)) / top;
    if (a > 0.0) sum += std::pow(a, p);
  }
  return top * std::pow(sum, 1.0 / p);
}

namespace detail {
inline double heisenberg_scale(const LinearFunctional& f) {
  const double n = static_cast<double>(f.particles());
  return static_cast<double>(f.repeats()) * f.kappa() * f.kappa() * n * n;
}
}  // namespace detail

/// ||v||_{2/3}^2 / (mu kappa^2 N^2): best sensor-separable variance with a
/// real-valued particle allocation.
inline double separable_bound(const LinearFunctional& f) {
  const double q = pnorm(f.v(), 2.0 / 3.0);
  return q * q / detail::heisenberg_scale(f);
}

/// ||v||_1^3 / (mu kappa^2 N^2); never exceeds separable_bound.
inline double separable_bound_weak(const LinearFunctional& f) {
  const double l1 = pnorm(f.v(), 1.0);
  return l1 * l1 * l1 / detail::heisenberg_scale(f);
}

struct GhzBound {
  double value = 0.0;
  bool certified = true;  // N v_k / ||v||_1 integral, so ghz_probe can build the state
};

/// ||v||_1^2 / (mu kappa^2 N^2), the saturable bound of the GHZ-like probe.
inline GhzBound ghz_bound(const LinearFunctional& f) {
  const double l1 = pnorm(f.v(), 1.0);
  GhzBound out{l1 * l1 / detail::heisenberg_scale(f), true};
  const double n = static_cast<double>(f.particles());
  for (Eigen::Index k = 0; k < f.v().size(); ++k) {
    const double scaled = n * f.v()(k) / l1;
    if (std::abs(scaled - std::round(scaled)) > 1e-9 * std::max(1.0, n)) out.certified = false;
  }
  return out;
}

/// separable_bound / ghz_bound = ||v||_{2/3}^2 / ||v||_1^2, in [1, d].
inline double enhancement_ratio(const LinearFunctional& f) {
  const double q = pnorm(f.v(), 2.0 / 3.0);
  const double l1 = pnorm(f.v(), 1.0);
  return q * q / (l1 * l1);
}

struct BoundComparison {
  std::size_t d = 0;
  std::size_t particles = 0;
  double kappa = 1.0;
  std::size_t repeats = 1;
  double separable_bound = 0.0;
  double ghz_bound = 0.0;
  double ratio = 1.0;
  bool ghz_certified = true;
};

inline BoundComparison compare_bounds(const LinearFunctional& f) {
  const GhzBound g = ghz_bound(f);
  const double sep = separable_bound(f);
  return {f.dimension(), f.particles(), f.kappa(), f.repeats(), sep, g.value, sep / g.value, g.certified};
}

}  // namespace qsn
