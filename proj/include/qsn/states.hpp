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

// Probe-state constructors: separable surrogates for commuting generators,
// purifications and sensor-local purifications, extremal superpositions,
// GHZ-like network probes and integer-optimal separable allocations.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qsn/hilbert.hpp"
#include "qsn/network.hpp"
#include "qsn/operators.hpp"
#include "qsn/random.hpp"

namespace qsn {

/// Simultaneous eigenbasis of one sensor's commuting generators.
/// labels(i, j) is the eigenvalue of generator j on basis vector i.
struct JointEigenbasis {
  std::size_t sensor = 0;
  ComplexMatrix vectors;
  RealMatrix labels;
  bool includes_resource = false;  // the resource operator is diagonal in `vectors` too
};

namespace detail {

inline constexpr std::uint64_t kJointBasisSeed = 0x6a6f696e74ULL;
inline constexpr double kDegeneracyTol = 1e-8;

struct ColumnRange {
  Eigen::Index begin;
  Eigen::Index size;
};

// Splits [begin, begin + n) into runs of eigenvalues closer than tol.
inline std::vector<ColumnRange> split_clusters(const RealVector& values, Eigen::Index begin, double tol) {
  std::vector<ColumnRange> out;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= values.size(); ++i) {
    if (i == values.size() || values(i) - values(i - 1) > tol) {
      out.push_back({begin + start, i - start});
      start = i;
    }
  }
  return out;
}

}  // namespace detail

/// Diagonalises a random real combination of the operators, then refines each
/// degenerate cluster against every operator in turn. The resource operator
/// joins the set when it commutes with all generators, so the surrogate built
/// from this basis reproduces resource statistics exactly.
inline JointEigenbasis joint_eigenbasis(const SensorSpec& sensor, std::size_t sensor_index = 0) {
  const auto& gens = sensor.generators();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      const double c = commutator_norm(gens[i].matrix(), gens[j].matrix());
      if (c > kCommutationTol) {
        throw RegimeError("sensor " + std::to_string(sensor_index) + ": generators " + std::to_string(i) + " and " +
                          std::to_string(j) + " do not commute (|[H_i,H_j]| = " + std::to_string(c) +
                          "); use the local-purification construction for non-commuting generators");
      }
    }
  }

  std::vector<const ComplexMatrix*> ops;
  for (const auto& g : gens) ops.push_back(&g.matrix());
  bool with_resource = true;
  for (const auto& g : gens)
    if (commutator_norm(sensor.resource().matrix(), g.matrix()) > kCommutationTol) with_resource = false;
  if (with_resource) ops.push_back(&sensor.resource().matrix());

  const auto dim = static_cast<Eigen::Index>(sensor.local_dim());
  JointEigenbasis out;
  out.sensor = sensor_index;
  out.includes_resource = with_resource;
  out.vectors = ComplexMatrix::Identity(dim, dim);

  if (!ops.empty()) {
    Rng rng = trial_rng(detail::kJointBasisSeed, sensor.local_dim());
    ComplexMatrix combo = ComplexMatrix::Zero(dim, dim);
    for (const ComplexMatrix* op : ops) {
      const double scale = std::max(max_abs(*op), 1e-300);
      combo += uniform_real(rng, 0.5, 1.5) / scale * (*op);
    }
    const Eigh e = eigh(HermitianOperator(combo));
    out.vectors = e.vectors;
    std::vector<detail::ColumnRange> clusters =
        detail::split_clusters(e.values, 0, detail::kDegeneracyTol * std::max(1.0, e.values.cwiseAbs().maxCoeff()));

    for (const ComplexMatrix* op : ops) {
      const double tol = detail::kDegeneracyTol * std::max(1.0, max_abs(*op));
      std::vector<detail::ColumnRange> next;
      for (const auto& c : clusters) {
        if (c.size == 1) {
          next.push_back(c);
          continue;
        }
        auto block = out.vectors.middleCols(c.begin, c.size);
        const ComplexMatrix restricted = block.adjoint() * (*op) * block;
        const Eigh sub = eigh(HermitianOperator((restricted + restricted.adjoint()) * 0.5));
        const ComplexMatrix rotated = block * sub.vectors;
        block = rotated;
        for (const auto& part : detail::split_clusters(sub.values, c.begin, tol)) next.push_back(part);
      }
      clusters = std::move(next);
    }
  }

  out.labels = RealMatrix::Zero(dim, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t j = 0; j < gens.size(); ++j) {
    const ComplexMatrix d = out.vectors.adjoint() * gens[j].matrix() * out.vectors;
    out.labels.col(static_cast<Eigen::Index>(j)) = d.diagonal().real();
    const ComplexMatrix rebuilt =
        out.vectors * out.labels.col(static_cast<Eigen::Index>(j)).cast<cplx>().asDiagonal() * out.vectors.adjoint();
    const double residual = max_abs(rebuilt - gens[j].matrix());
    if (residual > 1e-9 * std::max(1.0, max_abs(gens[j].matrix()))) {
      throw RegimeError("joint_eigenbasis: generator " + std::to_string(j) + " of sensor " +
                        std::to_string(sensor_index) + " is not diagonalised (residual " + std::to_string(residual) + ")");
    }
  }
  return out;
}

/// Product state whose factor on sensor k has amplitude sqrt(<l|rho_k|l>) on
/// each joint eigenvector |l> of that sensor's generators, rho_k being the
/// reduced state of psi. Amplitudes in the eigenbasis are real and non-negative.
inline PureState separable_surrogate(const PureState& psi, const SensorNetwork& network) {
  if (psi.layout() != network.layout()) throw DimensionError("separable_surrogate: state layout does not match the network");
  ComplexVector product = ComplexVector::Ones(1);
  for (std::size_t k = 0; k < network.num_sensors(); ++k) {
    const JointEigenbasis basis = joint_eigenbasis(network.sensor(k), k);
    const DensityOperator rho_k = reduced_state(psi, k);
    const ComplexMatrix in_basis = basis.vectors.adjoint() * rho_k.matrix() * basis.vectors;
    RealVector amps(in_basis.rows());
    for (Eigen::Index i = 0; i < amps.size(); ++i) amps(i) = std::sqrt(std::max(0.0, in_basis(i, i).real()));
    amps /= amps.norm();
    const ComplexVector local = basis.vectors * amps.cast<cplx>();
    product = tensor_product(ComplexMatrix(product), ComplexMatrix(local)).col(0);
  }
  return PureState::normalized(std::move(product), network.layout());
}

/// sum_i sqrt(p_i) |v_i> (x) |v_i> over the eigendecomposition of rho. The
/// ancilla copy follows the system on the layout (layout doubles), and both
/// marginals equal rho.
inline PureState purify(const DensityOperator& rho) {
  const Eigh e = eigh(rho);
  RealVector root(e.values.size());
  for (Eigen::Index i = 0; i < root.size(); ++i) root(i) = std::sqrt(std::max(0.0, e.values(i)));
  const ComplexMatrix a = e.vectors * root.cast<cplx>().asDiagonal() * e.vectors.transpose();
  const auto dim = static_cast<Eigen::Index>(rho.dim());
  Layout layout = rho.layout();
  layout.insert(layout.end(), rho.layout().begin(), rho.layout().end());
  layout_dimension(layout);
  ComplexVector v(dim * dim);
  for (Eigen::Index s = 0; s < dim; ++s)
    for (Eigen::Index t = 0; t < dim; ++t) v(s * dim + t) = a(s, t);
  return PureState::normalized(std::move(v), std::move(layout));
}

/// Product over sensors of purifications of each single-sensor marginal. The
/// result lives on [d1, d1, d2, d2, ...], i.e. on with_local_ancillas(network).
template <typename State>
PureState local_purification_probe(const State& state, const SensorNetwork& network) {
  if (state.layout() != network.layout()) {
    throw DimensionError("local_purification_probe: state layout does not match the network");
  }
  ComplexVector product = ComplexVector::Ones(1);
  Layout layout;
  for (std::size_t k = 0; k < network.num_sensors(); ++k) {
    const PureState pk = purify(reduced_state(state, k));
    product = tensor_product(ComplexMatrix(product), ComplexMatrix(pk.amplitudes())).col(0);
    layout.insert(layout.end(), pk.layout().begin(), pk.layout().end());
  }
  return PureState::normalized(std::move(product), std::move(layout));
}

// ---------------------------------------------------------------------------
// Particle-number families and global-function probes
// ---------------------------------------------------------------------------

/// A sensor type parameterised by its particle number n, with one generator
/// whose spectral width is kappa * n.
struct SensorFamily {
  std::string name;
  double kappa = 1.0;
  std::function<SensorSpec(std::size_t)> make;
};

inline constexpr std::size_t kFullQubitSpaceLimit = 8;

/// n qubits with generator J_z and atom-count resource n * I. Up to eight
/// qubits the full 2^n space is used, beyond that the symmetric sector.
inline SensorFamily qubit_ensemble_family() {
  return {"qubit_ensemble", 1.0, [](std::size_t n) {
            if (n == 0) return SensorSpec(1, {ops::zero(1)}, ops::zero(1));
            const HermitianOperator jz = n <= kFullQubitSpaceLimit ? ops::jz_full(n) : ops::jz_collective(n);
            return SensorSpec(jz.dim(), {jz}, HermitianOperator(identity(jz.dim()) * static_cast<double>(n)));
          }};
}

/// n qubits always represented in the (n+1)-dimensional symmetric sector.
inline SensorFamily collective_spin_family() {
  return {"collective_spin", 1.0, [](std::size_t n) {
            const HermitianOperator jz = ops::jz_collective(n);
            return SensorSpec(jz.dim(), {jz}, HermitianOperator(identity(jz.dim()) * static_cast<double>(n)));
          }};
}

/// An optical mode holding at most n photons; generator and resource are n-hat.
inline SensorFamily optical_mode_family() {
  return {"optical_mode", 1.0, [](std::size_t n) {
            const HermitianOperator num = ops::number_operator(n);
            return SensorSpec(num.dim(), {num}, num);
          }};
}

struct ExtremalPair {
  ComplexVector min_vector;
  ComplexVector max_vector;
  double min_value = 0.0;
  double max_value = 0.0;
};

/// Extremal eigenvectors of a single-generator sensor. Ties in a degenerate
/// extremal eigenspace go to the lowest-index eigenvector in eigh order.
inline ExtremalPair extremal_eigenvectors(const SensorSpec& sensor) {
  if (sensor.num_parameters() != 1) {
    throw PreconditionError("extremal eigenvectors need a sensor with exactly one generator (has " +
                            std::to_string(sensor.num_parameters()) + ")");
  }
  const Eigh e = eigh(sensor.generators()[0]);
  const Eigen::Index last = e.values.size() - 1;
  const double tie = detail::kDegeneracyTol * std::max(1.0, e.values.cwiseAbs().maxCoeff());
  Eigen::Index top = last;
  for (Eigen::Index i = 0; i <= last; ++i) {
    if (e.values(i) >= e.values(last) - tie) {
      top = i;
      break;
    }
  }
  return {e.vectors.col(0), e.vectors.col(top), e.values(0), e.values(last)};
}

inline double spectral_width(const SensorSpec& sensor) {
  const ExtremalPair p = extremal_eigenvectors(sensor);
  return p.max_value - p.min_value;
}

/// (|lambda_min> + |lambda_max>)/sqrt(2) for the sensor's generator.
inline PureState extremal_superposition(const SensorSpec& sensor) {
  if (sensor.local_dim() == 1) return PureState::basis(1, 0);
  const ExtremalPair p = extremal_eigenvectors(sensor);
  return PureState::normalized(p.min_vector + p.max_vector, Layout{sensor.local_dim()});
}

inline PureState extremal_superposition(const SensorFamily& family, std::size_t n) {
  return extremal_superposition(family.make(n));
}

class AllocationVector {
 public:
  AllocationVector() = default;
  explicit AllocationVector(std::vector<std::size_t> w) : w_(std::move(w)) {}
  const std::vector<std::size_t>& counts() const { return w_; }
  std::size_t operator[](std::size_t k) const { return w_.at(k); }
  std::size_t size() const { return w_.size(); }
  std::size_t total() const {
    std::size_t t = 0;
    for (std::size_t x : w_) t += x;
    return t;
  }
  friend bool operator==(const AllocationVector&, const AllocationVector&) = default;

 private:
  std::vector<std::size_t> w_;
};

/// A probe together with the network it was built for.
struct NetworkProbe {
  SensorNetwork network;
  PureState state;
  AllocationVector allocation;
};

namespace detail {

inline double l1_norm(const RealVector& v) { return v.cwiseAbs().sum(); }

inline void check_unit(const RealVector& v, const char* what) {
  if (v.size() == 0) throw PreconditionError(std::string(what) + ": empty coefficient vector");
  if (!v.allFinite()) throw PreconditionError(std::string(what) + ": non-finite coefficients");
  if (std::abs(v.norm() - 1.0) > 1e-9) {
    throw PreconditionError(std::string(what) + ": coefficient vector must have unit 2-norm (has " +
                            std::to_string(v.norm()) + ")");
  }
}

inline ComplexVector kron_all(const std::vector<ComplexVector>& parts) {
  ComplexVector out = ComplexVector::Ones(1);
  for (const auto& p : parts) out = tensor_product(ComplexMatrix(out), ComplexMatrix(p)).col(0);
  return out;
}

}  // namespace detail

/// Sensor-entangled GHZ-like probe for theta = v^T phi: sensor k holds
/// N |v_k| / ||v||_1 particles and the state is the equal superposition of
/// "every sensor extremal-up" and "every sensor extremal-down". A negative v_k
/// swaps the roles of that sensor's extremal eigenvectors.
inline NetworkProbe ghz_probe(const RealVector& v, std::size_t particles, const SensorFamily& family) {
  detail::check_unit(v, "ghz_probe");
  const double l1 = detail::l1_norm(v);
  std::vector<std::size_t> counts;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double scaled = static_cast<double>(particles) * std::abs(v(k)) / l1;
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-9 * std::max(1.0, static_cast<double>(particles))) {
      throw PreconditionError("ghz_probe: N |v_k| / ||v||_1 = " + std::to_string(scaled) +
                              " is not an integer for k = " + std::to_string(k));
    }
    counts.push_back(static_cast<std::size_t>(rounded));
  }
  std::vector<SensorSpec> sensors;
  std::vector<ComplexVector> up, down;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    SensorSpec s = family.make(counts[static_cast<std::size_t>(k)]);
    if (s.local_dim() == 1) {
      up.push_back(ComplexVector::Ones(1));
      down.push_back(ComplexVector::Ones(1));
    } else {
      const ExtremalPair p = extremal_eigenvectors(s);
      up.push_back(v(k) >= 0.0 ? p.max_vector : p.min_vector);
      down.push_back(v(k) >= 0.0 ? p.min_vector : p.max_vector);
    }
    sensors.push_back(std::move(s));
  }
  SensorNetwork network(std::move(sensors));
  PureState state = PureState::normalized(detail::kron_all(up) + detail::kron_all(down), network.layout());
  return {std::move(network), std::move(state), AllocationVector(std::move(counts))};
}

/// Objective sum_k v_k^2 / (kappa w_k)^2, i.e. the variance bound (times mu)
/// for theta = v^T phi with extremal superpositions of w_k particles per sensor.
inline double separable_allocation_objective(const RealVector& v, const std::vector<std::size_t>& w, double kappa) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double vk = v(k);
    if (vk == 0.0) continue;
    const double wk = static_cast<double>(w[static_cast<std::size_t>(k)]);
    if (wk == 0.0) return std::numeric_limits<double>::infinity();
    total += vk * vk / (kappa * kappa * wk * wk);
  }
  return total;
}

struct SeparableProbe {
  NetworkProbe probe;
  double objective = 0.0;   // mu * Var(Theta) bound for the chosen allocation
  bool exhaustive = true;   // false when the greedy/local-swap search was used
};

inline constexpr double kExhaustiveCompositionLimit = 1e6;

namespace detail {

inline double composition_count(std::size_t n, std::size_t d) {
  // C(n + d - 1, d - 1)
  double c = 1.0;
  for (std::size_t i = 1; i < d; ++i) c = c * static_cast<double>(n + i) / static_cast<double>(i);
  return c;
}

inline void enumerate_compositions(std::size_t remaining, std::size_t k, std::vector<std::size_t>& w,
                                   const std::function<void(const std::vector<std::size_t>&)>& visit) {
  if (k + 1 == w.size()) {
    w[k] = remaining;
    visit(w);
    return;
  }
  for (std::size_t x = 0; x <= remaining; ++x) {
    w[k] = x;
    enumerate_compositions(remaining - x, k + 1, w, visit);
  }
}

inline std::vector<std::size_t> greedy_allocation(const RealVector& v, std::size_t particles, double kappa) {
  const std::size_t d = static_cast<std::size_t>(v.size());
  std::vector<std::size_t> w(d, 0);
  auto term = [&](std::size_t k, std::size_t n) {
    if (v(static_cast<Eigen::Index>(k)) == 0.0) return 0.0;
    if (n == 0) return std::numeric_limits<double>::infinity();
    const double vk = v(static_cast<Eigen::Index>(k));
    return vk * vk / (kappa * kappa * static_cast<double>(n) * static_cast<double>(n));
  };
  for (std::size_t p = 0; p < particles; ++p) {
    std::size_t best = 0;
    double gain = -1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double before = term(k, w[k]);
      const double g = std::isinf(before) ? std::numeric_limits<double>::max() : before - term(k, w[k] + 1);
      if (g > gain) {
        gain = g;
        best = k;
      }
    }
    ++w[best];
  }
  // Single-particle moves until no move improves the objective.
  double current = separable_allocation_objective(v, w, kappa);
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t i = 0; i < d && !improved; ++i) {
      if (w[i] == 0) continue;
      for (std::size_t j = 0; j < d && !improved; ++j) {
        if (i == j) continue;
        --w[i];
        ++w[j];
        const double trial = separable_allocation_objective(v, w, kappa);
        if (trial < current * (1.0 - 1e-14)) {
          current = trial;
          improved = true;
        } else {
          ++w[i];
          --w[j];
        }
      }
    }
  }
  return w;
}

}  // namespace detail

/// Best product of extremal superpositions for theta = v^T phi with N
/// particles in total. Exhaustive over compositions of N when there are at
/// most 1e6 of them (first minimum in lexicographic order wins); otherwise
/// greedy assignment followed by single-particle moves.
inline SeparableProbe optimal_separable_probe(const RealVector& v, std::size_t particles, const SensorFamily& family) {
  detail::check_unit(v, "optimal_separable_probe");
  const RealVector mag = v.cwiseAbs();
  const std::size_t d = static_cast<std::size_t>(v.size());
  std::vector<std::size_t> best;
  bool exhaustive = detail::composition_count(particles, d) <= kExhaustiveCompositionLimit;
  if (exhaustive) {
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> w(d, 0);
    detail::enumerate_compositions(particles, 0, w, [&](const std::vector<std::size_t>& c) {
      const double value = separable_allocation_objective(mag, c, family.kappa);
      if (best.empty() || value < best_value) {
        best_value = value;
        best = c;
      }
    });
  } else {
    best = detail::greedy_allocation(mag, particles, family.kappa);
  }

  std::vector<SensorSpec> sensors;
  std::vector<ComplexVector> factors;
  for (std::size_t k = 0; k < d; ++k) {
    SensorSpec s = family.make(best[k]);
    factors.push_back(extremal_superposition(s).amplitudes());
    sensors.push_back(std::move(s));
  }
  SensorNetwork network(std::move(sensors));
  PureState state = PureState::normalized(detail::kron_all(factors), network.layout());
  const double objective = separable_allocation_objective(mag, best, family.kappa);
  return {{std::move(network), std::move(state), AllocationVector(std::move(best))}, objective, exhaustive};
}

}  // namespace qsn
