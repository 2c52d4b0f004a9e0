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

// Sensor-network data model: sensors, their generators and resource
// operators, the induced parameter partition, and the parameter encoding
// U(phi) = U_1(phi_[1]) (x) ... (x) U_s(phi_[s]) with
// U_k = exp(-i sum_{j in P_k} phi_j H_j).
//
// Parameters are indexed from 0 in this API, sensor by sensor in order.

#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qsn/hilbert.hpp"

namespace qsn {

/// Block sizes of a partition of the parameter vector, in parameter order.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    for (std::size_t s : sizes_)
      if (s == 0) throw DimensionError("partition blocks must be non-empty");
  }

  /// A single block holding all d parameters.
  static Partition whole(std::size_t d) { return d == 0 ? Partition() : Partition({d}); }

  std::size_t num_blocks() const { return sizes_.size(); }
  std::size_t total() const { return std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0}); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

  std::size_t size(std::size_t block) const { return sizes_.at(check(block)); }
  std::size_t offset(std::size_t block) const {
    check(block);
    return std::accumulate(sizes_.begin(), sizes_.begin() + static_cast<std::ptrdiff_t>(block), std::size_t{0});
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::size_t check(std::size_t block) const {
    if (block >= sizes_.size()) {
      throw DimensionError("partition block " + std::to_string(block) + " out of range");
    }
    return block;
  }
  std::vector<std::size_t> sizes_;
};

/// One sensor: its local dimension, the generators of the parameters encoded
/// into it, and its resource-counting operator. A sensor with no generators
/// is an ancilla.
class SensorSpec {
 public:
  SensorSpec(std::size_t local_dim, std::vector<HermitianOperator> generators, HermitianOperator resource)
      : local_dim_(local_dim), generators_(std::move(generators)), resource_(std::move(resource)) {
    if (local_dim_ == 0) throw DimensionError("sensor dimension must be positive");
    for (std::size_t j = 0; j < generators_.size(); ++j) {
      if (generators_[j].dim() != local_dim_) {
        throw DimensionError("generator " + std::to_string(j) + " has dimension " +
                             std::to_string(generators_[j].dim()) + ", sensor dimension is " +
                             std::to_string(local_dim_));
      }
    }
    if (resource_.dim() != local_dim_) {
      throw DimensionError("resource operator dimension does not match the sensor dimension");
    }
  }

  /// Ancilla copy: same dimension and resource operator, no parameters.
  static SensorSpec ancilla_of(const SensorSpec& sensor) {
    return SensorSpec(sensor.local_dim_, {}, sensor.resource_);
  }

  std::size_t local_dim() const { return local_dim_; }
  const std::vector<HermitianOperator>& generators() const { return generators_; }
  const HermitianOperator& resource() const { return resource_; }
  std::size_t num_parameters() const { return generators_.size(); }
  bool is_ancilla() const { return generators_.empty(); }

 private:
  std::size_t local_dim_;
  std::vector<HermitianOperator> generators_;
  HermitianOperator resource_;
};

class SensorNetwork {
 public:
  explicit SensorNetwork(std::vector<SensorSpec> sensors) : sensors_(std::move(sensors)) {
    if (sensors_.empty()) throw DimensionError("network has no sensors");
    for (std::size_t k = 0; k < sensors_.size(); ++k) {
      for (std::size_t j = 0; j < sensors_[k].num_parameters(); ++j) owner_.push_back({k, j});
    }
    if (owner_.empty()) throw DimensionError("network encodes no parameters");
    layout_dimension(layout());
  }

  std::size_t num_sensors() const { return sensors_.size(); }
  const SensorSpec& sensor(std::size_t k) const {
    if (k >= sensors_.size()) throw DimensionError("sensor index " + std::to_string(k) + " out of range");
    return sensors_[k];
  }
  const std::vector<SensorSpec>& sensors() const { return sensors_; }
  std::size_t num_parameters() const { return owner_.size(); }

  Layout layout() const {
    Layout l;
    for (const auto& s : sensors_) l.push_back(s.local_dim());
    return l;
  }
  std::size_t total_dim() const { return layout_dimension(layout()); }

  /// Parameter blocks of sensors that carry parameters (ancillas are skipped).
  Partition partition() const {
    std::vector<std::size_t> sizes;
    for (const auto& s : sensors_)
      if (!s.is_ancilla()) sizes.push_back(s.num_parameters());
    return Partition(std::move(sizes));
  }

  /// Sensor holding parameter k, and k's position among that sensor's generators.
  std::pair<std::size_t, std::size_t> owner(std::size_t k) const {
    if (k >= owner_.size()) {
      throw DimensionError("parameter index " + std::to_string(k) + " out of range (d = " +
                           std::to_string(owner_.size()) + ")");
    }
    return owner_[k];
  }

  const HermitianOperator& local_generator(std::size_t k) const {
    const auto [sensor, j] = owner(k);
    return sensors_[sensor].generators()[j];
  }

 private:
  std::vector<SensorSpec> sensors_;
  std::vector<std::pair<std::size_t, std::size_t>> owner_;
};

class ParameterPoint {
 public:
  explicit ParameterPoint(RealVector values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw PreconditionError("parameter point has non-finite entries");
  }
  static ParameterPoint zero(std::size_t d) { return ParameterPoint(RealVector::Zero(static_cast<Eigen::Index>(d))); }
  const RealVector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

 private:
  RealVector values_;
};

/// Diagonal, non-negative weighting matrix W.
class WeightMatrix {
 public:
  explicit WeightMatrix(RealVector diagonal) : diagonal_(std::move(diagonal)) {
    if (diagonal_.size() == 0) throw PreconditionError("weight matrix is empty");
    if (!diagonal_.allFinite()) throw PreconditionError("weight matrix has non-finite entries");
    if (diagonal_.minCoeff() < 0.0) throw PreconditionError("weight matrix has negative entries");
    if (diagonal_.maxCoeff() <= 0.0) throw PreconditionError("weight matrix is all zero");
  }

  static WeightMatrix identity(std::size_t d) { return WeightMatrix(RealVector::Ones(static_cast<Eigen::Index>(d))); }

  /// Only diagonal matrices are accepted; the figure of merit is defined for diagonal W.
  static WeightMatrix from_matrix(const RealMatrix& w) {
    if (w.rows() != w.cols()) throw PreconditionError("weight matrix must be square");
    RealMatrix off = w;
    off.diagonal().setZero();
    if (off.size() > 0 && off.cwiseAbs().maxCoeff() > 0.0) {
      throw PreconditionError("weight matrix must be diagonal; general PSD weights are not supported");
    }
    return WeightMatrix(w.diagonal());
  }

  const RealVector& diagonal() const { return diagonal_; }
  std::size_t size() const { return static_cast<std::size_t>(diagonal_.size()); }

 private:
  RealVector diagonal_;
};

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

enum class Regime { kCommuting, kNonCommuting };

inline const char* to_string(Regime r) { return r == Regime::kCommuting ? "commuting" : "non_commuting"; }

struct SensorDiagnostics {
  RealMatrix commutators;        // max-abs of [H_i, H_j] for this sensor's generators
  bool generators_commute = true;
  double resource_commutator = 0.0;  // max over j of |[R, H_j]|
  bool resource_conserved = true;
};

struct NetworkDiagnostics {
  std::vector<SensorDiagnostics> sensors;
  bool all_commuting = true;
  bool resources_conserved = true;
  Regime regime = Regime::kCommuting;
};

inline constexpr double kCommutationTol = 1e-9;

/// Per-sensor commutation table; generators on different sensors commute by
/// construction, so only same-sensor pairs are examined.
inline NetworkDiagnostics validate(const SensorNetwork& network) {
  NetworkDiagnostics out;
  for (const auto& sensor : network.sensors()) {
    SensorDiagnostics sd;
    const auto& gens = sensor.generators();
    const auto n = static_cast<Eigen::Index>(gens.size());
    sd.commutators = RealMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double c = commutator_norm(gens[static_cast<std::size_t>(i)].matrix(), gens[static_cast<std::size_t>(j)].matrix());
        sd.commutators(i, j) = sd.commutators(j, i) = c;
        if (c > kCommutationTol) sd.generators_commute = false;
      }
      sd.resource_commutator = std::max(sd.resource_commutator,
          commutator_norm(sensor.resource().matrix(), gens[static_cast<std::size_t>(i)].matrix()));
    }
    sd.resource_conserved = sd.resource_commutator <= kCommutationTol;
    out.all_commuting = out.all_commuting && sd.generators_commute;
    out.resources_conserved = out.resources_conserved && sd.resource_conserved;
    out.sensors.push_back(std::move(sd));
  }
  out.regime = out.all_commuting ? Regime::kCommuting : Regime::kNonCommuting;
  return out;
}

// ---------------------------------------------------------------------------
// Generators, encoding, resources
// ---------------------------------------------------------------------------

/// Generator of parameter k on the full network space.
inline HermitianOperator global_generator(const SensorNetwork& network, std::size_t k) {
  const auto [sensor, j] = network.owner(k);
  return embed_local(network.sensor(sensor).generators()[j], sensor, network.layout());
}

inline std::vector<HermitianOperator> global_generators(const SensorNetwork& network) {
  std::vector<HermitianOperator> out;
  for (std::size_t k = 0; k < network.num_parameters(); ++k) out.push_back(global_generator(network, k));
  return out;
}

/// U_k(phi_[k]) for every sensor; ancillas get the identity.
inline std::vector<ComplexMatrix> local_unitaries(const SensorNetwork& network, const ParameterPoint& phi) {
  if (phi.size() != network.num_parameters()) {
    throw DimensionError("parameter point has " + std::to_string(phi.size()) + " entries, network has " +
                         std::to_string(network.num_parameters()) + " parameters");
  }
  std::vector<ComplexMatrix> out;
  std::size_t k = 0;
  for (const auto& sensor : network.sensors()) {
    ComplexMatrix exponent = ComplexMatrix::Zero(static_cast<Eigen::Index>(sensor.local_dim()),
                                                 static_cast<Eigen::Index>(sensor.local_dim()));
    for (const auto& g : sensor.generators()) exponent += phi.values()(static_cast<Eigen::Index>(k++)) * g.matrix();
    out.push_back(expm_i(HermitianOperator(exponent), 1.0));
  }
  return out;
}

namespace detail {

inline void check_layout(const SensorNetwork& network, const Layout& layout) {
  if (layout != network.layout()) throw DimensionError("state layout does not match the network");
}

}  // namespace detail

inline PureState encode(const SensorNetwork& network, const PureState& psi, const ParameterPoint& phi) {
  detail::check_layout(network, psi.layout());
  const auto us = local_unitaries(network, phi);
  ComplexVector v = psi.amplitudes();
  for (std::size_t s = 0; s < us.size(); ++s) v = apply_local(us[s], s, psi.layout(), v);
  return PureState::normalized(std::move(v), psi.layout());
}

inline DensityOperator encode(const SensorNetwork& network, const DensityOperator& rho, const ParameterPoint& phi) {
  detail::check_layout(network, rho.layout());
  const auto us = local_unitaries(network, phi);
  ComplexMatrix m = rho.matrix();
  for (std::size_t s = 0; s < us.size(); ++s) {
    m = apply_local(us[s], s, rho.layout(), m);                       // U rho
    m = apply_local(us[s], s, rho.layout(), ComplexMatrix(m.adjoint())).adjoint();  // (U (U rho)^dagger)^dagger
  }
  return DensityOperator::normalized(std::move(m), rho.layout());
}

/// Tr[(R_1 + ... + R_s) psi]. For a network built by with_local_ancillas or
/// with_global_ancilla the ancilla resource operators are counted as well.
inline double resource_count(const SensorNetwork& network, const PureState& psi) {
  detail::check_layout(network, psi.layout());
  double total = 0.0;
  for (std::size_t s = 0; s < network.num_sensors(); ++s) {
    const ComplexVector r = apply_local(network.sensor(s).resource().matrix(), s, psi.layout(), psi.amplitudes());
    total += psi.amplitudes().dot(r).real();
  }
  return total;
}

inline double resource_count(const SensorNetwork& network, const DensityOperator& rho) {
  detail::check_layout(network, rho.layout());
  double total = 0.0;
  for (std::size_t s = 0; s < network.num_sensors(); ++s) {
    const DensityOperator local = reduced_state(rho, s);
    total += (network.sensor(s).resource().matrix() * local.matrix()).trace().real();
  }
  return total;
}

/// Sensors interleaved with ancilla copies: [s1, a1, s2, a2, ...].
inline SensorNetwork with_local_ancillas(const SensorNetwork& network) {
  std::vector<SensorSpec> out;
  for (const auto& s : network.sensors()) {
    out.push_back(s);
    out.push_back(SensorSpec::ancilla_of(s));
  }
  return SensorNetwork(std::move(out));
}

/// All sensors followed by one ancilla copy of each: [s1, ..., ss, a1, ..., as].
inline SensorNetwork with_global_ancilla(const SensorNetwork& network) {
  std::vector<SensorSpec> out = network.sensors();
  for (const auto& s : network.sensors()) out.push_back(SensorSpec::ancilla_of(s));
  return SensorNetwork(std::move(out));
}

}  // namespace qsn
