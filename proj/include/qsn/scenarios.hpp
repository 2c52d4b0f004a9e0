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

// Randomised audits of the structural results and the two worked scenarios.
//
// Every audit trial draws from its own engine, trial_rng(seed, trial), so a
// trial is reproducible on its own. Draws that land on a singular QFIM are
// redrawn from the same engine; the number of draws is recorded per trial.
//
// Violations are signed: negative values mean slack. Relative quantities are
// divided by max(1, |reference|).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qsn/bounds.hpp"
#include "qsn/fisher.hpp"
#include "qsn/hilbert.hpp"
#include "qsn/network.hpp"
#include "qsn/operators.hpp"
#include "qsn/random.hpp"
#include "qsn/states.hpp"

namespace qsn {

struct ScenarioConfig {
  std::string id;
  std::uint64_t seed = 42;
  std::size_t trials = 200;
  std::size_t min_sensors = 2;
  std::size_t max_sensors = 4;
  std::size_t min_local_dim = 2;
  std::size_t max_local_dim = 4;
  std::size_t max_parameters = 12;
  std::size_t particles = 4;
  std::size_t modes = 2;
  std::size_t cutoff = 3;
  std::size_t repeats = 1;
  double tolerance = 1e-9;
  double product_tolerance = 1e-10;
  double equality_tolerance = 1e-10;

  /// Defaults for "t1", "t2", "prop1", "gradient" and "optical".
  static ScenarioConfig defaults(const std::string& id) {
    ScenarioConfig c;
    c.id = id;
    if (id == "t1") {
      c.seed = 42;
    } else if (id == "t2") {
      c.seed = 7;
      c.max_sensors = 3;
      c.max_local_dim = 3;
    } else if (id == "prop1") {
      c.seed = 3;
      c.trials = 1000;
    } else if (id == "gradient") {
      c.trials = 1;
    } else if (id == "optical") {
      c.seed = 11;
      c.trials = 20;
    } else {
      throw ConfigError("unknown scenario id '" + id + "'");
    }
    return c;
  }

  void validate() const {
    if (trials == 0) throw ConfigError("trials must be positive");
    if (min_sensors == 0 || min_sensors > max_sensors) throw ConfigError("sensor range must satisfy 1 <= min <= max");
    if (min_local_dim < 2 || min_local_dim > max_local_dim) throw ConfigError("local dimension range must satisfy 2 <= min <= max");
    if (max_parameters < 1) throw ConfigError("max_parameters must be positive");
    if (repeats == 0) throw ConfigError("repeats must be positive");
    if (!(tolerance >= 0.0) || !(product_tolerance >= 0.0) || !(equality_tolerance >= 0.0)) {
      throw ConfigError("tolerances must be non-negative");
    }
  }
};

/// One audited property: the largest signed violation seen and how many
/// evaluations exceeded the tolerance.
struct AuditCheck {
  std::string name;
  double tolerance = 0.0;
  double max_violation = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  std::size_t failures = 0;

  AuditCheck() = default;
  AuditCheck(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

  void record(double violation) {
    ++evaluations;
    // NaN counts as a failure and poisons the maximum.
    if (std::isnan(violation) || std::isnan(max_violation)) {
      max_violation = std::numeric_limits<double>::quiet_NaN();
      ++failures;
      return;
    }
    max_violation = std::max(max_violation, violation);
    if (violation > tolerance) ++failures;
  }
  void record_bool(bool ok) { record(ok ? 0.0 : 1.0); }
  bool pass() const { return failures == 0 && !std::isnan(max_violation); }
};

struct TrialRecord {
  std::size_t trial = 0;
  std::size_t draws = 1;
  std::string input_hash;
  std::vector<std::pair<std::string, double>> values;
};

struct AuditResult {
  std::string audit;
  std::uint64_t seed = 0;
  std::size_t trials_requested = 0;
  std::size_t trials_run = 0;
  std::size_t regenerated = 0;
  bool complete = true;  // false when the redraw budget ran out
  std::vector<AuditCheck> checks;
  std::vector<TrialRecord> records;

  bool pass() const {
    if (!complete) return false;
    return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.pass(); });
  }
  double max_violation() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& c : checks) {
      if (std::isnan(c.max_violation)) return c.max_violation;
      m = std::max(m, c.max_violation);
    }
    return m;
  }
  AuditCheck& check(const std::string& name) {
    for (auto& c : checks)
      if (c.name == name) return c;
    throw PreconditionError("no audit check named '" + name + "'");
  }
};

namespace detail {

/// 64-bit FNV-1a over the bytes of the values fed in.
class Fnv1a {
 public:
  void add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(double x) { add(&x, sizeof x); }
  void add(const ComplexMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        add(m(i, j).real());
        add(m(i, j).imag());
      }
  }
  void add(const RealVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) add(v(i));
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string hash_inputs(const SensorNetwork& net, const ComplexMatrix& state, const WeightMatrix& w) {
  Fnv1a h;
  for (const auto& s : net.sensors()) {
    for (const auto& g : s.generators()) h.add(g.matrix());
    h.add(s.resource().matrix());
  }
  h.add(state);
  h.add(w.diagonal());
  return h.hex();
}

inline double scaled_excess(double value, double reference) {
  if (std::isinf(value) && std::isinf(reference) && value == reference) return 0.0;
  return (value - reference) / std::max(1.0, std::abs(reference));
}

inline double max_block_difference(const Qfim& a, const Qfim& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.partition().num_blocks(); ++k) m = std::max(m, (block(a, k) - block(b, k)).cwiseAbs().maxCoeff());
  return m;
}

inline WeightMatrix random_weights(Rng& rng, std::size_t d) {
  RealVector w(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = uniform_real(rng, 0.0, 1.0);
  w(static_cast<Eigen::Index>(uniform_index(rng, 0, d - 1))) += 0.1;  // never all zero
  return WeightMatrix(std::move(w));
}

inline RealVector random_spectrum(Rng& rng, std::size_t dim, bool integer) {
  RealVector s(static_cast<Eigen::Index>(dim));
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = integer ? static_cast<double>(static_cast<long>(uniform_index(rng, 0, 2)) - 1) : n(rng);
  }
  return s;
}

inline HermitianOperator rotated(const ComplexMatrix& u, const RealVector& spectrum) {
  return HermitianOperator(u * spectrum.cast<cplx>().asDiagonal() * u.adjoint());
}

/// Sensors with commuting generators U diag(.) U^dagger and a resource that
/// shares the eigenbasis. Integer spectra in {-1, 0, 1} are drawn for about
/// a third of the sensors to exercise degenerate joint eigenspaces.
inline SensorNetwork random_commuting_network(Rng& rng, const ScenarioConfig& cfg) {
  const std::size_t s = uniform_index(rng, cfg.min_sensors, cfg.max_sensors);
  std::vector<SensorSpec> sensors;
  for (std::size_t k = 0; k < s; ++k) {
    const std::size_t q = uniform_index(rng, cfg.min_local_dim, cfg.max_local_dim);
    const ComplexMatrix u = haar_unitary(rng, q);
    const bool integer = uniform_index(rng, 0, 2) == 0;
    const std::size_t dk = uniform_index(rng, 1, q - 1);
    std::vector<HermitianOperator> gens;
    for (std::size_t j = 0; j < dk; ++j) gens.push_back(rotated(u, random_spectrum(rng, q, integer)));
    RealVector r(static_cast<Eigen::Index>(q));
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = integer ? static_cast<double>(uniform_index(rng, 0, 2)) : uniform_real(rng, 0.0, 2.0);
    sensors.emplace_back(q, std::move(gens), rotated(u, r));
  }
  return SensorNetwork(std::move(sensors));
}

/// Sensors whose generators are independent random Hermitians. Sensor 0 always
/// carries at least two of them, so the network is non-commuting. A sensor
/// with non-commuting generators counts resources with r * I; a sensor with a
/// single generator gets a resource diagonal in that generator's eigenbasis.
inline SensorNetwork random_noncommuting_network(Rng& rng, const ScenarioConfig& cfg) {
  const std::size_t s = uniform_index(rng, cfg.min_sensors, cfg.max_sensors);
  std::vector<SensorSpec> sensors;
  for (std::size_t k = 0; k < s; ++k) {
    const std::size_t q = uniform_index(rng, cfg.min_local_dim, cfg.max_local_dim);
    const std::size_t most = std::min<std::size_t>(3, q * q - 1);
    const std::size_t dk = uniform_index(rng, k == 0 ? 2 : 1, most);
    std::vector<HermitianOperator> gens;
    for (std::size_t j = 0; j < dk; ++j) gens.push_back(random_hermitian(rng, q));
    HermitianOperator resource(identity(q) * uniform_real(rng, 0.5, 2.0));
    if (dk == 1) {
      const Eigh e = eigh(gens[0]);
      RealVector r(static_cast<Eigen::Index>(q));
      for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = uniform_real(rng, 0.0, 2.0);
      resource = rotated(e.vectors, r);
    }
    sensors.emplace_back(q, std::move(gens), std::move(resource));
  }
  return SensorNetwork(std::move(sensors));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commuting generators: separable surrogate
// ---------------------------------------------------------------------------

struct Theorem1Trial {
  bool singular = false;             // original QFIM singular; nothing else is filled in
  RealMatrix original;
  RealMatrix surrogate;
  double product_violation = 0.0;    // largest second Schmidt coefficient over single-sensor cuts
  double block_difference = 0.0;     // max |F'_[kk] - F_[kk]|
  double bound_original = 0.0;       // Tr(W F^-1)
  double bound_surrogate = 0.0;      // Tr(W F'^-1)
  double resource_original = 0.0;
  double resource_surrogate = 0.0;
};

inline Theorem1Trial evaluate_theorem1(const SensorNetwork& net, const PureState& psi, const WeightMatrix& w) {
  Theorem1Trial t;
  const Qfim f = qfim_pure(psi, net);
  t.original = f.matrix();
  if (qcrb(f, w, 1).singular) {
    t.singular = true;
    return t;
  }
  const PureState chi = separable_surrogate(psi, net);
  const Qfim fs = qfim_pure(chi, net);
  t.surrogate = fs.matrix();
  for (std::size_t k = 0; k < net.num_sensors(); ++k) {
    const RealVector sc = schmidt_coefficients(chi, k);
    if (sc.size() > 1) t.product_violation = std::max(t.product_violation, sc(1));
  }
  t.block_difference = detail::max_block_difference(fs, f);
  t.bound_original = weighted_inverse_trace(f, w);
  t.bound_surrogate = qcrb(fs, w, 1).bound;
  t.resource_original = resource_count(net, psi);
  t.resource_surrogate = resource_count(net, chi);
  return t;
}

inline AuditResult audit_theorem1(const ScenarioConfig& cfg) {
  cfg.validate();
  AuditResult out;
  out.audit = "t1";
  out.seed = cfg.seed;
  out.trials_requested = cfg.trials;
  out.checks = {{"product", cfg.product_tolerance},
                {"block_equality", cfg.tolerance},
                {"bound_inequality", cfg.tolerance},
                {"resource_inequality", cfg.tolerance},
                {"resource_equality", cfg.tolerance}};
  const std::size_t budget = 10 * std::max<std::size_t>(cfg.trials, 1);
  for (std::size_t trial = 0; trial < cfg.trials && out.complete; ++trial) {
    Rng rng = trial_rng(cfg.seed, trial);
    for (std::size_t draw = 1;; ++draw) {
      const SensorNetwork net = detail::random_commuting_network(rng, cfg);
      const PureState psi = haar_state(rng, net.layout());
      const WeightMatrix w = detail::random_weights(rng, net.num_parameters());
      const Theorem1Trial t = evaluate_theorem1(net, psi, w);
      if (t.singular) {
        if (++out.regenerated > budget) {
          out.complete = false;
          break;
        }
        continue;
      }
      out.check("product").record(t.product_violation);
      out.check("block_equality").record(t.block_difference);
      out.check("bound_inequality").record(detail::scaled_excess(t.bound_surrogate, t.bound_original));
      out.check("resource_inequality").record(detail::scaled_excess(t.resource_surrogate, t.resource_original));
      out.check("resource_equality").record(std::abs(detail::scaled_excess(t.resource_surrogate, t.resource_original)));
      TrialRecord rec{trial, draw, detail::hash_inputs(net, psi.amplitudes(), w), {}};
      rec.values = {{"sensors", static_cast<double>(net.num_sensors())},
                    {"parameters", static_cast<double>(net.num_parameters())},
                    {"bound_original", t.bound_original},
                    {"bound_surrogate", t.bound_surrogate},
                    {"block_difference", t.block_difference},
                    {"product_violation", t.product_violation},
                    {"resource_original", t.resource_original},
                    {"resource_surrogate", t.resource_surrogate}};
      out.records.push_back(std::move(rec));
      ++out.trials_run;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Non-commuting generators: local purifications
// ---------------------------------------------------------------------------

struct Theorem2Trial {
  bool singular = false;           // F of the global purification is singular
  RealMatrix purified;             // F on [sensors..., ancillas...]
  RealMatrix local;                // F' on [s1, a1, s2, a2, ...]
  RealMatrix mixed;                // SLD QFIM of rho itself
  double block_difference = 0.0;
  double product_violation = 0.0;  // largest second Schmidt coefficient over sensor-ancilla pairs
  double bound_purified = 0.0;
  double bound_local = 0.0;
  double bound_mixed = 0.0;        // +inf when the mixed QFIM is singular
  double resource_original = 0.0;  // R(rho)
  double resource_local = 0.0;     // R(phi) counted with ancillas
};

inline Theorem2Trial evaluate_theorem2(const SensorNetwork& net, const DensityOperator& rho, const WeightMatrix& w) {
  Theorem2Trial t;
  const SensorNetwork global = with_global_ancilla(net);
  const PureState psi = purify(rho);
  const Qfim f = qfim_pure(psi, global);
  t.purified = f.matrix();
  if (qcrb(f, w, 1).singular) {
    t.singular = true;
    return t;
  }
  const SensorNetwork paired = with_local_ancillas(net);
  const PureState phi = local_purification_probe(rho, net);
  const Qfim fl = qfim_pure(phi, paired);
  t.local = fl.matrix();
  const MixedQfim fm = qfim_mixed(rho, net);
  t.mixed = fm.qfim.matrix();
  for (std::size_t k = 0; k + 1 < net.num_sensors(); ++k) {
    const RealVector sc = schmidt_coefficients(phi, 2 * k, 2);
    if (sc.size() > 1) t.product_violation = std::max(t.product_violation, sc(1));
  }
  t.block_difference = detail::max_block_difference(fl, f);
  t.bound_purified = weighted_inverse_trace(f, w);
  t.bound_local = qcrb(fl, w, 1).bound;
  t.bound_mixed = qcrb(fm.qfim, w, 1).bound;
  t.resource_original = resource_count(net, rho);
  t.resource_local = resource_count(paired, phi);
  return t;
}

inline AuditResult audit_theorem2(const ScenarioConfig& cfg) {
  cfg.validate();
  AuditResult out;
  out.audit = "t2";
  out.seed = cfg.seed;
  out.trials_requested = cfg.trials;
  out.checks = {{"product", cfg.product_tolerance},
                {"block_equality", cfg.tolerance},
                {"bound_inequality", cfg.tolerance},
                {"mixed_chain", cfg.tolerance},
                {"resource_doubling", cfg.tolerance}};
  const std::size_t budget = 10 * std::max<std::size_t>(cfg.trials, 1);
  for (std::size_t trial = 0; trial < cfg.trials && out.complete; ++trial) {
    Rng rng = trial_rng(cfg.seed, trial);
    for (std::size_t draw = 1;; ++draw) {
      const SensorNetwork net = detail::random_noncommuting_network(rng, cfg);
      const std::size_t dim = net.total_dim();
      const DensityOperator rho = random_density(rng, net.layout(), uniform_index(rng, 2, dim));
      const WeightMatrix w = detail::random_weights(rng, net.num_parameters());
      const bool noncommuting = validate(net).regime == Regime::kNonCommuting;
      Theorem2Trial t;
      t.singular = true;
      if (noncommuting) t = evaluate_theorem2(net, rho, w);
      if (t.singular) {
        if (++out.regenerated > budget) {
          out.complete = false;
          break;
        }
        continue;
      }
      out.check("product").record(t.product_violation);
      out.check("block_equality").record(t.block_difference);
      out.check("bound_inequality").record(detail::scaled_excess(t.bound_local, t.bound_purified));
      out.check("mixed_chain").record(detail::scaled_excess(t.bound_purified, t.bound_mixed));
      out.check("resource_doubling").record(detail::scaled_excess(t.resource_local, 2.0 * t.resource_original));
      TrialRecord rec{trial, draw, detail::hash_inputs(net, rho.matrix(), w), {}};
      rec.values = {{"sensors", static_cast<double>(net.num_sensors())},
                    {"parameters", static_cast<double>(net.num_parameters())},
                    {"bound_mixed", t.bound_mixed},
                    {"bound_purified", t.bound_purified},
                    {"bound_local", t.bound_local},
                    {"block_difference", t.block_difference},
                    {"product_violation", t.product_violation},
                    {"resource_original", t.resource_original},
                    {"resource_local", t.resource_local}};
      out.records.push_back(std::move(rec));
      ++out.trials_run;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagonal blocks of the inverse
// ---------------------------------------------------------------------------

namespace detail {

inline Partition random_partition(Rng& rng, std::size_t d) {
  std::vector<std::size_t> cuts;
  for (std::size_t c = 1; c < d; ++c) cuts.push_back(c);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  const std::size_t blocks = uniform_index(rng, 1, d);
  cuts.resize(blocks - 1);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> sizes;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    sizes.push_back(c - prev);
    prev = c;
  }
  sizes.push_back(d - prev);
  return Partition(std::move(sizes));
}

inline void zero_off_diagonal_blocks(RealMatrix& f, const Partition& p) {
  for (std::size_t a = 0; a < p.num_blocks(); ++a)
    for (std::size_t b = 0; b < p.num_blocks(); ++b)
      if (a != b) {
        f.block(static_cast<Eigen::Index>(p.offset(a)), static_cast<Eigen::Index>(p.offset(b)),
                static_cast<Eigen::Index>(p.size(a)), static_cast<Eigen::Index>(p.size(b)))
            .setZero();
      }
}

}  // namespace detail

/// F = A^T A + I with Gaussian A, d in [2, max_parameters], random partition.
/// Every fourth trial zeroes the off-diagonal blocks, where equality must hold.
inline AuditResult audit_prop1(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.max_parameters < 2) throw ConfigError("prop1 audit needs max_parameters >= 2");
  AuditResult out;
  out.audit = "prop1";
  out.seed = cfg.seed;
  out.trials_requested = cfg.trials;
  out.checks = {{"psd_order", cfg.tolerance}, {"block_diagonal_equality", cfg.equality_tolerance}};
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    Rng rng = trial_rng(cfg.seed, trial);
    const std::size_t d = uniform_index(rng, 2, cfg.max_parameters);
    const RealMatrix a = gaussian_real(rng, d, d);
    RealMatrix f = a.transpose() * a + RealMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const Partition part = detail::random_partition(rng, d);
    const bool forced = trial % 4 == 3;
    if (forced) detail::zero_off_diagonal_blocks(f, part);
    const Prop1Report rep = prop1_check(Qfim(f, part));
    double eq = 0.0;
    for (const auto& b : rep.blocks) {
      out.check("psd_order").record(-b.min_eigenvalue);
      if (forced) eq = std::max(eq, b.max_abs_difference);
    }
    if (forced) out.check("block_diagonal_equality").record(eq);
    detail::Fnv1a h;
    h.add(ComplexMatrix(f.cast<cplx>()));
    TrialRecord rec{trial, 1, h.hex(), {}};
    rec.values = {{"d", static_cast<double>(d)},
                  {"blocks", static_cast<double>(part.num_blocks())},
                  {"block_diagonal", forced ? 1.0 : 0.0},
                  {"min_residual", rep.min_residual()},
                  {"equality_difference", eq}};
    out.records.push_back(std::move(rec));
    ++out.trials_run;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Worked scenario: gradient of two qubit ensembles
// ---------------------------------------------------------------------------

struct GradientReport {
  std::size_t particles = 0;
  std::size_t repeats = 1;
  std::string family;
  RealVector v;                      // (-1, 1)/sqrt(2)
  RealMatrix rotation;               // first row v
  RealMatrix ghz_qfim;
  RealMatrix ghz_rotated;            // F(theta) = M F M^T
  double ghz_variance = 0.0;         // 1 / (mu F(theta)_11)
  double ghz_functional = 0.0;       // v^T F^+ v / mu
  double sum_information = 0.0;      // F(theta)_22
  AllocationVector separable_allocation;
  RealMatrix separable_qfim;
  double separable_variance = 0.0;   // v^T F^-1 v / mu
  double ratio = 0.0;                // separable_variance / ghz_variance
  BoundComparison closed_form;
  double both_separable = 0.0;       // Tr(F^-1) / mu, W = I
  double both_ghz = 0.0;             // +inf: the GHZ QFIM is singular
  std::vector<AuditCheck> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.pass(); });
  }
};

inline GradientReport scenario_gradient(std::size_t particles, std::size_t repeats = 1, double tolerance = 1e-9,
                                        double equality_tolerance = 1e-10) {
  if (particles == 0 || particles % 2 != 0) {
    throw PreconditionError("gradient scenario needs an even, positive N (got " + std::to_string(particles) + ")");
  }
  if (repeats == 0) throw PreconditionError("gradient scenario: mu must be positive");
  GradientReport r;
  r.particles = particles;
  r.repeats = repeats;
  const double mu = static_cast<double>(repeats);
  // The full 2^N space is used while it fits under the dimension cap.
  const bool full = particles < 63 && (std::size_t{1} << particles) <= max_dimension();
  const SensorFamily family = full ? qubit_ensemble_family() : collective_spin_family();
  r.family = family.name;
  r.v = RealVector(2);
  r.v << -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  r.rotation = orthogonal_completion(r.v);

  const NetworkProbe ghz = ghz_probe(r.v, particles, family);
  const Qfim fg = qfim_pure(ghz.state, ghz.network);
  r.ghz_qfim = fg.matrix();
  const Qfim rotated = rotate_qfim(fg, r.rotation);
  r.ghz_rotated = rotated.matrix();
  r.ghz_variance = 1.0 / (mu * rotated(0, 0));
  r.ghz_functional = linear_functional_bound(fg, r.v, repeats).variance;
  r.sum_information = rotated(1, 1);

  const SeparableProbe sep = optimal_separable_probe(r.v, particles, family);
  r.separable_allocation = sep.probe.allocation;
  const Qfim fs = qfim_pure(sep.probe.state, sep.probe.network);
  r.separable_qfim = fs.matrix();
  r.separable_variance = linear_functional_bound(fs, r.v, repeats).variance;
  r.ratio = r.separable_variance / r.ghz_variance;

  r.closed_form = compare_bounds(LinearFunctional(r.v.cwiseAbs(), family.kappa, particles, repeats));
  r.both_separable = qcrb(fs, WeightMatrix::identity(2), repeats).bound;
  r.both_ghz = qcrb(fg, WeightMatrix::identity(2), repeats).bound;

  AuditCheck ratio("ratio_two", tolerance);
  ratio.record(std::abs(r.ratio - 2.0));
  AuditCheck sum("sum_information_zero", equality_tolerance);
  sum.record(std::abs(r.sum_information));
  AuditCheck ghz_closed("ghz_closed_form", tolerance);
  ghz_closed.record(std::abs(detail::scaled_excess(r.ghz_variance, r.closed_form.ghz_bound)));
  ghz_closed.record(std::abs(detail::scaled_excess(r.ghz_functional, r.closed_form.ghz_bound)));
  AuditCheck sep_closed("separable_closed_form", tolerance);
  sep_closed.record(std::abs(detail::scaled_excess(r.separable_variance, r.closed_form.separable_bound)));
  sep_closed.record(std::abs(detail::scaled_excess(sep.objective / mu, r.closed_form.separable_bound)));
  AuditCheck both("both_parameters", 0.0);
  both.record_bool(std::isfinite(r.both_separable) && std::isinf(r.both_ghz));
  r.checks = {ratio, sum, ghz_closed, sep_closed, both};
  return r;
}

// ---------------------------------------------------------------------------
// Worked scenario: independent optical phases
// ---------------------------------------------------------------------------

struct OpticalReport {
  std::size_t modes = 0;
  std::size_t cutoff = 0;
  std::size_t repeats = 1;
  RealMatrix product_qfim;           // (|0> + |n_max>)/sqrt(2) on every mode
  double per_mode_bound = 0.0;       // 1 / (mu n_max^2)
  double total_bound = 0.0;          // Tr(F^-1) / mu
  double mean_photons = 0.0;         // per mode
  RealMatrix noon_qfim;              // modes 0 and 1 in a NOON state, others vacuum
  bool noon_singular = false;
  double noon_surrogate_bound = 0.0;
  RealMatrix vacuum_qfim;
  bool vacuum_singular = false;
  RealMatrix cfim;                   // product two-outcome witness, empty when skipped
  std::vector<std::string> warnings;
  AuditResult random;                // entangled probes against their surrogates
  std::vector<AuditCheck> checks;

  bool pass() const {
    return random.pass() && std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.pass(); });
  }
};

namespace detail {

inline SensorNetwork optical_network(std::size_t modes, std::size_t cutoff) {
  std::vector<SensorSpec> sensors(modes, optical_mode_family().make(cutoff));
  return SensorNetwork(std::move(sensors));
}

/// Total probability that some mode sits at the cutoff level.
inline double cutoff_weight(const PureState& psi, std::size_t cutoff) {
  double w = 0.0;
  for (std::size_t k = 0; k < psi.layout().size(); ++k) {
    w += reduced_state(psi, k).matrix()(static_cast<Eigen::Index>(cutoff), static_cast<Eigen::Index>(cutoff)).real();
  }
  return w;
}

inline void warn_truncation(std::vector<std::string>& warnings, const std::string& what, const PureState& psi,
                            std::size_t cutoff) {
  const double w = cutoff_weight(psi, cutoff);
  if (w > 1e-12) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: weight %.3g at the photon cutoff n = %zu; the truncated generator is exact only on the kept levels",
                  what.c_str(), w, cutoff);
    warnings.emplace_back(buf);
  }
}

}  // namespace detail

inline constexpr std::size_t kCfimWitnessMaxModes = 4;

inline OpticalReport scenario_optical_phases(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.modes == 0) throw ConfigError("optical scenario needs at least one mode");
  if (cfg.cutoff == 0) throw ConfigError("optical scenario needs a photon cutoff of at least 1");
  OpticalReport r;
  r.modes = cfg.modes;
  r.cutoff = cfg.cutoff;
  r.repeats = cfg.repeats;
  const double n = static_cast<double>(cfg.cutoff);
  const double mu = static_cast<double>(cfg.repeats);
  const SensorNetwork net = detail::optical_network(cfg.modes, cfg.cutoff);
  const std::size_t q = cfg.cutoff + 1;

  // Optimal product probe.
  std::vector<ComplexVector> factors(cfg.modes, extremal_superposition(net.sensor(0)).amplitudes());
  const PureState product = PureState::normalized(detail::kron_all(factors), net.layout());
  const Qfim fp = qfim_pure(product, net);
  r.product_qfim = fp.matrix();
  r.per_mode_bound = 1.0 / (mu * n * n);
  r.total_bound = qcrb(fp, WeightMatrix::identity(cfg.modes), cfg.repeats).bound;
  r.mean_photons = n / 2.0;
  detail::warn_truncation(r.warnings, "product probe", product, cfg.cutoff);

  AuditCheck per_mode("per_mode_qfi", cfg.tolerance);
  for (std::size_t k = 0; k < cfg.modes; ++k) {
    per_mode.record(std::abs(detail::scaled_excess(fp(k, k), n * n)));
    for (std::size_t j = 0; j < cfg.modes; ++j)
      if (j != k) per_mode.record(std::abs(fp(k, j)));
  }

  // NOON state across the first two modes.
  AuditCheck noon("noon_singular", 0.0);
  if (cfg.modes >= 2) {
    std::vector<std::size_t> a(cfg.modes, 0), b(cfg.modes, 0);
    a[0] = cfg.cutoff;
    b[1] = cfg.cutoff;
    auto index = [&](const std::vector<std::size_t>& occ) {
      std::size_t i = 0;
      for (std::size_t x : occ) i = i * q + x;
      return static_cast<Eigen::Index>(i);
    };
    ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(net.total_dim()));
    amps(index(a)) = 1.0;
    amps(index(b)) = 1.0;
    const PureState noon_state = PureState::normalized(amps, net.layout());
    const Qfim fn = qfim_pure(noon_state, net);
    r.noon_qfim = fn.matrix();
    r.noon_singular = qcrb(fn, WeightMatrix::identity(cfg.modes), cfg.repeats).singular;
    const Qfim fsur = qfim_pure(separable_surrogate(noon_state, net), net);
    r.noon_surrogate_bound = qcrb(fsur, WeightMatrix::identity(cfg.modes), cfg.repeats).support_bound;
    noon.record_bool(r.noon_singular);
    detail::warn_truncation(r.warnings, "NOON probe", noon_state, cfg.cutoff);
  }

  // Vacuum carries no phase information.
  const PureState vacuum = PureState::basis(net.total_dim(), 0);
  PureState vac(vacuum.amplitudes(), net.layout());
  const Qfim fv = qfim_pure(vac, net);
  r.vacuum_qfim = fv.matrix();
  r.vacuum_singular = qcrb(fv, WeightMatrix::identity(cfg.modes), cfg.repeats).singular;
  AuditCheck vac_check("vacuum_singular", 0.0);
  vac_check.record_bool(r.vacuum_singular && fv.matrix().cwiseAbs().maxCoeff() == 0.0);

  // Product two-outcome measurement in the {(|0> +- i|n_max>)/sqrt(2)} basis.
  AuditCheck witness("cfim_witness", 1e-6);
  if (cfg.modes <= kCfimWitnessMaxModes) {
    ComplexVector plus = ComplexVector::Zero(static_cast<Eigen::Index>(q));
    ComplexVector minus = plus;
    plus(0) = minus(0) = 1.0 / std::sqrt(2.0);
    plus(static_cast<Eigen::Index>(cfg.cutoff)) = cplx(0.0, 1.0 / std::sqrt(2.0));
    minus(static_cast<Eigen::Index>(cfg.cutoff)) = cplx(0.0, -1.0 / std::sqrt(2.0));
    const ComplexMatrix ep = plus * plus.adjoint();
    const ComplexMatrix em = minus * minus.adjoint();
    const std::vector<ComplexMatrix> local = {ep, em, identity(q) - ep - em};
    std::vector<ComplexMatrix> effects = {ComplexMatrix::Ones(1, 1)};
    for (std::size_t k = 0; k < cfg.modes; ++k) {
      std::vector<ComplexMatrix> next;
      for (const auto& e : effects)
        for (const auto& l : local) next.push_back(tensor_product(e, l));
      effects = std::move(next);
    }
    r.cfim = cfim(effects, net, product, ParameterPoint::zero(cfg.modes));
    witness.record((r.cfim - r.product_qfim).cwiseAbs().maxCoeff() / (n * n));
  }

  // Seeded random entangled probes against their separable surrogates.
  r.random.audit = "optical_random";
  r.random.seed = cfg.seed;
  r.random.trials_requested = cfg.trials;
  r.random.checks = {{"product", cfg.product_tolerance},
                     {"block_equality", cfg.tolerance},
                     {"bound_inequality", cfg.tolerance},
                     {"resource_inequality", cfg.tolerance},
                {"resource_equality", cfg.tolerance}};
  const std::size_t budget = 10 * std::max<std::size_t>(cfg.trials, 1);
  std::size_t truncated = 0;
  for (std::size_t trial = 0; trial < cfg.trials && r.random.complete; ++trial) {
    Rng rng = trial_rng(cfg.seed, trial);
    for (std::size_t draw = 1;; ++draw) {
      const PureState psi = haar_state(rng, net.layout());
      const WeightMatrix w = WeightMatrix::identity(cfg.modes);
      const Theorem1Trial t = evaluate_theorem1(net, psi, w);
      if (t.singular) {
        if (++r.random.regenerated > budget) {
          r.random.complete = false;
          break;
        }
        continue;
      }
      if (detail::cutoff_weight(psi, cfg.cutoff) > 1e-12) ++truncated;
      r.random.check("product").record(t.product_violation);
      r.random.check("block_equality").record(t.block_difference);
      r.random.check("bound_inequality").record(detail::scaled_excess(t.bound_surrogate, t.bound_original));
      r.random.check("resource_inequality").record(detail::scaled_excess(t.resource_surrogate, t.resource_original));
      r.random.check("resource_equality").record(std::abs(detail::scaled_excess(t.resource_surrogate, t.resource_original)));
      TrialRecord rec{trial, draw, detail::hash_inputs(net, psi.amplitudes(), w), {}};
      rec.values = {{"bound_original", t.bound_original},
                    {"bound_surrogate", t.bound_surrogate},
                    {"mean_photons", t.resource_original / static_cast<double>(cfg.modes)},
                    {"mean_photons_surrogate", t.resource_surrogate / static_cast<double>(cfg.modes)}};
      r.random.records.push_back(std::move(rec));
      ++r.random.trials_run;
      break;
    }
  }
  if (truncated > 0) {
    r.warnings.push_back(std::to_string(truncated) + " of " + std::to_string(r.random.trials_run) +
                         " random probes have weight at the photon cutoff");
  }

  r.checks = {per_mode, vac_check};
  if (noon.evaluations > 0) r.checks.push_back(noon);
  if (witness.evaluations > 0) r.checks.push_back(witness);
  return r;
}

}  // namespace qsn
