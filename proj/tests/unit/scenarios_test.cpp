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

#include "qsn/io.hpp"
#include "qsn/scenarios.hpp"
#include "test_support.hpp"

namespace qsn {
namespace {

using testing::bell_state;
using testing::qubit_network;

ScenarioConfig small(const std::string& id, std::size_t trials) {
  ScenarioConfig c = ScenarioConfig::defaults(id);
  c.trials = trials;
  return c;
}

void expect_all_pass(const AuditResult& r) {
  EXPECT_TRUE(r.complete) << r.audit;
  for (const auto& c : r.checks) {
    EXPECT_TRUE(c.pass()) << r.audit << "/" << c.name << " max violation " << c.max_violation;
    EXPECT_GT(c.evaluations, 0u) << r.audit << "/" << c.name;
  }
}

TEST(AuditCheckTest, Recording) {
  AuditCheck c("x", 1e-9);
  EXPECT_TRUE(c.pass());
  c.record(-1.0);
  c.record(5e-10);
  EXPECT_TRUE(c.pass());
  EXPECT_DOUBLE_EQ(c.max_violation, 5e-10);
  c.record(2e-9);
  EXPECT_FALSE(c.pass());
  EXPECT_EQ(c.failures, 1u);
  AuditCheck n("nan", 1.0);
  n.record(std::nan(""));
  n.record(0.0);
  EXPECT_FALSE(n.pass());
  EXPECT_TRUE(std::isnan(n.max_violation));
}

TEST(ScenarioConfigTest, DefaultsAndValidation) {
  EXPECT_EQ(ScenarioConfig::defaults("prop1").trials, 1000u);
  EXPECT_EQ(ScenarioConfig::defaults("t1").trials, 200u);
  EXPECT_THROW(ScenarioConfig::defaults("t3"), ConfigError);
  ScenarioConfig c = ScenarioConfig::defaults("t1");
  c.min_sensors = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ScenarioConfig::defaults("t1");
  c.trials = 0;
  EXPECT_THROW(audit_theorem1(c), ConfigError);
}

TEST(Theorem1Test, HandComputedTrial) {
  // (|00> + |01> + |10>)/sqrt(3): <Z_k> = 1/3 and <Z_1 Z_2> = -1/3, so
  // F = [[8, -4], [-4, 8]]/9, Tr F^-1 = 3, and the surrogate keeps only the diagonal.
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(1) = v(2) = 1.0 / std::sqrt(3.0);
  const Theorem1Trial t = evaluate_theorem1(qubit_network(2), PureState(v, {2, 2}), WeightMatrix::identity(2));
  ASSERT_FALSE(t.singular);
  EXPECT_NEAR(t.original(0, 1), -4.0 / 9.0, 1e-12);
  EXPECT_LE(t.product_violation, 1e-12);
  EXPECT_LE(t.block_difference, 1e-12);
  EXPECT_NEAR(t.bound_original, 3.0, 1e-12);
  EXPECT_NEAR(t.bound_surrogate, 2.25, 1e-12);
  EXPECT_NEAR(t.resource_original, t.resource_surrogate, 1e-12);
}

TEST(Theorem1Test, SingularTrialsAreFlagged) {
  // sigma_z/2 on both halves of a Bell pair: F = [[1, 1], [1, 1]].
  EXPECT_TRUE(evaluate_theorem1(qubit_network(2), bell_state(), WeightMatrix::identity(2)).singular);
  const SensorNetwork twice({SensorSpec(2, {ops::sigma_z(), ops::sigma_z()}, ops::zero(2))});
  EXPECT_TRUE(evaluate_theorem1(twice, testing::plus_state(), WeightMatrix::identity(2)).singular);
}

TEST(Theorem1Test, ProductEigenbasisTrialIsTight) {
  // A product state in the joint eigenbasis is its own surrogate.
  const SensorNetwork net = qubit_network(2);
  const PureState pp(ComplexVector::Constant(4, 0.5), {2, 2});
  const Theorem1Trial t = evaluate_theorem1(net, pp, WeightMatrix::identity(2));
  EXPECT_NEAR(t.bound_original, t.bound_surrogate, 1e-12);
}

TEST(AuditTest, SmallTheorem1Passes) {
  const AuditResult r = audit_theorem1(small("t1", 25));
  expect_all_pass(r);
  EXPECT_EQ(r.trials_run, 25u);
  EXPECT_EQ(r.records.size(), 25u);
}

TEST(AuditTest, SmallTheorem2Passes) {
  const AuditResult r = audit_theorem2(small("t2", 15));
  expect_all_pass(r);
  EXPECT_EQ(r.trials_run, 15u);
}

TEST(AuditTest, SmallProp1Passes) {
  const AuditResult r = audit_prop1(small("prop1", 200));
  expect_all_pass(r);
}

TEST(AuditTest, SameSeedSameBytes) {
  const ScenarioConfig c = small("t1", 8);
  EXPECT_EQ(io::dump(io::to_json(audit_theorem1(c))), io::dump(io::to_json(audit_theorem1(c))));
  const ScenarioConfig p = small("prop1", 40);
  EXPECT_EQ(io::dump(io::to_json(audit_prop1(p))), io::dump(io::to_json(audit_prop1(p))));
  ScenarioConfig other = c;
  other.seed += 1;
  EXPECT_NE(io::dump(io::to_json(audit_theorem1(c))), io::dump(io::to_json(audit_theorem1(other))));
}

TEST(AuditTest, TrialStreamsAreIndependentOfTrialCount) {
  // Trial k draws from its own stream, so a longer run extends a shorter one.
  const AuditResult a = audit_theorem1(small("t1", 3));
  const AuditResult b = audit_theorem1(small("t1", 6));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.records[i].input_hash, b.records[i].input_hash);
}

TEST(GradientTest, FourParticles) {
  const GradientReport r = scenario_gradient(4);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.family, "qubit_ensemble");
  EXPECT_NEAR(r.ghz_variance, 0.125, 1e-12);
  EXPECT_NEAR(r.separable_variance, 0.25, 1e-12);
  EXPECT_NEAR(r.ratio, 2.0, 1e-9);
  EXPECT_LE(std::abs(r.sum_information), 1e-10);
  EXPECT_EQ(r.separable_allocation.counts(), (std::vector<std::size_t>{2, 2}));
  EXPECT_TRUE(std::isinf(r.both_ghz));
  EXPECT_TRUE(std::isfinite(r.both_separable));
}

TEST(GradientTest, LargerBudgetsAndRepeats) {
  for (std::size_t n : {2u, 6u, 10u}) {
    const GradientReport r = scenario_gradient(n, 3);
    EXPECT_TRUE(r.pass()) << n;
    EXPECT_NEAR(r.ghz_variance, 2.0 / (3.0 * static_cast<double>(n * n)), 1e-12);
  }
}

TEST(GradientTest, CollectiveFallbackUnderDimensionCap) {
  const std::size_t saved = max_dimension();
  set_max_dimension(32);
  const GradientReport r = scenario_gradient(6);
  set_max_dimension(saved);
  EXPECT_EQ(r.family, "collective_spin");
  EXPECT_TRUE(r.pass());
}

TEST(GradientTest, OddOrZeroBudgetIsRejected) {
  EXPECT_THROW(scenario_gradient(3), PreconditionError);
  EXPECT_THROW(scenario_gradient(0), PreconditionError);
  EXPECT_THROW(scenario_gradient(4, 0), PreconditionError);
}

TEST(OpticalTest, DefaultScenario) {
  ScenarioConfig c = small("optical", 5);
  const OpticalReport r = scenario_optical_phases(c);
  EXPECT_TRUE(r.pass());
  ASSERT_EQ(r.product_qfim.rows(), 2);
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(r.product_qfim(k, k), 9.0, 1e-12);
  EXPECT_NEAR(r.per_mode_bound, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.mean_photons, 1.5, 1e-12);
  EXPECT_TRUE(r.vacuum_singular);
  EXPECT_TRUE(r.noon_singular);
  EXPECT_GT(r.cfim.rows(), 0);
}

TEST(OpticalTest, SingleModeAndCutoffs) {
  for (std::size_t cutoff : {1u, 2u, 5u}) {
    ScenarioConfig c = small("optical", 2);
    c.modes = 1;
    c.cutoff = cutoff;
    const OpticalReport r = scenario_optical_phases(c);
    EXPECT_TRUE(r.pass()) << cutoff;
    EXPECT_NEAR(r.product_qfim(0, 0), static_cast<double>(cutoff * cutoff), 1e-12);
  }
}

}  // namespace
}  // namespace qsn
