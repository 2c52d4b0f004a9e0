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

// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qsn/bounds.hpp"
#include "qsn/fisher.hpp"
#include "qsn/io.hpp"
#include "qsn/scenarios.hpp"
#include "qsn/states.hpp"

namespace {

using namespace qsn;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates the worst value of a quantity that must stay below a limit.
struct Worst {
  double value = -std::numeric_limits<double>::infinity();
  void add(double x) { value = std::isnan(x) || std::isnan(value) ? std::nan("") : std::max(value, x); }
  bool below(double limit) const { return !std::isnan(value) && value <= limit; }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double min_eig(const RealMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<RealMatrix>((m + m.transpose()) * 0.5, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

std::string check_summary(const AuditResult& r) {
  std::string s = "trials " + std::to_string(r.trials_run) + "/" + std::to_string(r.trials_requested);
  for (const auto& c : r.checks) s += ", " + c.name + " " + fmt("%.3g", c.max_violation) + (c.pass() ? "" : " (FAIL)");
  if (!r.complete) s += ", redraw budget exhausted";
  return s;
}

// 1. Pure-state and SLD QFIMs agree on random probes.
Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Worst diff;
  for (std::uint64_t t = 0; t < 500; ++t) {
    Rng rng = trial_rng(1001, t);
    const std::size_t sensors = uniform_index(rng, 2, 3);
    std::vector<SensorSpec> specs;
    for (std::size_t s = 0; s < sensors; ++s) {
      const std::size_t q = uniform_index(rng, 2, 4);
      std::vector<HermitianOperator> gens;
      for (std::size_t g = uniform_index(rng, 1, 2); g > 0; --g) gens.push_back(random_hermitian(rng, q));
      specs.emplace_back(q, std::move(gens), ops::zero(q));
    }
    const SensorNetwork net(std::move(specs));
    const PureState psi = haar_state(rng, net.layout());
    const Qfim fp = qfim_pure(psi, net);
    const Qfim fm = qfim_mixed(DensityOperator::from_pure(psi), net).qfim;
    diff.add((fp.matrix() - fm.matrix()).cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds_since(t0);
  return {diff.below(1e-9) && elapsed < 60.0,
          "500 probes, max |F_pure - F_sld| " + fmt("%.3g", diff.value) + ", " + fmt("%.2f s", elapsed)};
}

// 2. Diagonal blocks of the inverse dominate inverse blocks.
Outcome criterion2() {
  const AuditResult r = audit_prop1(ScenarioConfig::defaults("prop1"));
  AuditResult copy = r;
  const bool ok = r.pass() && r.trials_run == 1000 && copy.check("psd_order").max_violation <= 1e-9 &&
                  copy.check("block_diagonal_equality").max_violation <= 1e-10;
  return {ok, check_summary(r)};
}

// 3. Commuting generators: separable surrogates.
Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig c = ScenarioConfig::defaults("t1");
  c.trials = 200;
  c.product_tolerance = 1e-10;
  c.tolerance = 1e-9;
  const AuditResult r = audit_theorem1(c);
  const double elapsed = seconds_since(t0);
  return {r.pass() && r.trials_run == 200 && elapsed < 300.0, check_summary(r) + ", " + fmt("%.2f s", elapsed)};
}

// 4. Non-commuting generators: local purifications.
Outcome criterion4() {
  ScenarioConfig c = ScenarioConfig::defaults("t2");
  c.trials = 200;
  c.tolerance = 1e-9;
  const AuditResult r = audit_theorem2(c);
  return {r.pass() && r.trials_run == 200, check_summary(r)};
}

// 5. GHZ probe: rank-one QFIM along v and enhancement d.
Outcome criterion5() {
  Worst qfim_err, f11_err, ratio_err, state_ratio_err;
  for (std::size_t d = 2; d <= 4; ++d) {
    const double dd = static_cast<double>(d);
    const RealVector v = RealVector::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(dd));
    const double l1 = v.sum();
    const NetworkProbe g = ghz_probe(v, d, qubit_ensemble_family());
    const Qfim f = qfim_pure(g.state, g.network);
    qfim_err.add((f.matrix() - dd * dd * v * v.transpose() / (l1 * l1)).cwiseAbs().maxCoeff());
    const Qfim rotated = rotate_qfim(f, orthogonal_completion(v));
    f11_err.add(std::abs(rotated(0, 0) - dd * dd / (l1 * l1)));
    const LinearFunctional lf = LinearFunctional::uniform(d, 1.0, d, 1);
    ratio_err.add(std::abs(enhancement_ratio(lf) - dd));
    // The same ratio from explicit states.
    const SeparableProbe s = optimal_separable_probe(v, d, qubit_ensemble_family());
    const double sep = linear_functional_bound(qfim_pure(s.probe.state, s.probe.network), v, 1).variance;
    const double ghz = 1.0 / rotated(0, 0);
    state_ratio_err.add(std::abs(sep / ghz - dd));
  }
  const bool ok = qfim_err.below(1e-9) && f11_err.below(1e-9) && ratio_err.below(1e-9) && state_ratio_err.below(1e-9);
  return {ok, "d = 2..4, QFIM err " + fmt("%.3g", qfim_err.value) + ", F(theta)_11 err " + fmt("%.3g", f11_err.value) +
                  ", ratio err " + fmt("%.3g", ratio_err.value) + ", state-level ratio err " +
                  fmt("%.3g", state_ratio_err.value)};
}

// 6. Gradient of two ensembles at N = 4.
Outcome criterion6() {
  const GradientReport r = scenario_gradient(4);
  const bool ok = std::abs(r.ratio - 2.0) <= 1e-9 && std::abs(r.sum_information) <= 1e-10;
  return {ok, "ratio " + io::format_double(r.ratio) + ", F(theta)_22 " + fmt("%.3g", r.sum_information) +
                  ", GHZ variance " + io::format_double(r.ghz_variance) + ", separable variance " +
                  io::format_double(r.separable_variance)};
}

// 7. Norm chain on random non-negative unit vectors.
Outcome criterion7() {
  Worst rel;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Rng rng = trial_rng(1007, t);
    const std::size_t d = uniform_index(rng, 1, 16);
    RealVector v = gaussian_real(rng, d, 1).col(0).cwiseAbs();
    if (d > 1 && t % 5 == 0) v(static_cast<Eigen::Index>(uniform_index(rng, 0, d - 1))) = 0.0;
    if (v.norm() == 0.0) v(0) = 1.0;
    v.normalize();
    const double q = pnorm(v, 2.0 / 3.0), l1 = pnorm(v, 1.0);
    // Relative shortfall of each link in the chain; negative means satisfied.
    rel.add((l1 * l1 * l1 - q * q) / (q * q));
    rel.add((l1 * l1 - l1 * l1 * l1) / (l1 * l1 * l1));
  }
  return {rel.below(1e-12), "1000 vectors, worst relative shortfall " + fmt("%.3g", rel.value)};
}

// 8. Classical Fisher information of explicit measurements.
Outcome criterion8() {
  const SensorNetwork one({SensorSpec(2, {ops::scaled(ops::sigma_z(), 0.5)}, ops::zero(2))});
  const PureState plus(ComplexVector::Constant(2, 1.0 / std::sqrt(2.0)), {2});
  ComplexVector yp(2), ym(2);
  yp << 1.0 / std::sqrt(2.0), cplx(0, 1.0 / std::sqrt(2.0));
  ym << 1.0 / std::sqrt(2.0), cplx(0, -1.0 / std::sqrt(2.0));
  const std::vector<ComplexMatrix> y_basis{yp * yp.adjoint(), ym * ym.adjoint()};
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  const std::vector<ComplexMatrix> z_basis{p0, p1};
  const double fy = cfim(y_basis, one, plus, ParameterPoint::zero(1))(0, 0);
  const double fz = cfim(z_basis, one, plus, ParameterPoint::zero(1))(0, 0);

  Worst gap;
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng = trial_rng(1008, t);
    const std::size_t sensors = uniform_index(rng, 1, 2);
    std::vector<SensorSpec> specs;
    for (std::size_t s = 0; s < sensors; ++s) {
      const std::size_t q = uniform_index(rng, 2, 3);
      specs.emplace_back(q, std::vector<HermitianOperator>{random_hermitian(rng, q)}, ops::zero(q));
    }
    const SensorNetwork net(std::move(specs));
    const std::size_t dim = net.total_dim();
    const DensityOperator rho = random_density(rng, net.layout(), uniform_index(rng, 1, dim));
    const std::size_t rank = uniform_index(rng, 1, 2);
    const auto povm = random_povm(rng, dim, uniform_index(rng, (dim + rank - 1) / rank, 2 * dim), rank);
    const RealMatrix c = cfim(povm, net, rho, ParameterPoint::zero(net.num_parameters()));
    const RealMatrix q = qfim_mixed(rho, net).qfim.matrix();
    gap.add(-min_eig(q - c));
  }
  const bool ok = std::abs(fy - 1.0) <= 1e-5 && std::abs(fz) <= 1e-5 && gap.below(1e-6);
  return {ok, "sigma_y basis " + fmt("%.10f", fy) + ", sigma_z basis " + fmt("%.3g", fz) +
                  ", 100 POVMs, worst -lambda_min(F_Q - F_C) " + fmt("%.3g", gap.value)};
}

// 9. Same seed, same bytes.
Outcome criterion9() {
  ScenarioConfig t1 = ScenarioConfig::defaults("t1");
  t1.trials = 20;
  const std::string a = io::dump(io::to_json(audit_theorem1(t1)));
  const std::string b = io::dump(io::to_json(audit_theorem1(t1)));
  const ScenarioConfig p = ScenarioConfig::defaults("prop1");
  const std::string c = io::dump(io::to_json(audit_prop1(p)));
  const std::string d = io::dump(io::to_json(audit_prop1(p)));
  return {a == b && c == d, "t1 (20 trials) " + std::to_string(a.size()) + " bytes, prop1 " + std::to_string(c.size()) +
                                " bytes, identical " + (a == b && c == d ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
