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

// qsn: run audits and scenarios, evaluate bounds, compute the QFIM of a probe.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad input or config.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsn/io.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

using qsn::io::Json;

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> tol;
  std::string out;
  std::string format;
  std::string config;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& default_format) {
  o.format = default_format;
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--trials", o.trials, "number of trials")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "main tolerance")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", o.out, "output directory (default: print to stdout)");
  cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--config", o.config, "JSON scenario config");
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes `body` to stdout, or to <out>/<stem>.<ext> plus a manifest.
class Emitter {
 public:
  Emitter(std::string command, std::string out) : command_(std::move(command)), out_(std::move(out)), started_(timestamp()) {}

  void emit(const std::string& stem, const std::string& ext, const std::string& body) {
    if (out_.empty()) {
      std::cout << body;
      return;
    }
    std::filesystem::create_directories(out_);
    const std::string path = (std::filesystem::path(out_) / (stem + "." + ext)).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw qsn::ConfigError("cannot write " + path);
    f << body;
    outputs_.push_back(path);
  }

  void finish(const Json& config, std::optional<std::uint64_t> seed, int exit_code) {
    if (out_.empty()) return;
    Json m;
    m["tool"] = "qsn";
    m["version"] = kVersion;
    m["command"] = command_;
    m["config"] = config;
    if (seed) {
      m["seed"] = *seed;
    } else {
      m["seed"] = nullptr;
    }
    m["started"] = started_;
    m["finished"] = timestamp();
    m["outputs"] = outputs_;
    m["exit_code"] = exit_code;
    const std::string path = (std::filesystem::path(out_) / "manifest.json").string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw qsn::ConfigError("cannot write " + path);
    f << qsn::io::dump(m);
  }

 private:
  std::string command_;
  std::string out_;
  std::string started_;
  std::vector<std::string> outputs_;
};

qsn::ScenarioConfig resolve_config(const std::string& id, const CommonOptions& o) {
  qsn::ScenarioConfig c = o.config.empty() ? qsn::ScenarioConfig::defaults(id) : qsn::io::parse_config(qsn::io::parse_file(o.config), id);
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.tol) c.tolerance = *o.tol;
  c.validate();
  return c;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) s += ' ';
    s += argv[i];
  }
  return s;
}

int run_audit(const std::string& which, const CommonOptions& o, const std::string& command) {
  const qsn::ScenarioConfig cfg = resolve_config(which, o);
  qsn::AuditResult r;
  if (which == "t1") {
    r = qsn::audit_theorem1(cfg);
  } else if (which == "t2") {
    r = qsn::audit_theorem2(cfg);
  } else {
    r = qsn::audit_prop1(cfg);
  }
  Emitter em(command, o.out);
  if (o.format == "csv") {
    em.emit("audit_" + which, "csv", qsn::io::csv_audit(r));
  } else {
    Json j = qsn::io::to_json(r);
    j["config"] = qsn::io::to_json(cfg);
    em.emit("audit_" + which, "json", qsn::io::dump(j));
  }
  const int code = r.pass() ? kExitPass : kExitViolation;
  em.finish(qsn::io::to_json(cfg), cfg.seed, code);
  return code;
}

struct ScenarioOptions {
  std::optional<std::size_t> particles;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> modes;
  std::optional<std::size_t> cutoff;
};

int run_scenario(const std::string& which, const CommonOptions& o, const ScenarioOptions& s, const std::string& command) {
  qsn::ScenarioConfig cfg = resolve_config(which, o);
  if (s.particles) cfg.particles = *s.particles;
  if (s.repeats) cfg.repeats = *s.repeats;
  if (s.modes) cfg.modes = *s.modes;
  if (s.cutoff) cfg.cutoff = *s.cutoff;
  cfg.validate();
  Emitter em(command, o.out);
  bool pass = false;
  if (which == "gradient") {
    const qsn::GradientReport r = qsn::scenario_gradient(cfg.particles, cfg.repeats, cfg.tolerance, cfg.equality_tolerance);
    pass = r.pass();
    if (o.format == "csv") {
      em.emit("scenario_gradient", "csv", qsn::io::csv_gradient(r));
    } else {
      em.emit("scenario_gradient", "json", qsn::io::dump(qsn::io::to_json(r)));
    }
  } else {
    const qsn::OpticalReport r = qsn::scenario_optical_phases(cfg);
    pass = r.pass();
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    if (o.format == "csv") {
      em.emit("scenario_optical", "csv", qsn::io::csv_optical(r));
    } else {
      em.emit("scenario_optical", "json", qsn::io::dump(qsn::io::to_json(r)));
    }
  }
  const int code = pass ? kExitPass : kExitViolation;
  em.finish(qsn::io::to_json(cfg), cfg.seed, code);
  return code;
}

struct SweepOptions {
  std::size_t d_max = 4;
  std::size_t n_max = 8;
  double kappa = 1.0;
  std::size_t repeats = 1;
};

int run_sweep(const CommonOptions& o, const SweepOptions& s, const std::string& command) {
  if (s.d_max == 0 || s.n_max == 0) throw qsn::ConfigError("--d-max and --N-max must be positive");
  Emitter em(command, o.out);
  std::string csv = qsn::io::csv_bounds_header();
  Json rows = Json::array();
  for (std::size_t d = 1; d <= s.d_max; ++d) {
    for (std::size_t n = 1; n <= s.n_max; ++n) {
      const qsn::BoundComparison b = qsn::compare_bounds(qsn::LinearFunctional::uniform(d, s.kappa, n, s.repeats));
      csv += qsn::io::csv_row(b);
      rows.push_back(qsn::io::to_json(b));
    }
  }
  if (o.format == "csv") {
    em.emit("bounds_sweep", "csv", csv);
  } else {
    em.emit("bounds_sweep", "json", qsn::io::dump(Json{{"functional", "uniform"}, {"rows", rows}}));
  }
  const Json cfg{{"d_max", s.d_max}, {"N_max", s.n_max}, {"kappa", s.kappa}, {"mu", s.repeats}};
  em.finish(cfg, std::nullopt, kExitPass);
  return kExitPass;
}

qsn::RealVector parse_weights(const std::string& text, std::size_t d) {
  if (text.empty()) return qsn::RealVector::Ones(static_cast<Eigen::Index>(d));
  std::vector<double> w;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      w.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw qsn::ConfigError("--weights: '" + item + "' is not a number");
    }
  }
  if (w.size() != d) {
    throw qsn::ConfigError("--weights: expected " + std::to_string(d) + " entries, got " + std::to_string(w.size()));
  }
  return Eigen::Map<qsn::RealVector>(w.data(), static_cast<Eigen::Index>(w.size()));
}

int run_qfim(const std::string& network_path, const std::string& state_path, const CommonOptions& o,
             const std::string& weights, std::size_t repeats, const std::string& command) {
  const qsn::SensorNetwork net = qsn::io::parse_network(qsn::io::parse_file(network_path));
  const qsn::io::State state = qsn::io::parse_state(qsn::io::parse_file(state_path));
  const qsn::Layout layout = std::visit([](const auto& s) { return s.layout(); }, state);
  if (layout != net.layout()) {
    throw qsn::ConfigError(state_path + ": state layout does not match the network sensor dimensions");
  }
  qsn::WeightMatrix w{[&] {
    try {
      return qsn::WeightMatrix(parse_weights(weights, net.num_parameters()));
    } catch (const qsn::ConfigError&) {
      throw;
    } catch (const qsn::Error& e) {
      throw qsn::ConfigError(std::string("--weights: ") + e.what());
    }
  }()};

  const bool pure = std::holds_alternative<qsn::PureState>(state);
  const qsn::Qfim f = pure ? qsn::qfim_pure(std::get<qsn::PureState>(state), net)
                           : qsn::qfim_mixed(std::get<qsn::DensityOperator>(state), net).qfim;
  qsn::BoundReport bound = qsn::qcrb(f, w, repeats);
  if (!bound.singular) {
    for (const auto& b : qsn::prop1_check(f).blocks) bound.residuals.push_back(b.min_eigenvalue);
  }
  const qsn::NetworkDiagnostics diag = qsn::validate(net);
  const double resources = std::visit([&](const auto& s) { return qsn::resource_count(net, s); }, state);

  Emitter em(command, o.out);
  if (o.format == "csv") {
    std::ostringstream os;
    os << "i,j,value\n";
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j) os << i << ',' << j << ',' << qsn::io::format_double(f(i, j)) << '\n';
    em.emit("qfim", "csv", os.str());
  } else {
    Json j;
    j["state_kind"] = pure ? "pure" : "mixed";
    j["regime"] = qsn::to_string(diag.regime);
    j["resources_conserved"] = diag.resources_conserved;
    j["partition"] = f.partition().sizes();
    j["qfim"] = qsn::io::to_json(f.matrix());
    j["weights"] = qsn::io::to_json(w.diagonal());
    j["mu"] = repeats;
    j["qcrb"] = qsn::io::to_json(bound);
    j["resource_count"] = resources;
    em.emit("qfim", "json", qsn::io::dump(j));
  }
  em.finish(Json{{"network", network_path}, {"state", state_path}, {"mu", repeats}}, std::nullopt, kExitPass);
  return kExitPass;
}

/// QSN_MAX_DIM must be a positive integer when set.
void check_environment() {
  const char* raw = std::getenv("QSN_MAX_DIM");
  if (raw == nullptr || *raw == '\0') return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0 || raw[0] == '-') {
    throw qsn::ConfigError(std::string("QSN_MAX_DIM='") + raw + "' is not a positive integer");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum sensing network bounds: audits, scenarios and QFIM evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOptions audit_opts, scenario_opts, bounds_opts, qfim_opts;

  auto* audit = app.add_subcommand("audit", "randomised audit: t1 (commuting), t2 (non-commuting), prop1 (inverse blocks)");
  std::string audit_which;
  audit->add_option("which", audit_which, "t1, t2 or prop1")->required()->check(CLI::IsMember({"t1", "t2", "prop1"}));
  add_common(audit, audit_opts, "json");

  auto* scenario = app.add_subcommand("scenario", "worked scenario: gradient or optical");
  std::string scenario_which;
  ScenarioOptions sopts;
  scenario->add_option("which", scenario_which, "gradient or optical")->required()->check(CLI::IsMember({"gradient", "optical"}));
  scenario->add_option("--N", sopts.particles, "total particles (gradient)")->check(CLI::PositiveNumber);
  scenario->add_option("--mu", sopts.repeats, "repeats")->check(CLI::PositiveNumber);
  scenario->add_option("--d", sopts.modes, "modes (optical)")->check(CLI::PositiveNumber);
  scenario->add_option("--nmax", sopts.cutoff, "photon cutoff (optical)")->check(CLI::PositiveNumber);
  add_common(scenario, scenario_opts, "csv");

  auto* bounds = app.add_subcommand("bounds", "closed-form bounds");
  std::string bounds_which;
  SweepOptions sweep;
  bounds->add_option("which", bounds_which, "sweep")->required()->check(CLI::IsMember({"sweep"}));
  bounds->add_option("--d-max", sweep.d_max, "largest number of sensors")->check(CLI::PositiveNumber);
  bounds->add_option("--N-max", sweep.n_max, "largest particle budget")->check(CLI::PositiveNumber);
  bounds->add_option("--kappa", sweep.kappa, "spectral-width constant")->check(CLI::PositiveNumber);
  bounds->add_option("--mu", sweep.repeats, "repeats")->check(CLI::PositiveNumber);
  add_common(bounds, bounds_opts, "csv");

  auto* qfim = app.add_subcommand("qfim", "QFIM and weighted bound of a probe on a network");
  std::string network_path, state_path, weights;
  std::size_t qfim_mu = 1;
  qfim->add_option("network", network_path, "network-spec JSON")->required();
  qfim->add_option("state", state_path, "state JSON")->required();
  qfim->add_option("--weights", weights, "comma-separated diagonal of W (default all ones)");
  qfim->add_option("--mu", qfim_mu, "repeats")->check(CLI::PositiveNumber);
  add_common(qfim, qfim_opts, "json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string command = join_args(argc, argv);
  try {
    check_environment();
    if (audit->parsed()) return run_audit(audit_which, audit_opts, command);
    if (scenario->parsed()) return run_scenario(scenario_which, scenario_opts, sopts, command);
    if (bounds->parsed()) return run_sweep(bounds_opts, sweep, command);
    if (qfim->parsed()) return run_qfim(network_path, state_path, qfim_opts, weights, qfim_mu, command);
  } catch (const qsn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
