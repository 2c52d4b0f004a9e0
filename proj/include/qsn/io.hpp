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

// JSON and CSV input/output.
//
// Complex matrices are arrays of rows, each entry a [re, im] pair. Readers are
// strict: unknown keys and malformed entries raise ConfigError naming the
// offending field path. Writers print every double with 17 significant digits
// so equal runs give byte-identical files; non-finite values become the
// strings "inf", "-inf" and "nan".

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qsn/bounds.hpp"
#include "qsn/fisher.hpp"
#include "qsn/hilbert.hpp"
#include "qsn/network.hpp"
#include "qsn/scenarios.hpp"

namespace qsn::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void dump_to(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_to(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += flat && indent >= 0 ? ", " : ",";
        if (!flat) newline(depth + 1);
        dump_to(out, j[i], indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "\"" + format_double(x) + "\"";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Serialises with 17 significant digits per double; indent < 0 is compact.
inline std::string dump(const Json& j, int indent = 2) {
  std::string out;
  detail::dump_to(out, j, indent, 0);
  if (indent >= 0) out += '\n';
  return out;
}

inline Json to_json(const RealVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json to_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(RealVector(m.row(i).transpose())));
  return rows;
}

inline Json complex_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const BoundReport& r) {
  Json j;
  j["bound"] = r.bound;
  j["support_bound"] = r.support_bound;
  j["diag_inverse"] = to_json(r.diag_inverse);
  j["singular"] = r.singular;
  j["support_dim"] = r.support_dim;
  j["undetermined_parameters"] = r.undetermined_parameters;
  j["undetermined_directions"] = to_json(RealMatrix(r.undetermined_directions.transpose()));
  j["residuals"] = r.residuals;
  return j;
}

inline Json to_json(const BoundComparison& b) {
  Json j;
  j["d"] = b.d;
  j["N"] = b.particles;
  j["kappa"] = b.kappa;
  j["mu"] = b.repeats;
  j["separable_bound"] = b.separable_bound;
  j["ghz_bound"] = b.ghz_bound;
  j["ratio"] = b.ratio;
  j["ghz_certified"] = b.ghz_certified;
  return j;
}

inline Json to_json(const AuditCheck& c) {
  Json j;
  j["name"] = c.name;
  j["tolerance"] = c.tolerance;
  j["max_violation"] = c.max_violation;
  j["evaluations"] = c.evaluations;
  j["failures"] = c.failures;
  j["pass"] = c.pass();
  return j;
}

inline Json to_json(const std::vector<AuditCheck>& checks) {
  Json a = Json::array();
  for (const auto& c : checks) a.push_back(to_json(c));
  return a;
}

inline Json to_json(const TrialRecord& r) {
  Json j;
  j["trial"] = r.trial;
  j["draws"] = r.draws;
  j["input_hash"] = r.input_hash;
  Json values;
  for (const auto& [k, v] : r.values) values[k] = v;
  j["values"] = std::move(values);
  return j;
}

inline Json to_json(const AuditResult& r) {
  Json j;
  j["audit"] = r.audit;
  j["seed"] = r.seed;
  j["trials_requested"] = r.trials_requested;
  j["trials_run"] = r.trials_run;
  j["regenerated"] = r.regenerated;
  j["complete"] = r.complete;
  j["max_violation"] = r.max_violation();
  j["pass"] = r.pass();
  j["checks"] = to_json(r.checks);
  Json recs = Json::array();
  for (const auto& t : r.records) recs.push_back(to_json(t));
  j["records"] = std::move(recs);
  return j;
}

inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["id"] = c.id;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["min_sensors"] = c.min_sensors;
  j["max_sensors"] = c.max_sensors;
  j["min_local_dim"] = c.min_local_dim;
  j["max_local_dim"] = c.max_local_dim;
  j["max_parameters"] = c.max_parameters;
  j["particles"] = c.particles;
  j["modes"] = c.modes;
  j["cutoff"] = c.cutoff;
  j["repeats"] = c.repeats;
  j["tolerance"] = c.tolerance;
  j["product_tolerance"] = c.product_tolerance;
  j["equality_tolerance"] = c.equality_tolerance;
  return j;
}

inline Json to_json(const GradientReport& r) {
  Json j;
  j["scenario"] = "gradient";
  j["N"] = r.particles;
  j["mu"] = r.repeats;
  j["family"] = r.family;
  j["v"] = to_json(r.v);
  j["rotation"] = to_json(r.rotation);
  j["ghz_qfim"] = to_json(r.ghz_qfim);
  j["ghz_rotated_qfim"] = to_json(r.ghz_rotated);
  j["ghz_variance"] = r.ghz_variance;
  j["ghz_functional_variance"] = r.ghz_functional;
  j["sum_information"] = r.sum_information;
  j["separable_allocation"] = r.separable_allocation.counts();
  j["separable_qfim"] = to_json(r.separable_qfim);
  j["separable_variance"] = r.separable_variance;
  j["ratio"] = r.ratio;
  j["closed_form"] = to_json(r.closed_form);
  j["both_parameters"] = Json{{"separable_bound", r.both_separable}, {"ghz_bound", r.both_ghz}};
  j["pass"] = r.pass();
  j["checks"] = to_json(r.checks);
  return j;
}

inline Json to_json(const OpticalReport& r) {
  Json j;
  j["scenario"] = "optical";
  j["modes"] = r.modes;
  j["cutoff"] = r.cutoff;
  j["mu"] = r.repeats;
  j["product_qfim"] = to_json(r.product_qfim);
  j["per_mode_bound"] = r.per_mode_bound;
  j["total_bound"] = r.total_bound;
  j["mean_photons_per_mode"] = r.mean_photons;
  j["allocation"] = std::vector<std::size_t>(r.modes, r.cutoff);
  if (r.noon_qfim.size() > 0) {
    j["noon"] = Json{{"qfim", to_json(r.noon_qfim)}, {"singular", r.noon_singular}, {"surrogate_bound", r.noon_surrogate_bound}};
  }
  j["vacuum"] = Json{{"qfim", to_json(r.vacuum_qfim)}, {"singular", r.vacuum_singular}};
  if (r.cfim.size() > 0) j["cfim_witness"] = to_json(r.cfim);
  j["warnings"] = r.warnings;
  j["pass"] = r.pass();
  j["checks"] = to_json(r.checks);
  j["random_probes"] = to_json(r.random);
  return j;
}

// ---------------------------------------------------------------------------
// CSV summaries
// ---------------------------------------------------------------------------

inline std::string csv_audit(const AuditResult& r) {
  std::ostringstream os;
  os << "audit,seed,trials_run,regenerated,check,tolerance,max_violation,failures,pass\n";
  for (const auto& c : r.checks) {
    os << r.audit << ',' << r.seed << ',' << r.trials_run << ',' << r.regenerated << ',' << c.name << ','
       << format_double(c.tolerance) << ',' << format_double(c.max_violation) << ',' << c.failures << ','
       << (c.pass() && r.complete ? "true" : "false") << '\n';
  }
  return os.str();
}

inline std::string csv_gradient(const GradientReport& r) {
  std::ostringstream os;
  os << "N,mu,family,ghz_variance,separable_variance,ratio,sum_information,closed_separable,closed_ghz,closed_ratio,pass\n";
  os << r.particles << ',' << r.repeats << ',' << r.family << ',' << format_double(r.ghz_variance) << ','
     << format_double(r.separable_variance) << ',' << format_double(r.ratio) << ',' << format_double(r.sum_information)
     << ',' << format_double(r.closed_form.separable_bound) << ',' << format_double(r.closed_form.ghz_bound) << ','
     << format_double(r.closed_form.ratio) << ',' << (r.pass() ? "true" : "false") << '\n';
  return os.str();
}

inline std::string csv_optical(const OpticalReport& r) {
  std::ostringstream os;
  os << "mode,cutoff,photons,qfi,bound\n";
  for (std::size_t k = 0; k < r.modes; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    os << k << ',' << r.cutoff << ',' << r.cutoff << ',' << format_double(r.product_qfim(i, i)) << ','
       << format_double(r.per_mode_bound) << '\n';
  }
  return os.str();
}

inline std::string csv_bounds_header() { return "d,N,kappa,mu,sep_bound,ghz_bound,ratio\n"; }

inline std::string csv_row(const BoundComparison& b) {
  std::ostringstream os;
  os << b.d << ',' << b.particles << ',' << format_double(b.kappa) << ',' << b.repeats << ','
     << format_double(b.separable_bound) << ',' << format_double(b.ghz_bound) << ',' << format_double(b.ratio) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

inline void require_keys(const Json& j, const std::string& path, const std::set<std::string>& allowed,
                         const std::set<std::string>& required) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(path + "." + it.key() + ": unknown field");
  }
  for (const auto& k : required) {
    if (!j.contains(k)) throw ConfigError(path + "." + k + ": missing required field");
  }
}

inline double number_at(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + ": expected a finite number");
  return x;
}

inline std::size_t count_at(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(path + ": expected a non-negative integer");
  return j.get<std::size_t>();
}

inline cplx complex_at(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path + ": expected a [re, im] pair");
  return {number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]")};
}

inline Layout layout_at(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of dimensions");
  Layout l;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::size_t d = count_at(j[i], path + "[" + std::to_string(i) + "]");
    if (d == 0) throw ConfigError(path + "[" + std::to_string(i) + "]: dimensions must be positive");
    l.push_back(d);
  }
  return l;
}

}  // namespace detail

/// Parses JSON text; syntax errors report line:column within `source`.
inline Json parse_text(const std::string& text, const std::string& source = "<input>") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(source + ":" + detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + msg);
  }
}

inline Json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

/// Square complex matrix from the [re, im] row format.
inline ComplexMatrix parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of rows");
  const std::size_t n = j.size();
  check_dimension(n, path.c_str());
  ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != n) {
      throw ConfigError(rp + ": expected a row of " + std::to_string(n) + " entries");
    }
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          detail::complex_at(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

inline HermitianOperator parse_hermitian(const Json& j, const std::string& path) {
  try {
    return HermitianOperator(parse_matrix(j, path));
  } catch (const HermiticityError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// { "sensors": [ { "dim": int, "generators": [matrix...], "resource": matrix } ... ] }
inline SensorNetwork parse_network(const Json& j) {
  detail::require_keys(j, "$", {"sensors"}, {"sensors"});
  const Json& list = j["sensors"];
  if (!list.is_array() || list.empty()) throw ConfigError("$.sensors: expected a non-empty array");
  std::vector<SensorSpec> sensors;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string p = "$.sensors[" + std::to_string(k) + "]";
    detail::require_keys(list[k], p, {"dim", "generators", "resource"}, {"dim", "generators", "resource"});
    const std::size_t dim = detail::count_at(list[k]["dim"], p + ".dim");
    if (dim == 0) throw ConfigError(p + ".dim: must be positive");
    const Json& gl = list[k]["generators"];
    if (!gl.is_array()) throw ConfigError(p + ".generators: expected an array");
    std::vector<HermitianOperator> gens;
    for (std::size_t g = 0; g < gl.size(); ++g) {
      const std::string gp = p + ".generators[" + std::to_string(g) + "]";
      HermitianOperator h = parse_hermitian(gl[g], gp);
      if (h.dim() != dim) {
        throw ConfigError(gp + ": dimension " + std::to_string(h.dim()) + " does not match dim " + std::to_string(dim));
      }
      gens.push_back(std::move(h));
    }
    HermitianOperator r = parse_hermitian(list[k]["resource"], p + ".resource");
    if (r.dim() != dim) {
      throw ConfigError(p + ".resource: dimension " + std::to_string(r.dim()) + " does not match dim " + std::to_string(dim));
    }
    sensors.emplace_back(dim, std::move(gens), std::move(r));
  }
  try {
    return SensorNetwork(std::move(sensors));
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("$.sensors: ") + e.what());
  }
}

inline Json network_to_json(const SensorNetwork& net) {
  Json sensors = Json::array();
  for (const auto& s : net.sensors()) {
    Json gens = Json::array();
    for (const auto& g : s.generators()) gens.push_back(complex_to_json(g.matrix()));
    sensors.push_back(Json{{"dim", s.local_dim()}, {"generators", std::move(gens)}, {"resource", complex_to_json(s.resource().matrix())}});
  }
  return Json{{"sensors", std::move(sensors)}};
}

using State = std::variant<PureState, DensityOperator>;

/// { "layout": [dims], "amplitudes": [[re, im], ...] } or
/// { "layout": [dims], "density": matrix }. Amplitudes are normalised only when
/// "normalize": true is given.
inline State parse_state(const Json& j) {
  detail::require_keys(j, "$", {"layout", "amplitudes", "density", "normalize"}, {"layout"});
  const Layout layout = detail::layout_at(j["layout"], "$.layout");
  std::size_t dim = 0;
  try {
    dim = layout_dimension(layout);
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("$.layout: ") + e.what());
  }
  const bool normalize = j.contains("normalize") && j["normalize"].is_boolean() && j["normalize"].get<bool>();
  if (j.contains("normalize") && !j["normalize"].is_boolean()) throw ConfigError("$.normalize: expected a boolean");
  if (j.contains("amplitudes") == j.contains("density")) {
    throw ConfigError("$: exactly one of \"amplitudes\" or \"density\" is required");
  }
  try {
    if (j.contains("amplitudes")) {
      const Json& a = j["amplitudes"];
      if (!a.is_array() || a.size() != dim) {
        throw ConfigError("$.amplitudes: expected " + std::to_string(dim) + " entries for layout dimension " + std::to_string(dim));
      }
      ComplexVector v(static_cast<Eigen::Index>(dim));
      for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i)) = detail::complex_at(a[i], "$.amplitudes[" + std::to_string(i) + "]");
      return normalize ? PureState::normalized(std::move(v), layout) : PureState(std::move(v), layout);
    }
    ComplexMatrix m = parse_matrix(j["density"], "$.density");
    if (static_cast<std::size_t>(m.rows()) != dim) {
      throw ConfigError("$.density: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.rows()) +
                        " but the layout dimension is " + std::to_string(dim));
    }
    return normalize ? DensityOperator::normalized(std::move(m), layout) : DensityOperator(std::move(m), layout);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("$: ") + e.what());
  }
}

inline Json state_to_json(const PureState& psi) {
  Json amps = Json::array();
  for (Eigen::Index i = 0; i < psi.amplitudes().size(); ++i) {
    amps.push_back(Json::array({psi.amplitudes()(i).real(), psi.amplitudes()(i).imag()}));
  }
  return Json{{"layout", psi.layout()}, {"amplitudes", std::move(amps)}};
}

inline Json state_to_json(const DensityOperator& rho) {
  return Json{{"layout", rho.layout()}, {"density", complex_to_json(rho.matrix())}};
}

/// Overlays a JSON scenario config on the defaults for its id. `fallback_id`
/// is used when the file has no "id".
inline ScenarioConfig parse_config(const Json& j, const std::string& fallback_id) {
  detail::require_keys(j, "$",
                       {"id", "seed", "trials", "min_sensors", "max_sensors", "min_local_dim", "max_local_dim",
                        "max_parameters", "particles", "modes", "cutoff", "repeats", "tolerance",
                        "product_tolerance", "equality_tolerance"},
                       {});
  std::string id = fallback_id;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw ConfigError("$.id: expected a string");
    id = j["id"].get<std::string>();
    if (!fallback_id.empty() && id != fallback_id) {
      throw ConfigError("$.id: config is for '" + id + "' but '" + fallback_id + "' was requested");
    }
  }
  ScenarioConfig c = ScenarioConfig::defaults(id);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("$.seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  const auto count = [&](const char* key, std::size_t& dst) {
    if (j.contains(key)) dst = detail::count_at(j[key], std::string("$.") + key);
  };
  count("trials", c.trials);
  count("min_sensors", c.min_sensors);
  count("max_sensors", c.max_sensors);
  count("min_local_dim", c.min_local_dim);
  count("max_local_dim", c.max_local_dim);
  count("max_parameters", c.max_parameters);
  count("particles", c.particles);
  count("modes", c.modes);
  count("cutoff", c.cutoff);
  count("repeats", c.repeats);
  const auto real = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = detail::number_at(j[key], std::string("$.") + key);
  };
  real("tolerance", c.tolerance);
  real("product_tolerance", c.product_tolerance);
  real("equality_tolerance", c.equality_tolerance);
  c.validate();
  return c;
}

}  // namespace qsn::io
