#pragma once

/// \file
/// Scenario files (YAML), the scenario runner and its reports (JSON and an
/// aligned text table).

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "finslerlab/hypersurface.hpp"
#include "finslerlab/sampling.hpp"

namespace finslerlab {

/// Maximum spread of an HFULL residual across free-slot draws.
inline constexpr double kDrawInvariance = 1e-8;

struct HVectorConfig {
  HVectorMode mode = HVectorMode::function_of_x;
  double rho = 0.0;
  bool rho_fitted = false;
  std::vector<BaseField> c;
  Vec b;
  Mat E;
  Mat F;
  Vec rho_k;
  bool gradient = false;
  bool tangent = false;
  int draws = 1;
  double slot_scale = 0.5;
};

struct SamplePlan {
  int points = 20;
  SampleBox box;
  double u_lo = -0.5;
  double u_hi = 0.5;
  double v_lo = -1.0;
  double v_hi = 1.0;
  /// Samples need beta > min_beta * L.
  double min_beta = 0.2;
  double max_stretch = 20.0;
};

struct Scenario {
  std::string name;
  std::string description;
  int dimension = 0;
  std::uint64_t seed = 1;
  std::string metric_family;
  MetricSpec metric;
  std::optional<HVectorConfig> hvector;
  std::optional<HypersurfaceSpec> surface;
  std::vector<Tag> regime;
  SamplePlan plan;
  Tolerances tol;
  /// Resolved equation IDs, in registry order.
  std::vector<std::string> selection;
};

struct ScenarioRecord {
  IdentityReport report;
  int sample = -1;
  Vec u;
  Vec v;
  std::string context;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  Tolerances tol;
  int dimension = 0;
  std::string metric_family;
  std::string hvector_mode;
  std::string surface;
  std::vector<Tag> regime;
  int draws = 0;
  std::vector<ScenarioRecord> records;

  [[nodiscard]] int count(Verdict v) const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [v](const ScenarioRecord& r) { return r.report.verdict == v; }));
  }
  [[nodiscard]] bool passed() const { return count(Verdict::fail) == 0; }
};

/// Expands IDs and tag names to registry IDs; unknown names are errors.
inline std::vector<std::string> resolve_selection(const std::vector<std::string>& names, int line = -1) {
  std::set<std::string> chosen;
  for (const auto& name : names) {
    if (find_entry(name)) {
      chosen.insert(name);
      continue;
    }
    const auto tag = tag_from_string(name);
    if (!tag) throw ConfigError("unknown equation id or tag \"" + name + "\"", line);
    for (const auto& e : registry())
      if (std::find(e.tags.begin(), e.tags.end(), *tag) != e.tags.end()) chosen.insert(e.id);
  }
  std::vector<std::string> out;
  for (const auto& e : registry())
    if (chosen.count(e.id)) out.push_back(e.id);
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

namespace detail {

inline int line_of(const YAML::Node& node) { return node.Mark().line; }

[[noreturn]] inline void config_fail(const YAML::Node& node, const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what, line_of(node));
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) config_fail(node, field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    config_fail(node, field, "cannot read \"" + node.Scalar() + "\"");
  }
}

template <class T>
T scalar_or(const YAML::Node& parent, const std::string& key, const std::string& field, T fallback) {
  const auto node = parent[key];
  return node ? scalar<T>(node, field + "." + key) : fallback;
}

inline Vec vec(const YAML::Node& node, const std::string& field, int n) {
  if (!node.IsSequence()) config_fail(node, field, "expected a list");
  if (n >= 0 && static_cast<int>(node.size()) != n) {
    config_fail(node, field, "expected " + std::to_string(n) + " entries, got " + std::to_string(node.size()));
  }
  Vec out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(scalar<double>(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline Mat mat(const YAML::Node& node, const std::string& field, int n) {
  if (!node.IsSequence() || static_cast<int>(node.size()) != n) {
    config_fail(node, field, "expected " + std::to_string(n) + " rows");
  }
  Mat out = zeros(n, n);
  for (int i = 0; i < n; ++i) {
    const Vec row = vec(node[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]", n);
    for (int j = 0; j < n; ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

inline Polynomial poly(const YAML::Node& node, const std::string& field, int nvars) {
  const auto text = scalar<std::string>(node, field);
  try {
    return Polynomial::parse(text, nvars);
  } catch (const ConfigError& e) {
    config_fail(node, field, e.what());
  }
}

inline std::vector<Polynomial> poly_list(const YAML::Node& node, const std::string& field, int n, int nvars) {
  if (!node.IsSequence() || (n >= 0 && static_cast<int>(node.size()) != n)) {
    config_fail(node, field, "expected a list of " + std::to_string(n) + " polynomials");
  }
  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(poly(node[i], field + "[" + std::to_string(i) + "]", nvars));
  return out;
}

inline MatrixField matrix_field(const YAML::Node& node, const std::string& field, int n) {
  if (!node || (node.IsScalar() && node.Scalar() == "sample")) return sample_riemannian_field(n);
  if (!node.IsSequence() || static_cast<int>(node.size()) != n) {
    config_fail(node, field, "expected " + std::to_string(n) + " rows or \"sample\"");
  }
  std::vector<std::vector<Polynomial>> rows;
  for (int i = 0; i < n; ++i)
    rows.push_back(poly_list(node[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]", n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].terms() !=
          rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].terms()) {
        config_fail(node, field, "matrix field must be symmetric");
      }
  return polynomial_matrix(rows);
}

inline std::vector<BaseField> covector_field(const YAML::Node& node, const std::string& field, int n,
                                             double sample_scale) {
  if (!node || (node.IsScalar() && node.Scalar() == "sample")) return sample_one_form(n, sample_scale);
  return polynomial_covector(poly_list(node, field, n, n));
}

inline MetricSpec parse_metric(const YAML::Node& node, int n, std::string& family) {
  if (!node || !node.IsMap()) config_fail(node, "metric", "expected a mapping");
  family = scalar<std::string>(node["family"], "metric.family");
  if (family == "euclidean") return euclidean_metric(n);
  if (family == "riemannian") return riemannian_metric(matrix_field(node["a"], "metric.a", n));
  if (family == "randers") {
    return randers_metric(matrix_field(node["a"], "metric.a", n), covector_field(node["d"], "metric.d", n, 0.3));
  }
  if (family == "kropina") {
    return kropina_metric(matrix_field(node["a"], "metric.a", n), covector_field(node["d"], "metric.d", n, 1.0));
  }
  if (family == "quartic") {
    return quartic_metric(n, scalar_or(node, "eps0", "metric", 0.3), scalar_or(node, "eps1", "metric", 0.1));
  }
  config_fail(node["family"], "metric.family",
              "unknown family \"" + family + "\" (euclidean, riemannian, randers, kropina, quartic)");
}

inline HVectorConfig parse_hvector(const YAML::Node& node, int n) {
  if (!node.IsMap()) config_fail(node, "hvector", "expected a mapping");
  HVectorConfig h;
  const auto mode = scalar<std::string>(node["mode"], "hvector.mode");
  if (mode == "function_of_x") {
    h.mode = HVectorMode::function_of_x;
  } else if (mode == "explicit_family") {
    h.mode = HVectorMode::explicit_family;
  } else if (mode == "constrained") {
    h.mode = HVectorMode::constrained_jet;
  } else {
    config_fail(node["mode"], "hvector.mode", "unknown mode \"" + mode + "\" (function_of_x, explicit_family, constrained)");
  }
  if (const auto r = node["rho"]) {
    if (r.IsScalar() && r.Scalar() == "fitted") {
      if (h.mode != HVectorMode::constrained_jet) config_fail(r, "hvector.rho", "\"fitted\" needs constrained mode");
      h.rho_fitted = true;
    } else {
      h.rho = scalar<double>(r, "hvector.rho");
    }
  }
  if (h.mode == HVectorMode::function_of_x && h.rho != 0.0) {
    config_fail(node["rho"], "hvector.rho", "function_of_x has rho = 0");
  }
  if (h.mode != HVectorMode::constrained_jet) {
    if (!node["c"]) config_fail(node, "hvector.c", "missing");
    h.c = polynomial_covector(poly_list(node["c"], "hvector.c", n, n));
    return h;
  }
  if (!node["b"]) config_fail(node, "hvector.b", "missing");
  h.b = vec(node["b"], "hvector.b", n);
  h.E = node["E"] ? mat(node["E"], "hvector.E", n) : zeros(n, n);
  h.F = node["F"] ? mat(node["F"], "hvector.F", n) : zeros(n, n);
  h.rho_k = node["rho_k"] ? vec(node["rho_k"], "hvector.rho_k", n) : Vec(static_cast<std::size_t>(n), 0.0);
  h.gradient = scalar_or(node, "gradient", "hvector", false);
  h.tangent = scalar_or(node, "tangent", "hvector", false);
  h.draws = scalar_or(node, "draws", "hvector", 1);
  h.slot_scale = scalar_or(node, "slot_scale", "hvector", 0.5);
  if (h.draws < 1) config_fail(node["draws"], "hvector.draws", "must be at least 1");
  const double scale = 1.0 + norm_inf(h.E) + norm_inf(h.F);
  if (max_abs_diff(h.E, transpose(h.E)) > 1e-12 * scale) config_fail(node["E"], "hvector.E", "must be symmetric");
  if (max_abs_diff(h.F, -1.0 * transpose(h.F)) > 1e-12 * scale) {
    config_fail(node["F"], "hvector.F", "must be antisymmetric");
  }
  return h;
}

inline HypersurfaceSpec parse_surface(const YAML::Node& node, int n) {
  if (!node.IsMap()) config_fail(node, "hypersurface", "expected a mapping");
  const auto kind = scalar<std::string>(node["kind"], "hypersurface.kind");
  if (kind == "hyperplane") {
    const int axis = scalar_or(node, "axis", "hypersurface", n);
    if (axis < 1 || axis > n) config_fail(node["axis"], "hypersurface.axis", "must lie in 1.." + std::to_string(n));
    return hyperplane(n, axis - 1, scalar_or(node, "offset", "hypersurface", 0.0));
  }
  if (kind == "sphere") {
    const double radius = scalar_or(node, "radius", "hypersurface", 1.0);
    if (!(radius > 0.0)) config_fail(node["radius"], "hypersurface.radius", "must be positive");
    return sphere(n, radius, node["center"] ? vec(node["center"], "hypersurface.center", n) : Vec{});
  }
  if (kind == "graph") {
    if (!node["f"]) config_fail(node, "hypersurface.f", "missing");
    return graph(n, poly(node["f"], "hypersurface.f", n - 1));
  }
  if (kind == "polynomial") {
    if (!node["map"]) config_fail(node, "hypersurface.map", "missing");
    return polynomial_map(poly_list(node["map"], "hypersurface.map", n, n - 1));
  }
  config_fail(node["kind"], "hypersurface.kind", "unknown kind \"" + kind + "\" (hyperplane, sphere, graph, polynomial)");
}

inline std::pair<double, double> range(const YAML::Node& node, const std::string& field, std::pair<double, double> d) {
  if (!node) return d;
  const Vec r = vec(node, field, 2);
  if (!(r[0] < r[1])) config_fail(node, field, "lower bound must be below upper bound");
  return {r[0], r[1]};
}

inline void check_keys(const YAML::Node& node, const std::string& field, const std::set<std::string>& allowed) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) config_fail(kv.first, field.empty() ? key : field + "." + key, "unknown field");
  }
}

}  // namespace detail

struct Requirements {
  bool hvector = false;
  bool surface = false;
};

/// Blocks a scenario needs before an equation can be checked.
inline Requirements requirements(const std::string& id) {
  if (id.rfind("base.", 0) == 0 || id == "3.5") return {false, false};
  if (id.rfind("2.", 0) == 0 || id.rfind("L2.", 0) == 0 || id == "4.4") return {false, true};
  if (id.rfind("3.", 0) == 0 || id == "L3.5" || id == "4.36") return {true, false};
  return {true, true};
}

/// Parses and validates a scenario document.
inline Scenario parse_scenario(const YAML::Node& root) {
  using namespace detail;
  if (!root.IsMap()) throw ConfigError("scenario must be a mapping", line_of(root));
  check_keys(root, "", {"name", "description", "dimension", "seed", "metric", "hvector", "hypersurface", "regime",
                        "sample", "tolerances", "select"});
  Scenario sc;
  if (!root["name"]) throw ConfigError("name: missing");
  sc.name = scalar<std::string>(root["name"], "name");
  sc.description = scalar_or<std::string>(root, "description", "", "");
  if (!root["dimension"]) throw ConfigError("dimension: missing");
  sc.dimension = scalar<int>(root["dimension"], "dimension");
  if (sc.dimension < 2 || sc.dimension > 4) config_fail(root["dimension"], "dimension", "must lie in 2..4");
  sc.seed = scalar_or<std::uint64_t>(root, "seed", "", 1);
  const int n = sc.dimension;
  if (!root["metric"]) throw ConfigError("metric: missing");
  check_keys(root["metric"], "metric", {"family", "a", "d", "eps0", "eps1"});
  sc.metric = parse_metric(root["metric"], n, sc.metric_family);
  if (root["hvector"]) {
    check_keys(root["hvector"], "hvector",
               {"mode", "rho", "c", "b", "E", "F", "rho_k", "gradient", "tangent", "draws", "slot_scale"});
    sc.hvector = parse_hvector(root["hvector"], n);
  }
  if (root["hypersurface"]) {
    check_keys(root["hypersurface"], "hypersurface", {"kind", "axis", "offset", "radius", "center", "f", "map"});
    sc.surface = parse_surface(root["hypersurface"], n);
  }
  if (sc.hvector && sc.hvector->tangent && !sc.surface) {
    config_fail(root["hvector"]["tangent"], "hvector.tangent", "needs a hypersurface");
  }
  if (const auto r = root["regime"]) {
    if (!r.IsSequence()) config_fail(r, "regime", "expected a list of tags");
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto name = scalar<std::string>(r[i], "regime");
      const auto tag = tag_from_string(name);
      if (!tag) config_fail(r[i], "regime", "unknown tag \"" + name + "\"");
      sc.regime.push_back(*tag);
    }
  }
  auto declared = [&](Tag t) { return std::find(sc.regime.begin(), sc.regime.end(), t) != sc.regime.end(); };
  for (Tag t : sc.regime) {
    if (t != Tag::NONE && t != Tag::LANDSBERG && !sc.hvector) {
      config_fail(root["regime"], "regime", "tag " + to_string(t) + " needs an hvector block");
    }
  }
  if ((declared(Tag::TANGENT) || declared(Tag::FIRSTKIND) || declared(Tag::COND428)) && !sc.surface) {
    config_fail(root["regime"], "regime", "TANGENT, FIRSTKIND and COND428 need a hypersurface");
  }
  if ((declared(Tag::FIRSTKIND) || declared(Tag::COND428)) && !declared(Tag::TANGENT)) {
    config_fail(root["regime"], "regime", "FIRSTKIND and COND428 need TANGENT");
  }
  if (sc.hvector && sc.hvector->mode == HVectorMode::constrained_jet) {
    const auto& h = *sc.hvector;
    const YAML::Node hv = root["hvector"];
    if (declared(Tag::PARALLEL) && (norm_inf(h.E) != 0.0 || norm_inf(h.F) != 0.0 || norm_inf(h.rho_k) != 0.0)) {
      config_fail(hv, "regime", "PARALLEL requires E = F = 0 and rho_k = 0");
    }
    if ((declared(Tag::GRADIENT) || h.gradient) && (norm_inf(h.F) != 0.0 || norm_inf(h.rho_k) != 0.0)) {
      config_fail(hv, "regime", "GRADIENT requires F = 0 and rho_k = 0");
    }
    if (declared(Tag::RHO0) && (h.rho_fitted || h.rho != 0.0)) config_fail(hv, "regime", "RHO0 requires rho = 0");
    if (declared(Tag::PARALLEL) || declared(Tag::GRADIENT)) sc.hvector->gradient = true;
  }
  if (declared(Tag::RHO0) && sc.hvector && sc.hvector->rho != 0.0) {
    config_fail(root["hvector"], "regime", "RHO0 requires rho = 0");
  }
  if (const auto s = root["sample"]) {
    check_keys(s, "sample", {"points", "x", "y", "u", "v", "min_beta", "max_stretch"});
    sc.plan.points = scalar_or(s, "points", "sample", sc.plan.points);
    if (sc.plan.points < 1 || sc.plan.points > 1000) config_fail(s["points"], "sample.points", "must lie in 1..1000");
    std::tie(sc.plan.box.x_lo, sc.plan.box.x_hi) = range(s["x"], "sample.x", {sc.plan.box.x_lo, sc.plan.box.x_hi});
    std::tie(sc.plan.box.y_lo, sc.plan.box.y_hi) = range(s["y"], "sample.y", {sc.plan.box.y_lo, sc.plan.box.y_hi});
    std::tie(sc.plan.u_lo, sc.plan.u_hi) = range(s["u"], "sample.u", {sc.plan.u_lo, sc.plan.u_hi});
    std::tie(sc.plan.v_lo, sc.plan.v_hi) = range(s["v"], "sample.v", {sc.plan.v_lo, sc.plan.v_hi});
    sc.plan.min_beta = scalar_or(s, "min_beta", "sample", sc.plan.min_beta);
    sc.plan.max_stretch = scalar_or(s, "max_stretch", "sample", sc.plan.max_stretch);
  }
  if (const auto t = root["tolerances"]) {
    check_keys(t, "tolerances", {"pure", "connection", "finite_difference", "zero"});
    sc.tol.pure = scalar_or(t, "pure", "tolerances", sc.tol.pure);
    sc.tol.connection = scalar_or(t, "connection", "tolerances", sc.tol.connection);
    sc.tol.finite_difference = scalar_or(t, "finite_difference", "tolerances", sc.tol.finite_difference);
    sc.tol.zero = scalar_or(t, "zero", "tolerances", sc.tol.zero);
  }
  std::vector<std::string> names;
  if (const auto s = root["select"]) {
    if (!s.IsSequence()) config_fail(s, "select", "expected a list of equation ids or tags");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto name = scalar<std::string>(s[i], "select");
      if (!find_entry(name) && !tag_from_string(name)) {
        config_fail(s[i], "select", "unknown equation id or tag \"" + name + "\"");
      }
      names.push_back(name);
    }
    sc.selection = resolve_selection(names);
    for (const auto& id : sc.selection) {
      const auto need = requirements(id);
      const bool explicit_id = std::find(names.begin(), names.end(), id) != names.end();
      if (explicit_id && need.hvector && !sc.hvector) config_fail(s, "select", id + " needs an hvector block");
      if (explicit_id && need.surface && !sc.surface) config_fail(s, "select", id + " needs a hypersurface block");
    }
  } else {
    for (const auto& e : registry()) sc.selection.push_back(e.id);
  }
  std::erase_if(sc.selection, [&](const std::string& id) {
    const auto need = requirements(id);
    return (need.hvector && !sc.hvector) || (need.surface && !sc.surface);
  });
  return sc;
}

inline Scenario parse_scenario_text(const std::string& text) {
  try {
    return parse_scenario(YAML::Load(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("YAML syntax: " + e.msg, e.mark.line);
  }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.filename().string() + ": " + e.what());
  }
}

/// Error raised while evaluating a scenario sample; the message names the
/// sample and point.
class ScenarioRuntimeError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string point_text(const PointState& p) {
  std::ostringstream os;
  os << std::setprecision(6) << "x=(";
  for (std::size_t i = 0; i < p.x.size(); ++i) os << (i ? ", " : "") << p.x[i];
  os << ") y=(";
  for (std::size_t i = 0; i < p.y.size(); ++i) os << (i ? ", " : "") << p.y[i];
  return os.str() + ")";
}

struct SamplePoint {
  PointState p;
  Vec u;
  Vec v;
};

class Runner {
 public:
  Runner(const Scenario& sc, int jobs) : sc_(sc), jobs_(std::max(1, jobs)) {
    for (const auto& id : sc.selection) selected_.insert(id);
    if (sc.hvector && sc.hvector->mode != HVectorMode::constrained_jet) {
      HVectorSpec h = sc.hvector->mode == HVectorMode::function_of_x
                          ? HVectorSpec::function_of_x(sc.hvector->c)
                          : HVectorSpec::explicit_family(sc.hvector->rho, sc.hvector->c);
      fixed_ = kropina_change(sc.metric, h);
    }
  }

  RunReport run() {
    RunReport out;
    out.scenario = sc_.name;
    out.seed = sc_.seed;
    out.tol = sc_.tol;
    out.dimension = sc_.dimension;
    out.metric_family = sc_.metric_family;
    out.hvector_mode = sc_.hvector ? to_string(sc_.hvector->mode) : "none";
    out.surface = sc_.surface ? sc_.surface->label : "none";
    out.regime = sc_.regime;
    out.draws = sc_.hvector && sc_.hvector->mode == HVectorMode::constrained_jet ? sc_.hvector->draws : 0;

    const auto samples = draw_samples();
    std::vector<std::vector<ScenarioRecord>> per_sample(samples.size());
    std::vector<std::string> errors(samples.size());
    auto work = [&](std::size_t begin) {
      for (std::size_t i = begin; i < samples.size(); i += static_cast<std::size_t>(jobs_)) {
        try {
          per_sample[i] = evaluate_sample(static_cast<int>(i), samples[i]);
        } catch (const Error& e) {
          errors[i] = "sample " + std::to_string(i) + " at " + point_text(samples[i].p) + ": " + e.what();
        }
      }
    };
    std::vector<std::future<void>> pool;
    for (int j = 0; j < jobs_; ++j) pool.push_back(std::async(std::launch::async, work, static_cast<std::size_t>(j)));
    for (auto& f : pool) f.get();
    for (const auto& e : errors)
      if (!e.empty()) throw ScenarioRuntimeError(e);
    for (auto& rs : per_sample)
      for (auto& r : rs) out.records.push_back(std::move(r));
    if (sc_.surface && any_of({"L2.1", "L2.3"})) classification(samples, out.records);

    std::map<std::string, int> order;
    for (std::size_t i = 0; i < registry().size(); ++i) order[registry()[i].id] = static_cast<int>(i);
    std::stable_sort(out.records.begin(), out.records.end(), [&](const ScenarioRecord& a, const ScenarioRecord& b) {
      const int oa = order[a.report.equation_id], ob = order[b.report.equation_id];
      if (oa != ob) return oa < ob;
      if (a.sample != b.sample) return a.sample < b.sample;
      return a.context < b.context;
    });
    return out;
  }

 private:
  const Scenario& sc_;
  int jobs_;
  std::set<std::string> selected_;
  std::optional<ChangedSpace> fixed_;

  bool wants(const std::string& id) const { return selected_.count(id) > 0; }
  bool any_of(std::initializer_list<const char*> ids) const {
    return std::any_of(ids.begin(), ids.end(), [&](const char* id) { return wants(id); });
  }
  bool constrained() const { return sc_.hvector && sc_.hvector->mode == HVectorMode::constrained_jet; }

  /// Constrained input anchored at p with zero free slots.
  ConstrainedJetInput jet_input(const PointState& p, const std::optional<InducedGeometry>& ig) const {
    const auto& h = *sc_.hvector;
    ConstrainedJetInput in;
    in.anchor = p;
    in.b = h.b;
    if (h.tangent) in.b = project_tangent(h.b, ig->N_up, ig->N_low);
    in.E = h.E;
    in.F = h.F;
    in.rho_k = h.rho_k;
    in.gradient = h.gradient;
    in.rho = h.rho_fitted ? fitted_rho(sc_.metric, p, in.b) : h.rho;
    return in;
  }

  std::optional<ChangedSpace> space_at(const PointState& p, const std::optional<InducedGeometry>& ig) const {
    if (!sc_.hvector) return std::nullopt;
    if (!constrained()) return fixed_;
    return kropina_change(sc_.metric, HVectorSpec::constrained(jet_input(p, ig)));
  }

  bool admissible_sample(const PointState& p, const std::optional<InducedGeometry>& ig) const {
    if (!admissible(sc_.metric, p)) return false;
    if (!sc_.hvector) return true;
    try {
      const auto cs = space_at(p, ig);
      const auto st = evaluate(cs->h, cs->base, p);
      return st.s.beta > sc_.plan.min_beta * st.base.L && admissible(cs->starred, p, sc_.plan.max_stretch);
    } catch (const Error&) {
      return false;
    }
  }

  std::vector<SamplePoint> draw_samples() const {
    std::vector<SamplePoint> out;
    if (sc_.surface) {
      const auto& hs = *sc_.surface;
      auto accept = [&](const SurfaceSample& s) {
        try {
          const auto ig = induced_geometry(hs, sc_.metric, s.u, s.v);
          return admissible_sample(ig.point, ig);
        } catch (const Error&) {
          return false;
        }
      };
      for (const auto& s : sample_surface(hs, sc_.metric, sc_.seed, sc_.plan.points, sc_.plan.u_lo, sc_.plan.u_hi,
                                          sc_.plan.v_lo, sc_.plan.v_hi, accept)) {
        out.push_back({induced_geometry(hs, sc_.metric, s.u, s.v).point, s.u, s.v});
      }
      return out;
    }
    PointSampler sampler(sc_.dimension, sc_.seed, sc_.plan.box,
                         [&](const PointState& p) { return admissible_sample(p, std::nullopt); });
    for (int i = 0; i < sc_.plan.points; ++i) out.push_back({sampler.next(), {}, {}});
    return out;
  }

  void check_regime(const ChangedSpace& cs, const PointState& p, const StarredInduced* si) const {
    const auto st = evaluate(cs.h, cs.base, p);
    const auto flags = regime(st, sc_.tol.connection);
    for (Tag t : sc_.regime) {
      bool ok = true;
      switch (t) {
        case Tag::TANGENT: ok = si && si->tangent; break;
        case Tag::FIRSTKIND: ok = si && si->first_kind; break;
        case Tag::COND428: ok = si && si->cond428; break;
        case Tag::LANDSBERG: ok = landsberg_tensor(cs.base, p, sc_.tol.connection).is_landsberg; break;
        default: ok = satisfied(t, flags); break;
      }
      if (!ok) throw HypothesisConflictError("declared regime " + to_string(t) + " does not hold");
    }
  }

  /// Reports of the h-vector groups for one changed space.
  std::vector<ScenarioRecord> changed_reports(const ChangedSpace& cs, const SamplePoint& s) const {
    std::vector<IdentityReport> rs;
    const auto& p = s.p;
    auto take = [&](std::vector<IdentityReport> more) {
      for (auto& r : more)
        if (wants(r.equation_id) && r.equation_id != "3.5") rs.push_back(std::move(r));
    };
    std::optional<StarredInduced> si;
    if (sc_.surface) si = starred_geometry(*sc_.surface, cs, s.u, s.v, sc_.tol);
    check_regime(cs, p, si ? &*si : nullptr);
    if (any_of({"3.1", "3.2", "3.3", "3.4", "3.5", "3.6", "3.7"})) take(verify_changed_tensors(cs, p, sc_.tol));
    if (any_of({"3.8", "3.9", "3.10", "3.11"})) take(verify_connection_difference(cs, p, sc_.tol));
    if (wants("L3.5")) take({verify_parallel_lemma(cs, p, sc_.tol)});
    if (wants("4.36")) take({landsberg_condition_check(cs, p, sc_.tol)});
    if (si) {
      take(theorem_chain(*si, sc_.tol, sc_.regime));
      take(theorem_checks(*si, sc_.tol));
    }
    std::vector<ScenarioRecord> out;
    for (auto& r : rs) out.push_back({std::move(r), 0, s.u, s.v, "starred"});
    return out;
  }

  std::vector<ScenarioRecord> evaluate_sample(int index, const SamplePoint& s) const {
    std::vector<ScenarioRecord> out;
    const auto& p = s.p;
    auto push = [&](IdentityReport r, const std::string& ctx) {
      if (wants(r.equation_id)) out.push_back({std::move(r), index, s.u, s.v, ctx});
    };
    if (any_of({"base.euler", "base.homogeneity", "base.inverse", "base.h-metricity", "base.v-metricity"})) {
      for (auto& r : verify_base_space(sc_.metric, p, sc_.tol)) push(std::move(r), "base");
    }
    if (wants("3.5")) push(verify_angular_identity(geometry(sc_.metric, p), sc_.tol), "base");
    std::optional<InducedGeometry> ig;
    if (sc_.surface) {
      ig = induced_geometry(*sc_.surface, sc_.metric, s.u, s.v);
      for (auto& r : verify_induced(*ig, sc_.tol)) {
        if (r.equation_id == "4.4" && sc_.hvector) continue;
        push(std::move(r), "base");
      }
      if (wants("2.11")) push(verify_normal_derivative(*sc_.surface, sc_.metric, s.u, s.v, sc_.tol), "base");
    }
    if (!sc_.hvector) return finish(out, index);
    if (!constrained()) {
      for (auto& r : changed_reports(*fixed_, s)) push(std::move(r.report), r.context);
      return finish(out, index);
    }
    // Constrained jets: every draw of the free slots must give the same residuals.
    const auto& h = *sc_.hvector;
    std::seed_seq seq{static_cast<std::uint32_t>(sc_.seed), static_cast<std::uint32_t>(sc_.seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    const ConstrainedJetInput base_in = jet_input(p, ig);
    std::vector<ScenarioRecord> first;
    std::vector<double> spread;
    double f_lo = 0.0, f_hi = 0.0;
    for (int d = 0; d < h.draws; ++d) {
      ConstrainedJetInput in = base_in;
      randomize_free_slots(in, rng, h.slot_scale);
      const auto cs = kropina_change(sc_.metric, HVectorSpec::constrained(in));
      auto rs = changed_reports(cs, s);
      const double f = norm_inf(geometry(cs.starred, p).cartan);
      if (d == 0) {
        first = std::move(rs);
        spread.assign(first.size(), 0.0);
        f_lo = f_hi = f;
        continue;
      }
      f_lo = std::min(f_lo, f);
      f_hi = std::max(f_hi, f);
      if (rs.size() != first.size()) throw ScenarioRuntimeError("draws produced different report sets");
      for (std::size_t k = 0; k < rs.size(); ++k)
        spread[k] = std::max(spread[k], std::abs(rs[k].report.residual_inf - first[k].report.residual_inf));
    }
    for (std::size_t k = 0; k < first.size(); ++k) {
      auto& r = first[k].report;
      if (h.draws > 1) {
        r.aux["draw_spread"] = spread[k];
        r.aux["starred_cartan_spread"] = f_hi - f_lo;
        const bool hfull = std::find(r.tags.begin(), r.tags.end(), Tag::HFULL) != r.tags.end();
        if (hfull && r.hypotheses_met && spread[k] > kDrawInvariance) {
          r.verdict = Verdict::fail;
          r.note += (r.note.empty() ? "" : "; ") + std::string("residual depends on free slots");
        }
      }
      push(std::move(r), first[k].context);
    }
    return finish(out, index);
  }

  std::vector<ScenarioRecord> finish(std::vector<ScenarioRecord>& out, int index) const {
    for (auto& r : out) {
      r.sample = index;
      r.report.seed = sc_.seed;
    }
    return std::move(out);
  }

  void classification(const std::vector<SamplePoint>& samples, std::vector<ScenarioRecord>& out) const {
    std::vector<SurfaceSample> grid;
    for (const auto& s : samples) grid.push_back({s.u, s.v});
    auto emit = [&](const MetricSpec& m, const std::string& ctx) {
      const auto c = classify(*sc_.surface, m, grid, sc_.tol.connection);
      for (auto& r : verify_classification(c, samples.front().p)) {
        if (!wants(r.equation_id)) continue;
        r.seed = sc_.seed;
        r.note = ctx + " kind " + to_string(c.kind) + (r.note.empty() ? "" : "; " + r.note);
        out.push_back({std::move(r), -1, {}, {}, ctx});
      }
    };
    emit(sc_.metric, "base");
    if (fixed_) emit(fixed_->starred, "starred");
  }
};

}  // namespace detail

/// Runs every selected check of the scenario. `jobs` samples are evaluated
/// concurrently; the merged report does not depend on it.
inline RunReport run_scenario(const Scenario& sc, int jobs = 1) { return detail::Runner(sc, jobs).run(); }

inline RunReport run_scenario_file(const std::filesystem::path& path, int jobs = 1) {
  return run_scenario(load_scenario(path), jobs);
}

/// Aligned table of the registry: ID, hypothesis tags, description.
inline std::string list_registry() {
  std::size_t wid = 2, wtag = 4;
  std::vector<std::string> tags;
  for (const auto& e : registry()) {
    std::string t;
    for (Tag tag : e.tags) t += (t.empty() ? "" : ",") + to_string(tag);
    tags.push_back(t);
    wid = std::max(wid, e.id.size());
    wtag = std::max(wtag, t.size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(wid) + 2) << "id" << std::setw(static_cast<int>(wtag) + 2) << "tags"
     << "description\n";
  for (std::size_t i = 0; i < registry().size(); ++i) {
    os << std::setw(static_cast<int>(wid) + 2) << registry()[i].id << std::setw(static_cast<int>(wtag) + 2) << tags[i]
       << registry()[i].description << "\n";
  }
  return os.str();
}

inline nlohmann::ordered_json to_json(const RunReport& rr) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["scenario"] = rr.scenario;
  ordered_json env;
  env["seed"] = rr.seed;
  env["dimension"] = rr.dimension;
  env["metric"] = rr.metric_family;
  env["hvector"] = rr.hvector_mode;
  env["hypersurface"] = rr.surface;
  env["regime"] = ordered_json::array();
  for (Tag t : rr.regime) env["regime"].push_back(to_string(t));
  env["draws"] = rr.draws;
  env["tolerances"] = {{"pure", rr.tol.pure},
                       {"connection", rr.tol.connection},
                       {"finite_difference", rr.tol.finite_difference},
                       {"zero", rr.tol.zero}};
  env["caps"] = {{"tensors", {1, 3}}, {"berwald", {1, 4}}, {"surface", {2, 0}}};
  j["environment"] = env;
  j["summary"] = {{"total", rr.records.size()},
                  {"pass", rr.count(Verdict::pass)},
                  {"fail", rr.count(Verdict::fail)},
                  {"info", rr.count(Verdict::info)}};
  ordered_json reports = ordered_json::array();
  for (const auto& rec : rr.records) {
    const auto& r = rec.report;
    ordered_json o;
    o["id"] = r.equation_id;
    o["context"] = rec.context;
    o["sample"] = rec.sample;
    o["verdict"] = to_string(r.verdict);
    o["hypotheses_met"] = r.hypotheses_met;
    o["tags"] = ordered_json::array();
    for (Tag t : r.tags) o["tags"].push_back(to_string(t));
    o["residual_inf"] = r.residual_inf;
    o["residual_rel"] = r.residual_rel;
    o["tol"] = r.tol;
    o["abs_tol"] = r.abs_tol;
    if (rec.sample >= 0) o["point"] = {{"x", r.point.x}, {"y", r.point.y}};
    if (!rec.u.empty()) o["surface"] = {{"u", rec.u}, {"v", rec.v}};
    o["seed"] = r.seed;
    if (!r.aux.empty()) o["aux"] = r.aux;
    if (!r.note.empty()) o["note"] = r.note;
    reports.push_back(std::move(o));
  }
  j["reports"] = std::move(reports);
  return j;
}

inline std::string machine_report(const RunReport& rr) { return to_json(rr).dump(2) + "\n"; }

/// One row per equation ID and context: counts and worst residuals.
inline std::string human_report(const RunReport& rr) {
  struct Row {
    std::string id, context, tags;
    int pass = 0, fail = 0, info = 0;
    double worst_rel = 0.0, worst_inf = 0.0, tol = 0.0;
  };
  std::vector<Row> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& rec : rr.records) {
    const auto& r = rec.report;
    const auto key = std::make_pair(r.equation_id, rec.context);
    auto it = index.find(key);
    if (it == index.end()) {
      Row row;
      row.id = r.equation_id;
      row.context = rec.context;
      for (Tag t : r.tags) row.tags += (row.tags.empty() ? "" : ",") + to_string(t);
      row.tol = r.tol;
      it = index.emplace(key, rows.size()).first;
      rows.push_back(row);
    }
    auto& row = rows[it->second];
    (r.verdict == Verdict::pass ? row.pass : r.verdict == Verdict::fail ? row.fail : row.info) += 1;
    if (r.verdict != Verdict::info) {
      row.worst_rel = std::max(row.worst_rel, r.residual_rel);
      row.worst_inf = std::max(row.worst_inf, r.residual_inf);
    }
  }
  std::size_t wid = 2, wtag = 4;
  for (const auto& row : rows) {
    wid = std::max(wid, row.id.size());
    wtag = std::max(wtag, row.tags.size());
  }
  std::ostringstream os;
  os << "scenario " << rr.scenario << "  seed " << rr.seed << "  metric " << rr.metric_family << "  hvector "
     << rr.hvector_mode << "  hypersurface " << rr.surface << "\n\n";
  os << std::left << std::setw(static_cast<int>(wid) + 2) << "id" << std::setw(9) << "context"
     << std::setw(static_cast<int>(wtag) + 2) << "tags" << std::right << std::setw(6) << "pass" << std::setw(6)
     << "fail" << std::setw(6) << "info" << std::setw(12) << "max rel" << std::setw(12) << "max inf"
     << std::setw(10) << "tol" << "  verdict\n";
  os << std::scientific << std::setprecision(2);
  for (const auto& row : rows) {
    const char* verdict = row.fail ? "FAIL" : row.pass ? "pass" : "info";
    os << std::left << std::setw(static_cast<int>(wid) + 2) << row.id << std::setw(9) << row.context
       << std::setw(static_cast<int>(wtag) + 2) << row.tags << std::right << std::setw(6) << row.pass
       << std::setw(6) << row.fail << std::setw(6) << row.info << std::setw(12) << row.worst_rel << std::setw(12)
       << row.worst_inf << std::setw(10) << row.tol << "  " << verdict << "\n";
  }
  os << "\n" << rr.records.size() << " checks: " << rr.count(Verdict::pass) << " pass, " << rr.count(Verdict::fail)
     << " fail, " << rr.count(Verdict::info) << " info\n";
  return os.str();
}

}  // namespace finslerlab
