#pragma once

// Scenario-driven verification suites and residual reports.
//
// A scenario is a JSON document; see README.md for the keys. Every check
// returns a computed value, a reference and a residual, and passes when the
// residual is within its tolerance. Reports separate the deterministic body
// from wall-clock timing.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pathquant/chen.hpp"
#include "pathquant/errors.hpp"
#include "pathquant/geometry.hpp"
#include "pathquant/klein_gordon.hpp"
#include "pathquant/numerics.hpp"
#include "pathquant/path_space.hpp"
#include "pathquant/prequantum.hpp"

namespace pathquant {

using json = nlohmann::json;

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"poisson", "potential", "chen", "holonomy", "operators", "kg", "all"};
  return names;
}

struct Scenario {
  std::string suite = "all";
  std::string model = "r2";
  double radius = 1.0;
  double scale = 1.0;
  double hbar = 1.0;
  int N = 256;
  int S = 128;
  int sigma = 64;  // radial resolution of spanning surfaces
  double h = 1e-4;
  double eps = 1e-3;
  std::optional<std::uint64_t> seed;
  int draws = 20;
  std::map<std::string, double> tolerances;
  std::string output;
  std::string csv;
  json path = json::object();
  json loop = json::object();
  json kg = json::object();

  [[nodiscard]] bool randomized() const { return suite == "poisson" || suite == "kg" || suite == "all"; }
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

inline void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
      throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

inline void require_range(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
  using detail::get_or;
  detail::allow_keys(j,
                     {"suite", "model", "hbar", "grid", "seed", "draws", "tolerances", "output", "csv", "path", "loop",
                      "kg"},
                     "scenario");
  Scenario s;
  s.suite = get_or<std::string>(j, "suite", s.suite);
  if (j.contains("model")) {
    const auto& m = j.at("model");
    detail::allow_keys(m, {"name", "radius", "scale"}, "model");
    s.model = get_or<std::string>(m, "name", s.model);
    s.radius = get_or<double>(m, "radius", s.radius);
    // the torus defaults to total flux 2 pi, the smallest integral case
    s.scale = get_or<double>(m, "scale", s.model == "t2" ? 1.0 / kTwoPi : s.scale);
  }
  s.hbar = get_or<double>(j, "hbar", s.hbar);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::allow_keys(g, {"N", "S", "sigma", "h", "eps"}, "grid");
    s.N = get_or<int>(g, "N", s.N);
    s.S = get_or<int>(g, "S", s.S);
    s.sigma = get_or<int>(g, "sigma", s.sigma);
    s.h = get_or<double>(g, "h", s.h);
    s.eps = get_or<double>(g, "eps", s.eps);
  }
  if (j.contains("seed")) s.seed = get_or<std::uint64_t>(j, "seed", 0);
  s.draws = get_or<int>(j, "draws", s.draws);
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (!t.is_object()) throw ConfigError("tolerances must map check ids to numbers");
    for (const auto& [k, v] : t.items()) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError("tolerance for '" + k + "' must be positive");
      s.tolerances[k] = v.get<double>();
    }
  }
  s.output = get_or<std::string>(j, "output", "");
  s.csv = get_or<std::string>(j, "csv", "");
  if (j.contains("path")) s.path = j.at("path");
  if (j.contains("loop")) s.loop = j.at("loop");
  if (j.contains("kg")) s.kg = j.at("kg");

  using detail::require_range;
  require_range(s.model == "r2" || s.model == "t2" || s.model == "s2", "model.name must be r2, t2 or s2");
  require_range(s.radius > 0.0 && s.radius <= 100.0, "model.radius must lie in (0, 100]");
  require_range(s.scale > 0.0 && s.scale <= 100.0, "model.scale must lie in (0, 100]");
  require_range(s.hbar > 0.0 && s.hbar <= 1e3, "hbar must lie in (0, 1000]");
  require_range(s.N >= 8 && s.N <= 8192 && s.N % 2 == 0, "grid.N must be even and within [8, 8192]");
  require_range(s.S >= 16 && s.S <= 4096 && s.S % 2 == 0, "grid.S must be even and within [16, 4096]");
  require_range(s.sigma >= 8 && s.sigma <= 1024 && s.sigma % 2 == 0, "grid.sigma must be even and within [8, 1024]");
  require_range(s.h > 0.0 && s.h <= 0.25, "grid.h must lie in (0, 0.25]");
  require_range(s.eps > 0.0 && s.eps <= 0.1, "grid.eps must lie in (0, 0.1]");
  require_range(s.draws >= 1 && s.draws <= 10000, "draws must lie in [1, 10000]");
  if (s.randomized() && !s.seed) throw ConfigError("suite '" + s.suite + "' draws random data and needs a seed");
  return s;
}

inline Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open scenario file " + file);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

// ---------------------------------------------------------------------------
// Reports

struct CheckRecord {
  std::string id;
  std::string anchor;
  double value = 0.0;
  double reference = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double runtime_ms = 0.0;
  std::string error;
};

struct ResidualReport {
  std::string suite;
  std::vector<CheckRecord> checks;  // sorted by id

  [[nodiscard]] std::size_t passed() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.pass; }));
  }
  [[nodiscard]] std::size_t failed() const { return checks.size() - passed(); }

  /// Deterministic part of the report: everything except wall-clock timing.
  [[nodiscard]] json body() const {
    json arr = json::array();
    for (const auto& c : checks) {
      json r{{"id", c.id},         {"anchor", c.anchor},       {"value", c.value}, {"reference", c.reference},
             {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass}};
      if (!c.error.empty()) r["error"] = c.error;
      arr.push_back(std::move(r));
    }
    return json{{"suite", suite},
                {"checks", std::move(arr)},
                {"summary", {{"total", checks.size()}, {"passed", passed()}, {"failed", failed()}}}};
  }

  [[nodiscard]] json timing() const {
    json t = json::object();
    double total = 0.0;
    for (const auto& c : checks) {
      t[c.id] = c.runtime_ms;
      total += c.runtime_ms;
    }
    return json{{"runtime_ms", std::move(t)}, {"total_ms", total}};
  }

  [[nodiscard]] json to_json() const { return json{{"body", body()}, {"timing", timing()}}; }

  [[nodiscard]] std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "id,anchor,value,reference,residual,tolerance,pass,runtime_ms\n";
    for (const auto& c : checks)
      os << c.id << ",\"" << c.anchor << "\"," << c.value << ',' << c.reference << ',' << c.residual << ','
         << c.tolerance << ',' << (c.pass ? 1 : 0) << ',' << c.runtime_ms << '\n';
    return os.str();
  }
};

/// What a check computes; `residual` is compared against the tolerance.
struct Outcome {
  double value = 0.0;
  double reference = 0.0;
  double residual = 0.0;
};

inline Outcome compare(double value, double reference) { return {value, reference, std::abs(value - reference)}; }

struct CheckSpec {
  std::string id;
  std::string anchor;
  double tolerance = 1e-6;
  std::function<Outcome()> run;
};

/// Worker count from PATHQUANT_THREADS, else the hardware concurrency.
inline unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PATHQUANT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

/// Runs every check, recording exceptions as failures, and sorts by id.
inline ResidualReport run_checks(const std::string& suite, std::vector<CheckSpec> specs,
                                 const std::map<std::string, double>& overrides) {
  ResidualReport report{suite, std::vector<CheckRecord>(specs.size())};
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      const auto& s = specs[i];
      CheckRecord r;
      r.id = s.id;
      r.anchor = s.anchor;
      const auto it = overrides.find(s.id);
      r.tolerance = it != overrides.end() ? it->second : s.tolerance;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Outcome o = s.run();
        r.value = o.value;
        r.reference = o.reference;
        r.residual = o.residual;
        r.pass = std::isfinite(o.residual) && o.residual <= r.tolerance;
      } catch (const std::exception& e) {
        r.error = e.what();
        r.residual = std::numeric_limits<double>::infinity();
        r.pass = false;
      }
      r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      report.checks[i] = std::move(r);
    }
  };
  const unsigned n = std::min<unsigned>(thread_cap(), static_cast<unsigned>(std::max<std::size_t>(specs.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::sort(report.checks.begin(), report.checks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  // non-finite numbers are not representable in JSON
  for (auto& c : report.checks) {
    if (!std::isfinite(c.residual)) c.residual = std::numeric_limits<double>::max();
    if (!std::isfinite(c.value)) c.value = 0.0;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Scenario data

/// Stable per-check seed so results do not depend on scheduling.
inline std::uint64_t check_seed(const Scenario& sc, const std::string& id) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : id) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return h ^ sc.seed.value_or(0);
}

inline Vec json_vec(const json& j, const char* key, Vec fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != fallback.size()) throw ConfigError(std::string("'") + key + "' has the wrong length");
  return v;
}

/// Default test path on the scenario model, or the family given under "path".
inline DiscretePath scenario_path(const Scenario& sc, const SymplecticModel& model, const PathGrid& grid) {
  Point center{0.3, -0.2};
  Vec amp{0.8, 0.6};
  if (model.name == "s2") center = {kPi / 2, kPi}, amp = {0.6, 1.0};
  if (model.name == "t2") center = {kPi, kPi}, amp = {1.0, 1.2};
  const json& p = sc.path;
  const std::string family = detail::get_or<std::string>(p, "family", "lissajous");
  if (family == "lissajous") {
    detail::allow_keys(p, {"family", "center", "amplitude", "frequency", "phase"}, "path");
    return lissajous_path(model, grid, json_vec(p, "center", center), json_vec(p, "amplitude", amp),
                          json_vec(p, "frequency", {1.0, 2.0}), json_vec(p, "phase", {0.1, 0.4}));
  }
  if (family == "line") {
    detail::allow_keys(p, {"family", "from", "to"}, "path");
    return line_path(model, grid, json_vec(p, "from", center),
                     json_vec(p, "to", {center[0] + amp[0], center[1] + amp[1]}));
  }
  if (family == "circle") {
    detail::allow_keys(p, {"family", "center", "radius", "turns", "phase"}, "path");
    return circle_path(model, grid, json_vec(p, "center", center), detail::get_or<double>(p, "radius", 0.5),
                       detail::get_or<double>(p, "turns", 1.0), detail::get_or<double>(p, "phase", 0.0));
  }
  if (family == "nodes") {
    detail::allow_keys(p, {"family", "points"}, "path");
    const auto pts = p.at("points").get<std::vector<std::vector<double>>>();
    if (pts.size() != grid.nodes())
      throw ConfigError("explicit path has " + std::to_string(pts.size()) + " nodes, grid needs " +
                        std::to_string(grid.nodes()));
    return make_path(model, 0, grid, pts);
  }
  throw ConfigError("unknown path family '" + family + "'");
}

/// Randomly perturbed copy of the default Lissajous family for draw k.
inline DiscretePath random_path(const SymplecticModel& model, const PathGrid& grid, Rng& rng) {
  Point center{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
  Vec amp{rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9)};
  if (model.name == "s2") center = {kPi / 2 + rng.uniform(-0.3, 0.3), kPi + rng.uniform(-1, 1)}, amp = {0.5, 0.8};
  if (model.name == "t2") center = {kPi + rng.uniform(-0.5, 0.5), kPi + rng.uniform(-0.5, 0.5)}, amp = {1.0, 1.0};
  return lissajous_path(model, grid, center, amp, {1.0, static_cast<double>(rng.integer(1, 3))},
                        {rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi)});
}

inline PathTangent scenario_variation(const DiscretePath& path, int which) {
  return constant_tangent(path, which == 0 ? Vec{0.3, 0.7} : Vec{-0.5, 0.2});
}

struct CheckContext {
  Scenario sc;
  SymplecticModel model;
};

using CheckList = std::vector<CheckSpec>;

inline void add(CheckList& list, std::string id, std::string anchor, double tol, std::function<Outcome()> fn) {
  list.push_back({std::move(id), std::move(anchor), tol, std::move(fn)});
}

// ---------------------------------------------------------------------------
// Suites

inline CheckList poisson_checks(const CheckContext& ctx) {
  CheckList l;
  const auto sc = ctx.sc;
  const auto model = ctx.model;
  const auto r2 = make_r2();
  const auto x = coordinate_observable(0, "x");
  const auto y = coordinate_observable(1, "y");

  add(l, "poisson.bracket_xy", "base Poisson bracket {x,y}", 1e-12,
      [=] { return compare(poisson_bracket(r2, x, y, 0, {0.4, -1.3}), 1.0); });
  add(l, "poisson.hamiltonian_x", "Hamiltonian field of x", 1e-12, [=] {
    const auto X = hamiltonian_vector_field(r2, x, 0, {2.0, 3.0});
    return Outcome{X.components[1], 1.0, std::max(std::abs(X.components[0]), std::abs(X.components[1] - 1.0))};
  });
  add(l, "poisson.bracket_quadratic", "base Poisson bracket {x^2/2,y}", 1e-12, [=] {
    const auto f = polynomial_observable({{0.5, {2, 0}}}, "x2");
    return compare(poisson_bracket(r2, f, y, 0, {2.0, 3.0}), 2.0);
  });
  add(l, "poisson.jacobi", "Jacobi identity", 1e-6, [=] {
    Rng rng(check_seed(sc, "poisson.jacobi"));
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3), h = random_polynomial(rng, 2, 3);
      const Point p{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const double j = poisson_bracket(r2, f, bracket_observable(r2, g, h), 0, p) +
                       poisson_bracket(r2, g, bracket_observable(r2, h, f), 0, p) +
                       poisson_bracket(r2, h, bracket_observable(r2, f, g), 0, p);
      worst = std::max(worst, std::abs(j));
    }
    return Outcome{worst, 0.0, worst};
  });
  add(l, "poisson.bracket_contraction", "bracket as contraction i_{X_f} dg", 1e-10, [=] {
    Rng rng(check_seed(sc, "poisson.bracket_contraction"));
    const PathGrid grid(64);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3);
      const auto p = random_path(model, grid, rng).points[17];
      const double a = poisson_bracket(model, f, g, 0, p), b = poisson_bracket_contraction(model, f, g, 0, p);
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    return Outcome{worst, 0.0, worst};
  });
  add(l, "poisson.path_bracket_integral", "path-space bracket of integrated observables", 1e-6, [=] {
    Rng rng(check_seed(sc, "poisson.path_bracket_integral"));
    const PathGrid grid(sc.N);
    double worst = 0.0;
    for (int k = 0; k < sc.draws; ++k) {
      const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3);
      const auto path = random_path(model, grid, rng);
      const double lhs = poisson_tilde(model, PathObservable::tilde(f), PathObservable::tilde(g), path);
      const double rhs = eval_tilde(bracket_observable(model, f, g), path);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    return Outcome{worst, 0.0, worst};
  });
  add(l, "poisson.lift_product_closed_form", "Hamiltonian lift of a product", 1e-8, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 1.0});
    const auto lift = hamiltonian_lift(r2, PathObservable::tilde(x) * PathObservable::tilde(y), path);
    double worst = 0.0;
    for (const auto& v : lift.values) worst = std::max({worst, std::abs(v[0] + 0.5), std::abs(v[1] - 0.5)});
    return Outcome{lift.values[0][0], -0.5, worst};
  });
  add(l, "poisson.lift_contract", "defining contract of the Hamiltonian lift", 1e-6, [=] {
    Rng rng(check_seed(sc, "poisson.lift_contract"));
    const PathGrid grid(sc.N);
    double worst = 0.0;
    for (int k = 0; k < sc.draws; ++k) {
      const auto f = random_polynomial(rng, 2, 2), g = random_polynomial(rng, 2, 2);
      const auto phi = PathObservable::tilde(f) * PathObservable::tilde(g) + 0.5 * PathObservable::tilde(f) * PathObservable::tilde(f);
      const auto path = random_path(model, grid, rng);
      const auto w = constant_tangent(path, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
      const double r = omega_tilde(model, path, hamiltonian_lift(model, phi, path), w) + d_path_observable(model, phi, path, w);
      worst = std::max(worst, std::abs(r));
    }
    return Outcome{worst, 0.0, worst};
  });
  add(l, "poisson.product_law_closed_form", "product of two line integrals", 1e-10, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    const double r = product_law_residual(x, x, path);
    return Outcome{r, 0.0, r};
  });
  add(l, "poisson.product_law_random", "product of two line integrals", 1e-8, [=] {
    Rng rng(check_seed(sc, "poisson.product_law_random"));
    const PathGrid grid(sc.N);
    double worst = 0.0;
    for (int k = 0; k < sc.draws; ++k) {
      const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3);
      worst = std::max(worst, product_law_residual(f, g, random_path(r2, grid, rng)));
    }
    return Outcome{worst, 0.0, worst};
  });
  add(l, "poisson.product_law_model", "product of two line integrals", 1e-8, [=] {
    // relative to sup|f| sup|g| since chart coordinates on compact models reach 2 pi
    Rng rng(check_seed(sc, "poisson.product_law_model"));
    const PathGrid grid(sc.N);
    double worst = 0.0;
    for (int k = 0; k < sc.draws; ++k) {
      const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3);
      const auto path = random_path(model, grid, rng);
      auto sup = [&](const Observable& o) {
        const auto v = sample_observable(o, path);
        return norm_inf(v);
      };
      const double scale = std::max(1.0, sup(f) * sup(g));
      worst = std::max(worst, product_law_residual(f, g, path) / scale);
    }
    return Outcome{worst, 0.0, worst};
  });
  add(l, "poisson.d_tilde_directional", "de Rham differential of integrated observables", 1e-5, [=] {
    Rng rng(check_seed(sc, "poisson.d_tilde_directional"));
    const PathGrid grid(sc.N);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto f = random_polynomial(rng, 2, 3);
      const auto path = random_path(model, grid, rng);
      const auto v = constant_tangent(path, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
      const double e = 1e-4;
      const double fd = (eval_tilde(f, displace(model, path, v, e)) - eval_tilde(f, displace(model, path, v, -e))) / (2 * e);
      const double an = d_tilde(model, f, path, v);
      worst = std::max(worst, std::abs(fd - an) / std::max(1e-3, std::abs(an)));
    }
    return Outcome{worst, 0.0, worst};
  });
  add(l, "poisson.lie_bracket", "Lie bracket of lifted fields", 1e-3, [=] {
    // flow commutator is first order in eps; one Richardson step removes it
    Rng rng(check_seed(sc, "poisson.lie_bracket"));
    const PathGrid grid(32);
    const auto f = random_polynomial(rng, 2, 2), g = random_polynomial(rng, 2, 2);
    const auto path = random_path(model, grid, rng);
    const PathVectorField vf = [&](const DiscretePath& p) { return pointwise_hamiltonian(model, f, p); };
    const PathVectorField vg = [&](const DiscretePath& p) { return pointwise_hamiltonian(model, g, p); };
    const auto coarse = lie_bracket_by_flows(model, vf, vg, path, sc.eps);
    const auto fine = lie_bracket_by_flows(model, vf, vg, path, 0.5 * sc.eps);
    const auto ex = pointwise_hamiltonian(model, bracket_observable(model, f, g), path);
    double worst = 0.0, scale = 1e-12;
    for (std::size_t i = 0; i < ex.size(); ++i)
      for (std::size_t c = 0; c < 2; ++c) {
        const double extrap = 2.0 * fine.values[i][c] - coarse.values[i][c];
        worst = std::max(worst, std::abs(extrap - ex.values[i][c]));
        scale = std::max(scale, std::abs(ex.values[i][c]));
      }
    return Outcome{worst, 0.0, worst / scale};
  });
  return l;
}

inline CheckList potential_checks(const CheckContext& ctx) {
  CheckList l;
  const auto sc = ctx.sc;
  const auto model = ctx.model;
  const auto r2 = make_r2();
  add(l, "potential.beta_example", "local potential on path space", 1e-12, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    return compare(beta_eval(r2, whole_path_partition(r2, path), path, constant_tangent(path, {0.0, 1.0})), 0.5);
  });
  add(l, "potential.beta_two_segments", "local potential on path space", 1e-12, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    auto part = whole_path_partition(r2, path);
    auto second = part[0];
    part[0].t_end = 0.5;
    second.t_begin = 0.5;
    part.push_back(second);
    return compare(beta_eval(r2, part, path, constant_tangent(path, {0.0, 1.0})), 0.5);
  });
  auto dbeta = [=](bool split) {
    const auto path = scenario_path(sc, model, PathGrid(sc.N));
    auto part = whole_path_partition(model, path);
    if (split) {
      auto second = part[0];
      part[0].t_end = 0.5;
      second.t_begin = 0.5;
      part.push_back(second);
    }
    const PathOneForm beta = [&](const DiscretePath& g, const PathTangent& v) {
      // partition data follow the displaced path
      return beta_eval(model, part, g, v);
    };
    const auto v = scenario_variation(path, 0), w = scenario_variation(path, 1);
    return compare(exterior_derivative_fd(model, beta, path, v, w, sc.h), omega_tilde(model, path, v, w));
  };
  add(l, "potential.dbeta", "exterior derivative of the path-space potential", 1e-5, [=] { return dbeta(false); });
  add(l, "potential.dbeta_two_segments", "exterior derivative of the path-space potential", 1e-5,
      [=] { return dbeta(true); });
  add(l, "potential.theta_consistency", "local potential of omega", 1e-8, [=] {
    const auto path = scenario_path(sc, model, PathGrid(16));
    double worst = 0.0;
    for (const auto& p : path.points) worst = std::max(worst, potential_mismatch(model, 0, p, 1e-5));
    return Outcome{worst, 0.0, worst};
  });
  add(l, "potential.partition_detector", "potential domain of a segment", 0.5, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    auto part = whole_path_partition(r2, path);
    part[0].domain = Chart{"half", {-1.0, -1.0}, {0.5, 1.0}, {0.0, 0.0}};
    try {
      beta_eval(r2, part, path, constant_tangent(path, {0.0, 1.0}));
    } catch (const PartitionDomainError&) {
      return Outcome{1.0, 1.0, 0.0};
    }
    return Outcome{0.0, 1.0, 1.0};
  });
  return l;
}

inline CheckList chen_checks(const CheckContext& ctx) {
  CheckList l;
  const auto sc = ctx.sc;
  const auto model = ctx.model;
  const auto r2 = make_r2();
  add(l, "chen.first_example", "first order Chen integral", 1e-12, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    const PathTangent v[] = {constant_tangent(path, {0.0, 1.0})};
    return compare(chen_first(r2, symplectic_form(r2), path, v), 1.0);
  });
  add(l, "chen.truncated_half", "truncated Chen integral", 1e-12, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    const PathTangent v[] = {constant_tangent(path, {0.0, 1.0})};
    return compare(chen_truncated(r2, symplectic_form(r2), path, 0.5, v), 0.5);
  });
  add(l, "chen.truncated_endpoint", "truncated Chen integral", 1e-14, [=] {
    const auto path = scenario_path(sc, model, PathGrid(sc.N));
    const PathTangent v[] = {scenario_variation(path, 0)};
    const auto alpha = symplectic_form(model);
    return compare(chen_truncated(model, alpha, path, 1.0, v), chen_first(model, alpha, path, v));
  });
  add(l, "chen.stokes", "exterior derivative of a first order Chen integral", model.name == "r2" ? 1e-6 : 1e-5, [=] {
    const auto path = scenario_path(sc, model, PathGrid(sc.N));
    const double r = chen_stokes_residual(model, symplectic_form(model), path, 0.6, scenario_variation(path, 0),
                                          scenario_variation(path, 1), sc.h);
    return Outcome{r, 0.0, r};
  });
  add(l, "chen.lambda_example", "transgression one-form", 1e-12, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    return compare(lambda_eval(r2, path, constant_tangent(path, {0.0, 1.0})), 0.5);
  });
  add(l, "chen.decomposition_flat", "global decomposition of the path-space form", 1e-8, [=] {
    const auto path = lissajous_path(r2, PathGrid(sc.N), {0.3, -0.2}, {0.8, 0.6}, {1, 2}, {0.1, 0.4});
    const double r = decomposition_residual(r2, path, constant_tangent(path, {1.0, 0.0}),
                                              constant_tangent(path, {0.0, 1.0}), sc.h);
    return Outcome{r, 0.0, r};
  });
  add(l, "chen.decomposition", "global decomposition of the path-space form", 1e-5, [=] {
    const auto path = scenario_path(sc, model, PathGrid(sc.N));
    const double r =
        decomposition_residual(model, path, scenario_variation(path, 0), scenario_variation(path, 1), sc.h);
    return Outcome{r, 0.0, r};
  });
  add(l, "chen.decomposition_interval", "global decomposition on a rescaled interval", 1e-5, [=] {
    const auto path = scenario_path(sc, model, PathGrid(sc.N, 0.0, 2.0));
    const double r =
        decomposition_residual(model, path, scenario_variation(path, 0), scenario_variation(path, 1), sc.h);
    return Outcome{r, 0.0, r};
  });
  return l;
}

inline CheckList holonomy_checks(const CheckContext& ctx) {
  CheckList l;
  const auto sc = ctx.sc;
  const auto model = ctx.model;
  const PrequantumConfig cfg(model, sc.hbar);
  const PathGrid grid(std::min(sc.N, 128));

  Point center{0.0, 0.0};
  double r0 = 1.0;
  if (model.name == "s2") center = {kPi / 2, kPi}, r0 = 0.5;
  if (model.name == "t2") center = {kPi, kPi}, r0 = 1.0;
  center = json_vec(sc.loop, "center", center);
  r0 = detail::get_or<double>(sc.loop, "radius", r0);
  const Profile constant = [r0](double) { return r0; };

  if (model.name != "r2") {
    add(l, "holonomy.integrality", "integrality of the symplectic form", 1e-6, [=] {
      const auto res = integrality_check(cfg, closed_surface_grid(model, 256, 256));
      return Outcome{res.flux / (kTwoPi * sc.hbar), static_cast<double>(res.n), res.residual};
    });
  }
  add(l, "holonomy.chart_vs_surface", "holonomy independent of the spanning surface", 1e-6, [=] {
    const Profile radius = [r0](double t) { return r0 * (1.0 + 0.25 * t); };
    const auto loop = sweep_circle_loop(model, grid, sc.S, center, radius);
    const auto surf = disk_surface(grid, sc.sigma, sc.S, center, radius);
    const cplx a = holonomy_chart(cfg, loop), b = holonomy_surface(cfg, surf, loop);
    return Outcome{std::arg(a), std::arg(b), phase_difference(a, b)};
  });
  add(l, "holonomy.unit_modulus", "holonomy of a Hermitian connection", 1e-12, [=] {
    const auto loop = sweep_circle_loop(model, grid, sc.S, center, constant);
    const auto surf = disk_surface(grid, sc.sigma, sc.S, center, constant);
    const double a = std::abs(holonomy_chart(cfg, loop)), b = std::abs(holonomy_surface(cfg, surf, loop));
    return Outcome{a, 1.0, std::max(std::abs(a - 1.0), std::abs(b - 1.0))};
  });
  add(l, "holonomy.degenerate_loop", "holonomy around a loop of paths", 1e-12, [=] {
    const auto loop = sweep_circle_loop(model, grid, sc.S, center, [](double) { return 0.0; });
    const cplx hol = holonomy_chart(cfg, loop);
    return Outcome{std::arg(hol), 0.0, std::abs(hol - 1.0)};
  });
  add(l, "holonomy.boundary_detector", "surface spanning a loop of paths", 0.5, [=] {
    const auto loop = sweep_circle_loop(model, grid, sc.S, center, constant);
    const auto surf = disk_surface(grid, sc.sigma, sc.S, center, [r0](double) { return 0.9 * r0; });
    try {
      holonomy_surface(cfg, surf, loop);
    } catch (const BoundaryMismatchError&) {
      return Outcome{1.0, 1.0, 0.0};
    }
    return Outcome{0.0, 1.0, 1.0};
  });
  add(l, "holonomy.lambda_forms", "line integral of the transgression form", 1e-8, [=] {
    const Profile radius = [r0](double t) { return r0 * (0.5 + 0.5 * t); };
    const auto loop = sweep_circle_loop(model, grid, sc.S, center, radius);
    return compare(lambda_line_integral(cfg, loop), lambda_flux_integral(cfg, loop));
  });
  add(l, "holonomy.lambda_zero_area", "line integral of the transgression form", 1e-10, [=] {
    const auto loop = back_and_forth_loop(model, grid, sc.S, center, {0.6, 0.8}, [r0](double t) { return r0 * (0.5 + 0.5 * t); });
    return compare(lambda_line_integral(cfg, loop), 0.0);
  });
  if (model.name == "r2") {
    add(l, "holonomy.closed_form_circle", "holonomy around a loop of paths", 1e-6, [=] {
      const auto loop = sweep_circle_loop(model, grid, sc.S, center, constant);
      const cplx ref = std::exp(kI * kPi * r0 * r0 / sc.hbar);
      const cplx hol = holonomy_chart(cfg, loop);
      return Outcome{std::arg(hol), std::arg(ref), phase_difference(hol, ref)};
    });
    add(l, "holonomy.closed_form_sqrt_sweep", "holonomy around a loop of paths", 1e-6, [=] {
      const auto loop = sweep_circle_loop(model, grid, sc.S, center, [r0](double t) { return r0 * std::sqrt(t); });
      const cplx ref = std::exp(kI * kPi * r0 * r0 / (2.0 * sc.hbar));
      const cplx hol = holonomy_chart(cfg, loop);
      return Outcome{std::arg(hol), std::arg(ref), phase_difference(hol, ref)};
    });
  }
  if (model.name == "s2") {
    const double phi_max = detail::get_or<double>(sc.loop, "phi_max", 1.0);
    const Profile polar = [phi_max](double t) { return phi_max * (1.0 + 0.3 * t); };
    add(l, "holonomy.cap_complement", "holonomy modulo the total flux", 1e-6, [=] {
      // the two caps differ by the total flux 4 pi r^2 for every t
      const auto loop = latitude_loop(model, grid, sc.S, polar);
      const cplx north = holonomy_surface(cfg, cap_surface(grid, sc.sigma, sc.S, polar, true), loop);
      const cplx south = holonomy_surface(cfg, cap_surface(grid, sc.sigma, sc.S, polar, false), loop);
      const cplx expected = std::exp(kI * 4.0 * kPi * model.radius * model.radius / sc.hbar);
      return Outcome{std::arg(north * std::conj(south)), std::arg(expected),
                     phase_difference(north * std::conj(south), expected)};
    });
  }
  return l;
}

inline Section wave_section() {
  return {"wave", [](int, const Point& p) { return std::exp(kI * (0.7 * p[0] - 0.4 * p[1])) * (1.0 + 0.3 * p[0] * p[1]); },
          {}};
}

inline CheckList operator_checks(const CheckContext& ctx) {
  CheckList l;
  const auto sc = ctx.sc;
  const auto model = ctx.model;
  const auto r2 = make_r2();
  const PrequantumConfig flat(r2, sc.hbar);
  const PrequantumConfig cfg(model, sc.hbar);
  const auto xo = coordinate_observable(0, "x");
  const auto yo = coordinate_observable(1, "y");
  const auto X = PathObservable::tilde(xo), Y = PathObservable::tilde(yo);

  add(l, "operators.covariant_example", "prequantum connection", 1e-12, [=] {
    const cplx d = covariant_derivative(flat, constant_section(), {2.0, 0.0}, {0.0, 1.0});
    return Outcome{d.imag(), -2.0 / sc.hbar, std::abs(d - cplx{0.0, -2.0 / sc.hbar})};
  });
  add(l, "operators.pullback_example", "pulled-back connection", 1e-12, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    const cplx d = pullback_covariant_derivative(flat, constant_section(), path, constant_tangent(path, {0.0, 1.0}));
    return Outcome{d.imag(), -0.5 / sc.hbar, std::abs(d - cplx{0.0, -0.5 / sc.hbar})};
  });
  add(l, "operators.curvature", "curvature of the pulled-back connection", model.name == "r2" ? 1e-6 : 1e-5, [=] {
    const auto path = scenario_path(sc, model, PathGrid(sc.N));
    const double r = curvature_residual(cfg, path, scenario_variation(path, 0), scenario_variation(path, 1), sc.h);
    return Outcome{r, 0.0, r};
  });
  add(l, "operators.apply_example", "prequantum operator", 1e-12, [=] {
    const auto path = line_path(r2, PathGrid(sc.N), {0.0, 0.0}, {1.0, 0.0});
    const PrequantumConfig unit(r2, 1.0);
    const cplx v = apply_operator(unit, X, constant_section(), path);
    return Outcome{v.real(), 0.0, std::abs(v)};
  });
  add(l, "operators.five_term", "explicit operator action on products", 1e-8, [=] {
    const auto path = scenario_path(sc, model, PathGrid(sc.N));
    const auto phi = X * Y + 0.5 * X;
    const cplx a = apply_operator(cfg, phi, wave_section(), path);
    const cplx b = apply_operator_expanded(cfg, phi, wave_section(), path);
    return Outcome{std::abs(a), std::abs(b), std::abs(a - b) / std::max(std::abs(a), 1e-300)};
  });
  add(l, "operators.commutator", "commutator of prequantum operators", 1e-4, [=] {
    const auto path = line_path(r2, PathGrid(std::min(sc.N, 128)), {0.0, 0.0}, {1.0, 1.0});
    const double r = commutator_residual(flat, X, Y, constant_section(), path, sc.h);
    return Outcome{r, 0.0, r};
  });
  add(l, "operators.commutator_wave", "commutator of prequantum operators", 1e-4, [=] {
    const auto path = scenario_path(sc, model, PathGrid(std::min(sc.N, 128)));
    const double r = commutator_residual(cfg, X, Y, wave_section(), path, sc.h);
    return Outcome{r, 0.0, r};
  });
  add(l, "operators.inner_product", "inner product of sections", 1e-8, [=] {
    if (model.name == "r2") {
      const auto grid = bounded_surface_grid({-1.0, -1.0}, {1.0, 1.0}, 64, 64);
      return compare(inner_product(cfg, constant_section(), constant_section(), grid).real(), 4.0);
    }
    const auto grid = closed_surface_grid(model, 256, 256);
    const double area = model.name == "s2" ? 4.0 * kPi * model.radius * model.radius : 4.0 * kPi * kPi * model.scale;
    return compare(inner_product(cfg, constant_section(), constant_section(), grid).real(), area);
  });
  return l;
}

inline SpacetimeConfig scenario_spacetime(const Scenario& sc) {
  const json& k = sc.kg;
  detail::allow_keys(k, {"Lx", "rho", "R", "theta_metric_sign", "K", "Nbar", "nx", "ntheta", "path_N", "count", "t0"},
                     "kg");
  SpacetimeConfig c;
  c.Lx = detail::get_or<double>(k, "Lx", kTwoPi);
  c.rho = detail::get_or<double>(k, "rho", 1.5);
  c.R = detail::get_or<double>(k, "R", 1.0);
  c.sign = parse_theta_sign(detail::get_or<std::string>(k, "theta_metric_sign", "paper_literal"));
  c.K = detail::get_or<int>(k, "K", 3);
  c.Nbar = detail::get_or<int>(k, "Nbar", 1);
  c.validate_bar();
  return c;
}

inline CheckList kg_checks(const CheckContext& ctx) {
  CheckList l;
  const auto sc = ctx.sc;
  const SpacetimeConfig base = scenario_spacetime(sc);
  CauchySurfaceSpec sigma;
  sigma.nx = detail::get_or<int>(sc.kg, "nx", 128);
  sigma.ntheta = detail::get_or<int>(sc.kg, "ntheta", 128);
  sigma.t0 = detail::get_or<double>(sc.kg, "t0", 0.0);
  sigma.validate();
  const PathGrid pgrid(detail::get_or<int>(sc.kg, "path_N", 128));
  const int count = detail::get_or<int>(sc.kg, "count", 5);
  SpacetimeConfig unit_m;  // Lx = 2 pi, rho = 1

  add(l, "kg.residual_single_mode", "Klein-Gordon equation on M", 1e-12, [=] {
    const auto psi = make_solution(unit_m, {{1, 0, 1.0, 0.0}});
    const double r = kg_residual(unit_m, psi, sigma);
    return Outcome{r, 0.0, r};
  });
  add(l, "kg.residual_detector", "Klein-Gordon equation on M", 1e-9, [=] {
    auto psi = make_solution(unit_m, {{1, 0, 1.0, 0.0}});
    psi.modes[0].omega *= 1.1;
    const double r = kg_residual(unit_m, psi, sigma);
    const double expected = 2.0 * 0.21;  // omega^2 (1.21 - 1) at unit amplitude
    return Outcome{r, expected, r > 0.1 ? std::abs(r - expected) : 1.0};
  });
  add(l, "kg.residual_bar", "Klein-Gordon equation on M x S^1", 1e-8, [=] {
    Rng rng(check_seed(sc, "kg.residual_bar"));
    const double r = kg_residual(base, random_bar_solution(base, count, rng), sigma);
    return Outcome{r, 0.0, r};
  });
  add(l, "kg.omega_M_partner", "symplectic form on solutions over M", 1e-10, [=] {
    const auto a = make_solution(unit_m, {{1, 0, 1.0, 0.0}});
    const auto b = make_solution(unit_m, {{1, 0, 0.0, 1.0}});
    return compare(omega_M(unit_m, a, b, sigma), std::sqrt(2.0) * kPi);
  });
  add(l, "kg.omega_M_orthogonal", "symplectic form on solutions over M", 1e-12, [=] {
    const auto a = make_solution(unit_m, {{1, 0, 1.0, 0.0}});
    const auto b = make_solution(unit_m, {{2, 0, 0.0, 1.0}});
    return compare(omega_M(unit_m, a, b, sigma), 0.0);
  });
  add(l, "kg.omega_bar_partner", "symplectic form on solutions over M x S^1", 1e-10, [=] {
    SpacetimeConfig c = base;
    c.Lx = kTwoPi;
    c.R = 1.0;
    const auto a = make_bar_solution(c, {{1, 1, 1.0, 0.0}});
    const auto b = make_bar_solution(c, {{1, 1, 0.0, 1.0}});
    const double w = a.modes[0].omega;
    return compare(omega_bar(c, a, b, sigma), w * c.Lx / 2.0 * kTwoPi * c.R);
  });
  add(l, "kg.cauchy_independence", "independence of the Cauchy surface", 1e-8, [=] {
    Rng rng(check_seed(sc, "kg.cauchy_independence"));
    const auto a = random_bar_solution(base, count, rng), b = random_bar_solution(base, count, rng);
    // omega_M is only conserved between solutions of one equation on M, so
    // it gets its own mixtures with a common mass instead of slices of a, b
    std::vector<ModeCoefficients> ca, cb;
    for (int k = -base.K; k <= base.K; ++k) {
      ca.push_back({k, 0, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
      cb.push_back({k, 0, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    }
    const auto ma = make_solution(base, ca), mb = make_solution(base, cb);
    double lo = 1e300, hi = -1e300, blo = 1e300, bhi = -1e300;
    for (double t : {0.0, 0.3, 0.7}) {
      CauchySurfaceSpec s = sigma;
      s.t0 = t;
      const double wb = omega_bar(base, a, b, s);
      const double wm = omega_M(base, ma, mb, s);
      lo = std::min(lo, wb), hi = std::max(hi, wb);
      blo = std::min(blo, wm), bhi = std::max(bhi, wm);
    }
    // same cancellation floor as the path-form comparison: orthogonal draws sit at rounding level
    const double fbar = std::max(kRelativeFloor, kCancellationShare * omega_bar_bound(base, a, b));
    const double rel = std::max((hi - lo) / std::max(std::abs(hi), fbar),
                                (bhi - blo) / std::max(std::abs(bhi), kRelativeFloor));
    return Outcome{hi, lo, rel};
  });
  add(l, "kg.n0_reduction", "symplectic form on the path of solutions", 1e-10, [=] {
    const auto a = make_bar_solution(base, {{1, 0, 0.7, -0.2}, {2, 0, 0.1, 0.5}});
    const auto b = make_bar_solution(base, {{1, 0, -0.3, 0.9}, {-2, 0, 0.4, 0.3}});
    const double r = path_form_residual(base, a, b, sigma, pgrid);
    const double m = kTwoPi * base.R * omega_M(base, bar_slice(a, 0.0), bar_slice(b, 0.0), sigma);
    const double rel = std::abs(omega_tilde_solutions(base, a, b, sigma, pgrid) - m) / std::max(std::abs(m), kRelativeFloor);
    return Outcome{r, 0.0, std::max(r, rel)};
  });
  for (auto sign : {ThetaMetricSign::paper_literal, ThetaMetricSign::spacelike}) {
    const std::string id = std::string("kg.path_form_coincidence_") + to_string(sign);
    add(l, id, "coincidence of the two symplectic forms", 1e-6, [=] {
      SpacetimeConfig c = base;
      c.sign = sign;
      c.validate_bar();
      Rng rng(check_seed(sc, id));
      double worst = 0.0;
      for (int k = 0; k < std::max(sc.draws, 1); ++k) {
        const auto a = random_bar_solution(c, count, rng), b = random_bar_solution(c, count, rng);
        worst = std::max(worst, path_form_residual(c, a, b, sigma, pgrid));
      }
      return Outcome{worst, 0.0, worst};
    });
  }
  add(l, "kg.antisymmetry", "symplectic form on solutions over M x S^1", 1e-12, [=] {
    Rng rng(check_seed(sc, "kg.antisymmetry"));
    const auto a = random_bar_solution(base, count, rng), b = random_bar_solution(base, count, rng);
    const double ab = omega_bar(base, a, b, sigma), ba = omega_bar(base, b, a, sigma);
    const double tab = omega_tilde_solutions(base, a, b, sigma, pgrid), tba = omega_tilde_solutions(base, b, a, sigma, pgrid);
    const double scale = std::max({std::abs(ab), std::abs(tab), 1.0});
    return Outcome{ab, -ba, std::max(std::abs(ab + ba), std::abs(tab + tba)) / scale};
  });
  return l;
}

/// Builds the check list of a suite; "all" concatenates every suite.
inline CheckList suite_checks(const Scenario& sc) {
  const CheckContext ctx{sc, make_model(sc.model, sc.radius, sc.scale)};
  const std::map<std::string, std::function<CheckList(const CheckContext&)>> table{
      {"poisson", poisson_checks}, {"potential", potential_checks}, {"chen", chen_checks},
      {"holonomy", holonomy_checks}, {"operators", operator_checks}, {"kg", kg_checks}};
  if (sc.suite == "all") {
    CheckList out;
    for (const auto& [name, fn] : table) {
      auto part = fn(ctx);
      out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
  }
  const auto it = table.find(sc.suite);
  if (it == table.end()) throw SuiteUnknownError("unknown suite '" + sc.suite + "'");
  return it->second(ctx);
}

inline ResidualReport run_suite(const Scenario& sc) {
  if (std::find(suite_names().begin(), suite_names().end(), sc.suite) == suite_names().end())
    throw SuiteUnknownError("unknown suite '" + sc.suite + "'");
  return run_checks(sc.suite, suite_checks(sc), sc.tolerances);
}

inline void write_report(const ResidualReport& report, const std::string& out, const std::string& csv = {}) {
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write report to " + out);
  f << report.to_json().dump(2) << '\n';
  if (!csv.empty()) {
    std::ofstream c(csv);
    if (!c) throw ConfigError("cannot write CSV to " + csv);
    c << report.to_csv();
  }
}

// ---------------------------------------------------------------------------
// Convergence sweeps

enum class SweepParam { N, h };

inline SweepParam parse_sweep_param(const std::string& s) {
  if (s == "N") return SweepParam::N;
  if (s == "h") return SweepParam::h;
  throw ConfigError("sweep parameter must be N or h");
}

struct SweepRow {
  std::string id;
  std::vector<double> residuals;
  std::optional<double> order;  // empty when every residual sits at the floor
};

struct SweepTable {
  SweepParam param = SweepParam::N;
  std::vector<double> values;  // N or h per level
  std::vector<SweepRow> rows;

  [[nodiscard]] json to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows) {
      json o{{"id", r.id}, {"residuals", r.residuals}};
      if (r.order)
        o["order"] = *r.order;
      else
        o["order"] = "floor";
      rows_j.push_back(std::move(o));
    }
    return json{{"param", param == SweepParam::N ? "N" : "h"}, {"values", values}, {"checks", std::move(rows_j)}};
  }
};

inline constexpr double kSweepFloor = 1e-12;

/// Reruns the suite on geometrically refined grids. Refining N also halves h
/// so the finite-difference and quadrature errors shrink together; refining
/// h keeps N fixed. The order is the least-squares slope of log(residual)
/// against log(h) (or log(1/N)), over levels whose residual is above the
/// floor.
inline SweepTable convergence_sweep(const Scenario& base, SweepParam param, int levels) {
  if (levels < 3) throw ConfigError("a sweep needs at least three levels");
  SweepTable table{param, {}, {}};
  std::map<std::string, SweepRow> rows;
  std::vector<double> xs;
  for (int k = 0; k < levels; ++k) {
    Scenario sc = base;
    const double f = std::pow(2.0, k);
    if (param == SweepParam::N) {
      sc.N = static_cast<int>(base.N * f);
      sc.h = base.h / f;
      table.values.push_back(sc.N);
      xs.push_back(1.0 / sc.N);
    } else {
      sc.h = base.h / f;
      table.values.push_back(sc.h);
      xs.push_back(sc.h);
    }
    if (sc.N > 8192) throw ConfigError("sweep would refine N beyond 8192");
    const auto rep = run_suite(sc);
    for (const auto& c : rep.checks) {
      auto& row = rows[c.id];
      row.id = c.id;
      row.residuals.push_back(c.residual);
    }
  }
  for (auto& [id, row] : rows) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < row.residuals.size(); ++i)
      if (row.residuals[i] > kSweepFloor) lx.push_back(xs[i]), ly.push_back(row.residuals[i]);
    if (lx.size() >= 2) row.order = loglog_slope(lx, ly);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace pathquant
