#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cattaneo/errors.hpp"
#include "cattaneo/symbol.hpp"
#include "cattaneo/thermo.hpp"

namespace cattaneo::cli {

using json = nlohmann::ordered_json;

enum class Model { Cattaneo3d, Ccj3d, Cattaneo1d, GeneralLambdaNu };

inline const char* to_string(Model m) {
  switch (m) {
    case Model::Cattaneo3d: return "cattaneo-1m1-3d";
    case Model::Ccj3d: return "ccj-3d";
    case Model::Cattaneo1d: return "cattaneo-1d";
    case Model::GeneralLambdaNu: return "general-lambda-nu";
  }
  return "?";
}

inline Model parse_model(const std::string& s) {
  for (Model m : {Model::Cattaneo3d, Model::Ccj3d, Model::Cattaneo1d, Model::GeneralLambdaNu})
    if (s == to_string(m)) return m;
  throw ConfigError("model: unknown model '" + s +
                    "' (expected cattaneo-1m1-3d, ccj-3d, cattaneo-1d or general-lambda-nu)");
}

struct RangeSpec {
  double min = 0.0, max = 0.0;
  int count = 1;
};

struct ExperimentConfig {
  Model model = Model::Cattaneo3d;
  std::string closure = "ideal-gas";
  ClosureParams closure_params;
  double tau = 1.0;
  FluidState state{1.0, Vec3::Zero(), 1.0, Vec3(1.0, 1.0, 1.0)};
  std::array<double, 2> lambda_nu{1.0, -1.0};

  struct Box {
    std::array<double, 2> rho{0.5, 2.0};
    std::array<double, 2> theta{0.5, 2.0};
    double v_max = 1.0;
    double q_max = 1.0;
    int samples = 64;  // grid per axis for M1, M2
  } box;

  struct Spectrum {
    int directions = 50;       // random unit xi at the configured state
    int box_samples = 10000;   // random (xi, U) for ordering and gap checks
    int sweep_states = 20;     // non-hyperbolicity sweep: states x icosphere directions
  } spectrum;

  struct Symmetrizer {
    int random_directions = 29;
    int microlocal_points = 1000;
  } symmetrizer;

  struct Coupling {
    EquilibriumState equilibrium{1.0, Vec3::Zero(), 1.0};
    int sphere_subdivisions = 2;
    RangeSpec radii{1e-2, 1e2, 16};
    RangeSpec radii_1d{0.1, 10.0, 64};
    int branch_points = 100;
    double branch_radius = 0.2;
  } coupling;

  struct Wave {
    int N = 32;
    std::array<double, 3> L{2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi};
    Vec3 center{3.0, 0.0, 0.0};
    double r_inner = 1.2;
    double r_outer = 2.4;
    Vec3 probe{0.0, 0.0, 1.0};
    EquilibriumState equilibrium{1.0, Vec3(1.0, 0.0, 0.0), 1.0};
    double t_end = 10.0;
    int checkpoints = 101;
    bool write_field = false;
  } wave;

  std::uint64_t seed = 12345;
  int threads = 0;  // 0 = available cores
  std::map<std::string, double> tolerances;
  std::string out_dir = "out";

  double tol(const std::string& key) const { return tolerances.at(key); }
};

inline std::map<std::string, double> default_tolerances() {
  return {
      {"closure_derivatives", 1e-6},
      {"pairing", 1e-10},
      {"null_space", 1e-10},
      {"forced_zero", 1e-10},
      {"pd", 1e-8},
      {"symmetry", 1e-12},
      {"microlocal_residual", 1e-10},
      {"hermitian", 1e-12},
      {"homogeneity", 1e-10},
      {"witness", 1e-12},
      {"branch", 1e-13},
      {"coupling", 1e-10},
      {"dissipative", 1e-10},
      {"energy_bound", 1e-12},
      {"l2_drift", 1e-10},
      {"flux", 1e-12},
      {"translation", 1e-10},
      {"realness", 1e-12},
      {"microlocal_doubling", 0.1},
  };
}

inline ExperimentConfig default_config() {
  ExperimentConfig c;
  c.tolerances = default_tolerances();
  return c;
}

// ---------------------------------------------------------------------------
// JSON <-> config. Unknown keys are errors so typos cannot pass silently.

namespace detail {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  /// Rejects keys that no accessor asked for.
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown field");
  }

  bool has(const std::string& key) { return seen_.insert(key), j_.contains(key); }
  const json& at(const std::string& key) { seen_.insert(key); return j_.at(key); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    out = v.get<double>();
  }
  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    out = v.get<int>();
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    out = v.get<bool>();
  }
  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    out = v.get<std::string>();
  }
  template <std::size_t K>
  void numbers(const std::string& key, std::array<double, K>& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != K)
      throw ConfigError(where(key) + ": expected an array of " + std::to_string(K) + " numbers");
    for (std::size_t i = 0; i < K; ++i) {
      if (!v[i].is_number()) throw ConfigError(where(key) + ": expected numbers");
      out[i] = v[i].get<double>();
    }
  }
  void vec3(const std::string& key, Vec3& out) {
    std::array<double, 3> a{out(0), out(1), out(2)};
    numbers(key, a);
    out = Vec3(a[0], a[1], a[2]);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

inline void read_equilibrium(ObjectReader& r, const std::string& key, EquilibriumState& e) {
  if (!r.has(key)) return;
  ObjectReader s(r.at(key), r.where(key));
  s.number("rho", e.rho);
  s.vec3("v", e.v);
  s.number("theta", e.theta);
  s.done();
}

inline json equilibrium_json(const EquilibriumState& e) {
  return {{"rho", e.rho}, {"v", vec_json(e.v)}, {"theta", e.theta}};
}

inline void read_range(ObjectReader& r, const std::string& key, RangeSpec& out) {
  if (!r.has(key)) return;
  ObjectReader s(r.at(key), r.where(key));
  s.number("min", out.min);
  s.number("max", out.max);
  s.integer("count", out.count);
  s.done();
}

inline json range_json(const RangeSpec& s) {
  return {{"min", s.min}, {"max", s.max}, {"count", s.count}};
}

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

}  // namespace detail

/// Semantic checks; messages name the offending field.
inline void validate(const ExperimentConfig& c) {
  using detail::require;
  require(c.tau > 0.0, "tau", "must be positive");
  require(c.state.rho > 0.0, "state.rho", "must be positive");
  require(c.state.theta > 0.0, "state.theta", "must be positive");
  require(c.box.rho[0] > 0.0 && c.box.rho[0] <= c.box.rho[1], "box.rho", "need 0 < min <= max");
  require(c.box.theta[0] > 0.0 && c.box.theta[0] <= c.box.theta[1], "box.theta",
          "need 0 < min <= max");
  require(c.box.v_max >= 0.0, "box.v_max", "must be >= 0");
  require(c.box.q_max >= 0.0, "box.q_max", "must be >= 0");
  require(c.box.samples >= 1, "box.samples", "must be >= 1");
  require(c.spectrum.directions >= 1, "spectrum.directions", "must be >= 1");
  require(c.spectrum.box_samples >= 1, "spectrum.box_samples", "must be >= 1");
  require(c.spectrum.sweep_states >= 1, "spectrum.sweep_states", "must be >= 1");
  require(c.symmetrizer.random_directions >= 0, "symmetrizer.random_directions", "must be >= 0");
  require(c.symmetrizer.microlocal_points >= 1, "symmetrizer.microlocal_points", "must be >= 1");
  const auto& e = c.coupling.equilibrium;
  require(e.rho > 0.0 && e.theta > 0.0, "coupling.equilibrium", "need rho > 0 and theta > 0");
  require(c.coupling.sphere_subdivisions >= 0 && c.coupling.sphere_subdivisions <= 5,
          "coupling.sphere_subdivisions", "must be in [0, 5]");
  for (const auto& [name, r] : {std::pair{"coupling.radii", c.coupling.radii},
                                std::pair{"coupling.radii_1d", c.coupling.radii_1d}}) {
    require(r.min > 0.0 && r.max >= r.min && r.count >= 1, name, "need 0 < min <= max, count >= 1");
  }
  require(c.coupling.branch_points >= 1, "coupling.branch_points", "must be >= 1");
  require(c.coupling.branch_radius > 0.0 && c.coupling.branch_radius < 1.0,
          "coupling.branch_radius", "must be in (0, 1)");
  require(c.wave.N >= 2 && (c.wave.N & (c.wave.N - 1)) == 0, "wave.N", "must be a power of two >= 2");
  for (double l : c.wave.L) require(l > 0.0, "wave.L", "lengths must be positive");
  require(c.wave.r_inner > 0.0 && c.wave.r_inner < c.wave.r_outer, "wave.r_inner",
          "need 0 < r_inner < r_outer");
  const auto& we = c.wave.equilibrium;
  require(we.rho > 0.0 && we.theta > 0.0, "wave.equilibrium", "need rho > 0 and theta > 0");
  require(c.wave.t_end >= 0.0, "wave.t_end", "must be >= 0");
  require(c.wave.checkpoints >= 2, "wave.checkpoints", "must be >= 2");
  require(c.threads >= 0, "threads", "must be >= 0");
  for (const auto& [k, v] : c.tolerances) require(v > 0.0, "tolerances." + k, "must be positive");
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c = default_config();
  {
    detail::ObjectReader r(j, "");
    std::string model = to_string(c.model);
    r.string("model", model);
    c.model = parse_model(model);
    if (r.has("closure")) {
      detail::ObjectReader s(r.at("closure"), "closure");
      s.string("name", c.closure);
      if (s.has("params")) {
        const json& p = s.at("params");
        if (!p.is_object()) throw ConfigError("closure.params: expected an object");
        for (auto it = p.begin(); it != p.end(); ++it) {
          if (!it.value().is_number())
            throw ConfigError("closure.params." + it.key() + ": expected a number");
          c.closure_params[it.key()] = it.value().get<double>();
        }
      }
      s.done();
    }
    r.number("tau", c.tau);
    if (r.has("state")) {
      detail::ObjectReader s(r.at("state"), "state");
      s.number("rho", c.state.rho);
      s.vec3("v", c.state.v);
      s.number("theta", c.state.theta);
      s.vec3("q", c.state.q);
      s.done();
    }
    r.numbers("lambda_nu", c.lambda_nu);
    if (r.has("box")) {
      detail::ObjectReader s(r.at("box"), "box");
      s.numbers("rho", c.box.rho);
      s.numbers("theta", c.box.theta);
      s.number("v_max", c.box.v_max);
      s.number("q_max", c.box.q_max);
      s.integer("samples", c.box.samples);
      s.done();
    }
    if (r.has("spectrum")) {
      detail::ObjectReader s(r.at("spectrum"), "spectrum");
      s.integer("directions", c.spectrum.directions);
      s.integer("box_samples", c.spectrum.box_samples);
      s.integer("sweep_states", c.spectrum.sweep_states);
      s.done();
    }
    if (r.has("symmetrizer")) {
      detail::ObjectReader s(r.at("symmetrizer"), "symmetrizer");
      s.integer("random_directions", c.symmetrizer.random_directions);
      s.integer("microlocal_points", c.symmetrizer.microlocal_points);
      s.done();
    }
    if (r.has("coupling")) {
      detail::ObjectReader s(r.at("coupling"), "coupling");
      detail::read_equilibrium(s, "equilibrium", c.coupling.equilibrium);
      s.integer("sphere_subdivisions", c.coupling.sphere_subdivisions);
      detail::read_range(s, "radii", c.coupling.radii);
      detail::read_range(s, "radii_1d", c.coupling.radii_1d);
      s.integer("branch_points", c.coupling.branch_points);
      s.number("branch_radius", c.coupling.branch_radius);
      s.done();
    }
    if (r.has("wave")) {
      detail::ObjectReader s(r.at("wave"), "wave");
      s.integer("N", c.wave.N);
      s.numbers("L", c.wave.L);
      s.vec3("center", c.wave.center);
      s.number("r_inner", c.wave.r_inner);
      s.number("r_outer", c.wave.r_outer);
      s.vec3("probe", c.wave.probe);
      detail::read_equilibrium(s, "equilibrium", c.wave.equilibrium);
      s.number("t_end", c.wave.t_end);
      s.integer("checkpoints", c.wave.checkpoints);
      s.boolean("write_field", c.wave.write_field);
      s.done();
    }
    if (r.has("seed")) {
      const json& v = r.at("seed");
      if (!v.is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    }
    r.integer("threads", c.threads);
    if (r.has("tolerances")) {
      detail::ObjectReader s(r.at("tolerances"), "tolerances");
      for (auto& [k, v] : c.tolerances) s.number(k, v);
      s.done();
    }
    if (r.has("output")) {
      detail::ObjectReader s(r.at("output"), "output");
      s.string("dir", c.out_dir);
      s.done();
    }
    r.done();
  }
  validate(c);
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json params = json::object();
  for (const auto& [k, v] : c.closure_params) params[k] = v;
  json tol = json::object();
  for (const auto& [k, v] : c.tolerances) tol[k] = v;
  return {
      {"model", to_string(c.model)},
      {"closure", {{"name", c.closure}, {"params", params}}},
      {"tau", c.tau},
      {"state",
       {{"rho", c.state.rho}, {"v", detail::vec_json(c.state.v)}, {"theta", c.state.theta},
        {"q", detail::vec_json(c.state.q)}}},
      {"lambda_nu", c.lambda_nu},
      {"box",
       {{"rho", c.box.rho}, {"theta", c.box.theta}, {"v_max", c.box.v_max},
        {"q_max", c.box.q_max}, {"samples", c.box.samples}}},
      {"spectrum",
       {{"directions", c.spectrum.directions}, {"box_samples", c.spectrum.box_samples},
        {"sweep_states", c.spectrum.sweep_states}}},
      {"symmetrizer",
       {{"random_directions", c.symmetrizer.random_directions},
        {"microlocal_points", c.symmetrizer.microlocal_points}}},
      {"coupling",
       {{"equilibrium", detail::equilibrium_json(c.coupling.equilibrium)},
        {"sphere_subdivisions", c.coupling.sphere_subdivisions},
        {"radii", detail::range_json(c.coupling.radii)},
        {"radii_1d", detail::range_json(c.coupling.radii_1d)},
        {"branch_points", c.coupling.branch_points},
        {"branch_radius", c.coupling.branch_radius}}},
      {"wave",
       {{"N", c.wave.N}, {"L", c.wave.L}, {"center", detail::vec_json(c.wave.center)},
        {"r_inner", c.wave.r_inner}, {"r_outer", c.wave.r_outer},
        {"probe", detail::vec_json(c.wave.probe)},
        {"equilibrium", detail::equilibrium_json(c.wave.equilibrium)}, {"t_end", c.wave.t_end},
        {"checkpoints", c.wave.checkpoints}, {"write_field", c.wave.write_field}}},
      {"seed", c.seed},
      {"threads", c.threads},
      {"tolerances", tol},
      {"output", {{"dir", c.out_dir}}},
  };
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

/// 64-bit FNV-1a of the compact serialization, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string s = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline ThermoClosure closure_of(const ExperimentConfig& c) {
  return make_closure(c.closure, c.closure_params, c.tau);
}

}  // namespace cattaneo::cli
