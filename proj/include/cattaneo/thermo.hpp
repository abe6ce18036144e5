#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "cattaneo/errors.hpp"

namespace cattaneo {

/// Equation-of-state closure: pressure, internal energy and conductivity as
/// functions of (rho, theta) together with the partial derivatives the symbol
/// needs, plus the (constant) thermal relaxation time.
struct ThermoClosure {
  using Fn = std::function<double(double, double)>;

  std::string name;
  Fn p;
  Fn p_rho;
  Fn p_theta;
  Fn e;
  Fn e_theta;
  Fn kappa;
  double tau = 1.0;
};

struct ThermoValues {
  double p = 0.0;
  double p_rho = 0.0;
  double p_theta = 0.0;
  double e = 0.0;
  double e_theta = 0.0;
  double kappa = 0.0;
};

/// p = R rho theta, e = cv theta, constant kappa.
inline ThermoClosure ideal_gas(double gas_constant = 1.0, double cv = 1.5,
                               double conductivity = 1.0, double tau = 1.0) {
  ThermoClosure c;
  c.name = "ideal-gas";
  const double R = gas_constant;
  c.p = [R](double rho, double theta) { return R * rho * theta; };
  c.p_rho = [R](double, double theta) { return R * theta; };
  c.p_theta = [R](double rho, double) { return R * rho; };
  c.e = [cv](double, double theta) { return cv * theta; };
  c.e_theta = [cv](double, double) { return cv; };
  c.kappa = [conductivity](double, double) { return conductivity; };
  c.tau = tau;
  return c;
}

/// Ideal gas plus a barotropic stiffening K rho^gamma and a temperature
/// dependent conductivity kappa0 theta^m. Used to exercise non-trivial
/// derivative data; satisfies the positivity assumptions for K >= 0, gamma > 1.
inline ThermoClosure power_law_gas(double gas_constant = 1.0, double cv = 1.5,
                                   double stiffness = 0.5, double gamma = 1.4,
                                   double kappa0 = 1.0, double kappa_exponent = 0.5,
                                   double tau = 1.0) {
  ThermoClosure c;
  c.name = "power-law";
  const double R = gas_constant, K = stiffness, g = gamma, k0 = kappa0,
               m = kappa_exponent;
  c.p = [=](double rho, double theta) { return R * rho * theta + K * std::pow(rho, g); };
  c.p_rho = [=](double rho, double theta) {
    return R * theta + K * g * std::pow(rho, g - 1.0);
  };
  c.p_theta = [=](double rho, double) { return R * rho; };
  c.e = [=](double rho, double theta) {
    return cv * theta + K / (g - 1.0) * std::pow(rho, g - 1.0);
  };
  c.e_theta = [=](double, double) { return cv; };
  c.kappa = [=](double, double theta) { return k0 * std::pow(theta, m); };
  c.tau = tau;
  return c;
}

/// Evaluates the closure at (rho, theta) and enforces positivity of
/// p, p_rho, p_theta, e_theta and kappa.
inline ThermoValues eval_closure(const ThermoClosure& closure, double rho, double theta) {
  if (!(rho > 0.0) || !(theta > 0.0)) {
    throw DomainError("eval_closure: need rho > 0 and theta > 0, got rho=" +
                      std::to_string(rho) + ", theta=" + std::to_string(theta));
  }
  ThermoValues v;
  v.p = closure.p(rho, theta);
  v.p_rho = closure.p_rho(rho, theta);
  v.p_theta = closure.p_theta(rho, theta);
  v.e = closure.e(rho, theta);
  v.e_theta = closure.e_theta(rho, theta);
  v.kappa = closure.kappa(rho, theta);

  const std::pair<const char*, double> positive[] = {{"p", v.p},
                                                     {"p_rho", v.p_rho},
                                                     {"p_theta", v.p_theta},
                                                     {"e_theta", v.e_theta},
                                                     {"kappa", v.kappa}};
  for (const auto& [label, value] : positive) {
    if (!std::isfinite(value) || !(value > 0.0)) {
      throw AssumptionViolation(std::string("closure '") + closure.name + "': " + label +
                                " = " + std::to_string(value) + " is not positive at rho=" +
                                std::to_string(rho) + ", theta=" + std::to_string(theta));
    }
  }
  if (!std::isfinite(v.e)) {
    throw NumericalError("closure '" + closure.name + "': e is not finite");
  }
  if (!(closure.tau > 0.0)) {
    throw AssumptionViolation("closure '" + closure.name + "': tau must be positive");
  }
  return v;
}

struct DerivativeCheck {
  double max_relative_error = 0.0;
  std::string worst;  // which derivative attained the maximum
  bool pass = true;
};

/// Compares the supplied derivatives with central differences of step
/// 1e-5 * max(1, |rho|, |theta|).
inline DerivativeCheck check_derivatives(const ThermoClosure& closure, double rho,
                                         double theta, double tolerance = 1e-6) {
  const double h = 1e-5 * std::max({1.0, std::abs(rho), std::abs(theta)});
  if (rho - h <= 0.0 || theta - h <= 0.0) {
    throw DomainError("check_derivatives: stencil leaves the admissible domain");
  }
  auto d_rho = [&](const ThermoClosure::Fn& f) {
    return (f(rho + h, theta) - f(rho - h, theta)) / (2 * h);
  };
  auto d_theta = [&](const ThermoClosure::Fn& f) {
    return (f(rho, theta + h) - f(rho, theta - h)) / (2 * h);
  };
  const std::pair<const char*, std::pair<double, double>> pairs[] = {
      {"p_rho", {closure.p_rho(rho, theta), d_rho(closure.p)}},
      {"p_theta", {closure.p_theta(rho, theta), d_theta(closure.p)}},
      {"e_theta", {closure.e_theta(rho, theta), d_theta(closure.e)}},
  };
  DerivativeCheck out;
  for (const auto& [label, vals] : pairs) {
    const auto [analytic, numeric] = vals;
    const double scale = std::max({std::abs(analytic), std::abs(numeric),
                                   std::numeric_limits<double>::min()});
    const double err = std::abs(analytic - numeric) / scale;
    if (err > out.max_relative_error) {
      out.max_relative_error = err;
      out.worst = label;
    }
  }
  out.pass = out.max_relative_error <= tolerance;
  return out;
}

/// Rectangle [rho0, rho1] x [theta0, theta1] with the bounds
/// M1 <= p_rho, p_theta, e_theta, kappa <= M2 over it.
struct StateBox {
  double rho0 = 0.0, rho1 = 0.0;
  double theta0 = 0.0, theta1 = 0.0;
  double M1 = 0.0, M2 = 0.0;
};

/// Dense-grid estimate of M1, M2 (samples x samples points, endpoints included).
inline StateBox box_bounds(const ThermoClosure& closure, double rho0, double rho1,
                           double theta0, double theta1, int samples = 64) {
  if (!(rho0 > 0.0) || !(theta0 > 0.0) || rho0 > rho1 || theta0 > theta1) {
    throw DomainError("box_bounds: need 0 < rho0 <= rho1 and 0 < theta0 <= theta1");
  }
  if (samples < 1) throw DomainError("box_bounds: samples must be >= 1");
  StateBox box{rho0, rho1, theta0, theta1, std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity()};
  auto node = [samples](double a, double b, int i) {
    return samples == 1 ? a : a + (b - a) * static_cast<double>(i) / (samples - 1);
  };
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < samples; ++j) {
      const auto v = eval_closure(closure, node(rho0, rho1, i), node(theta0, theta1, j));
      for (double x : {v.p_rho, v.p_theta, v.e_theta, v.kappa}) {
        box.M1 = std::min(box.M1, x);
        box.M2 = std::max(box.M2, x);
      }
    }
  }
  return box;
}

// ---------------------------------------------------------------------------
// Name -> closure registry used by the configuration layer.

using ClosureParams = std::map<std::string, double>;
using ClosureFactory = std::function<ThermoClosure(const ClosureParams&, double tau)>;

namespace detail {
inline double param_or(const ClosureParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

struct ClosureRegistry {
  std::mutex mutex;
  std::map<std::string, ClosureFactory> factories;

  ClosureRegistry() {
    factories["ideal-gas"] = [](const ClosureParams& p, double tau) {
      return ideal_gas(param_or(p, "R", 1.0), param_or(p, "cv", 1.5),
                       param_or(p, "kappa", 1.0), tau);
    };
    factories["power-law"] = [](const ClosureParams& p, double tau) {
      return power_law_gas(param_or(p, "R", 1.0), param_or(p, "cv", 1.5),
                           param_or(p, "K", 0.5), param_or(p, "gamma", 1.4),
                           param_or(p, "kappa0", 1.0), param_or(p, "m", 0.5), tau);
    };
  }
};

inline ClosureRegistry& closure_registry() {
  static ClosureRegistry registry;
  return registry;
}
}  // namespace detail

inline void register_closure(const std::string& name, ClosureFactory factory) {
  auto& reg = detail::closure_registry();
  std::lock_guard lock(reg.mutex);
  reg.factories[name] = std::move(factory);
}

inline std::vector<std::string> registered_closures() {
  auto& reg = detail::closure_registry();
  std::lock_guard lock(reg.mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : reg.factories) names.push_back(name);
  return names;
}

inline ThermoClosure make_closure(const std::string& name, const ClosureParams& params,
                                  double tau) {
  ClosureFactory factory;
  {
    auto& reg = detail::closure_registry();
    std::lock_guard lock(reg.mutex);
    auto it = reg.factories.find(name);
    if (it == reg.factories.end()) throw ConfigError("unknown closure '" + name + "'");
    factory = it->second;
  }
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  return factory(params, tau);
}

}  // namespace cattaneo
