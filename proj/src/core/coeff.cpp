#include "sve/coeff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "numeric.hpp"
#include "sve/error.hpp"
#include "sve/expr.hpp"

namespace sve {

namespace {

constexpr double kRequired = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<FamilyParam, 3> kLinearOuParams{{{"theta", kRequired}, {"sigma0", kRequired}, {"mean", 0.0}}};
constexpr std::array<FamilyParam, 4> kHolderPowerParams{
    {{"c", kRequired}, {"xi", kRequired}, {"a", 0.0}, {"b", 0.0}}};
constexpr std::array<FamilyParam, 2> kConstantSigmaParams{{{"sigma0", kRequired}, {"mu0", 0.0}}};

constexpr std::array<std::pair<CoeffFamily, std::string_view>, 4> kFamilies{{
    {CoeffFamily::linear_ou, "linear_ou"},
    {CoeffFamily::holder_power, "holder_power"},
    {CoeffFamily::constant_sigma, "constant_sigma"},
    {CoeffFamily::custom, "custom"},
}};

std::vector<double> resolve_params(CoeffFamily family, std::span<const double> given) {
  const auto spec = coeff_family_params(family);
  std::size_t required = 0;
  for (const auto& p : spec) {
    if (std::isnan(p.default_value)) ++required;
  }
  if (given.size() < required || given.size() > spec.size()) {
    std::ostringstream os;
    os << to_string(family) << " expects " << required << ".." << spec.size() << " parameters, got "
       << given.size();
    throw Error(ErrorKind::invalid_parameter, os.str());
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double v = i < given.size() ? given[i] : spec[i].default_value;
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::invalid_parameter,
                  std::string(to_string(family)) + " parameter " + std::string(spec[i].name) + " must be finite");
    }
    out.push_back(v);
  }
  return out;
}

double positive_or_one(double c) { return c > 0.0 ? c : 1.0; }

}  // namespace

std::string_view to_string(CoeffFamily family) noexcept {
  for (const auto& [f, name] : kFamilies) {
    if (f == family) return name;
  }
  return "unknown";
}

std::vector<std::string_view> coeff_family_names() {
  std::vector<std::string_view> names;
  for (const auto& entry : kFamilies) names.push_back(entry.second);
  return names;
}

CoeffFamily parse_coeff_family(std::string_view name) {
  for (const auto& [f, n] : kFamilies) {
    if (n == name) return f;
  }
  std::string msg = "unknown coefficient family \"" + std::string(name) + "\"; valid families:";
  for (const auto& entry : kFamilies) msg += " " + std::string(entry.second);
  throw Error(ErrorKind::invalid_parameter, msg);
}

std::span<const FamilyParam> coeff_family_params(CoeffFamily family) {
  switch (family) {
    case CoeffFamily::linear_ou: return kLinearOuParams;
    case CoeffFamily::holder_power: return kHolderPowerParams;
    case CoeffFamily::constant_sigma: return kConstantSigmaParams;
    case CoeffFamily::custom: return {};
  }
  return {};
}

InitialCondition InitialCondition::constant(double value) {
  InitialCondition ic;
  ic.x0 = [value](double) { return value; };
  ic.holder_beta_claim = 1.0;
  std::ostringstream os;
  os.precision(17);
  os << value;
  ic.source = os.str();
  return ic;
}

void validate_initial_condition(const InitialCondition& ic, double T) {
  if (!ic.x0) throw Error(ErrorKind::invalid_parameter, "initial condition has no x0 function");
  if (!(ic.holder_beta_claim > 0.0 && ic.holder_beta_claim <= 1.0)) {
    throw Error(ErrorKind::invalid_parameter, "x0 Hölder claim must lie in (0, 1]");
  }
  // Jumps show up as increments that do not shrink when the step is refined 16x.
  constexpr int kSamples = 1024;
  const double h = T / kSamples;
  double prev = ic.x0(0.0);
  for (int i = 1; i <= kSamples; ++i) {
    const double t = T * (static_cast<double>(i) / kSamples);
    const double v = ic.x0(t);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "x0 is not finite at t = " << t;
      throw Error(ErrorKind::invalid_parameter, os.str());
    }
    const double jump = std::abs(v - prev);
    if (jump > 0.0) {
      const double fine = std::abs(ic.x0(t) - ic.x0(t - h / 16.0));
      const double coarse_scale = std::max(std::abs(v), 1.0);
      if (jump > 1e-3 * coarse_scale && fine > 0.5 * jump) {
        std::ostringstream os;
        os << "x0 appears discontinuous near t = " << t;
        throw Error(ErrorKind::invalid_parameter, os.str());
      }
    }
    prev = v;
  }
}

CoefficientPair make_builtin_coeffs(CoeffFamily family, std::span<const double> params) {
  if (family == CoeffFamily::custom) {
    throw Error(ErrorKind::invalid_parameter, "custom coefficients are built from expressions, not parameters");
  }
  const std::vector<double> p = resolve_params(family, params);
  CoefficientPair c;
  c.name = std::string(to_string(family));
  c.params = p;

  switch (family) {
    case CoeffFamily::linear_ou: {
      const double theta = p[0];
      const double sigma0 = p[1];
      const double mean = p[2];
      c.mu = [theta, mean](double, double x) { return theta * (mean - x); };
      c.sigma = [sigma0](double, double) { return sigma0; };
      c.growth_const = positive_or_one(std::max(std::abs(theta) * std::abs(mean) + std::abs(sigma0), std::abs(theta)));
      c.lipschitz_const = std::abs(theta);
      c.holder_const = 0.0;  // constant diffusion: Hölder of every order with constant 0
      c.xi = 0.5;
      const double kappa_scale = positive_or_one(std::abs(theta));
      c.osgood_kappa = [kappa_scale](double u) { return kappa_scale * u; };
      c.yw_rho = [](double u) { return u; };
      break;
    }
    case CoeffFamily::holder_power: {
      const double scale = p[0];
      const double xi = p[1];
      const double a = p[2];
      const double b = p[3];
      if (!(xi >= 0.0 && xi <= 0.5)) {
        throw Error(ErrorKind::invalid_parameter, "xi out of [0, 0.5]");
      }
      const double order = 0.5 + xi;
      c.mu = [a, b](double, double x) { return a - b * x; };
      c.sigma = [scale, order](double, double x) { return scale * std::pow(std::abs(x), order); };
      c.growth_const = positive_or_one(std::max(std::abs(a), std::abs(b)) + std::abs(scale));
      c.lipschitz_const = std::abs(b);
      c.holder_const = std::abs(scale);
      c.xi = xi;
      const double kappa_scale = positive_or_one(std::abs(b));
      c.osgood_kappa = [kappa_scale](double u) { return kappa_scale * u; };
      const double rho_scale = positive_or_one(std::abs(scale));
      c.yw_rho = [rho_scale, order](double u) { return rho_scale * std::pow(u, order); };
      break;
    }
    case CoeffFamily::constant_sigma: {
      const double sigma0 = p[0];
      const double mu0 = p[1];
      c.mu = [mu0](double, double) { return mu0; };
      c.sigma = [sigma0](double, double) { return sigma0; };
      c.growth_const = positive_or_one(std::abs(mu0) + std::abs(sigma0));
      c.lipschitz_const = 0.0;
      c.holder_const = 0.0;
      c.xi = 0.5;
      c.osgood_kappa = [](double u) { return u; };
      c.yw_rho = [](double u) { return u; };
      break;
    }
    case CoeffFamily::custom:
      break;
  }
  return c;
}

CoefficientPair make_custom_coeffs(std::string_view mu_expr, std::string_view sigma_expr,
                                   const CustomCoeffMetadata& meta) {
  if (!(meta.xi >= 0.0 && meta.xi <= 0.5)) {
    throw Error(ErrorKind::invalid_parameter, "xi out of [0, 0.5]");
  }
  if (!(meta.growth_const > 0.0) || !std::isfinite(meta.growth_const)) {
    throw Error(ErrorKind::invalid_parameter, "growth_const must be positive and finite");
  }
  const Expression mu = Expression::parse(mu_expr);
  const Expression sigma = Expression::parse(sigma_expr);
  CoefficientPair c;
  c.name = "custom";
  c.mu = [mu](double t, double x) { return mu(t, x); };
  c.sigma = [sigma](double t, double x) { return sigma(t, x); };
  c.mu_source = std::string(mu_expr);
  c.sigma_source = std::string(sigma_expr);
  c.growth_const = meta.growth_const;
  c.lipschitz_const = meta.lipschitz_const;
  c.holder_const = meta.holder_const;
  c.xi = meta.xi;
  if (meta.lipschitz_const) {
    const double k = positive_or_one(*meta.lipschitz_const);
    c.osgood_kappa = [k](double u) { return k * u; };
  }
  if (meta.holder_const) {
    const double k = positive_or_one(*meta.holder_const);
    const double order = 0.5 + meta.xi;
    c.yw_rho = [k, order](double u) { return k * std::pow(u, order); };
  }
  return c;
}

CoefficientPair localize(const CoefficientPair& c, double n) {
  if (!(n > 0.0)) throw Error(ErrorKind::invalid_parameter, "localization radius must be positive");
  CoefficientPair out = c;
  auto clamp = [n](double x) { return std::abs(x) > n ? std::copysign(n, x) : x; };
  out.mu = [mu = c.mu, clamp](double t, double x) { return mu(t, clamp(x)); };
  out.sigma = [sigma = c.sigma, clamp](double t, double x) { return sigma(t, clamp(x)); };
  std::ostringstream os;
  os << c.name << "|localized(" << n << ")";
  out.name = os.str();
  return out;
}

double estimate_holder_modulus(const CoeffFn& f, double order, std::span<const double> t_grid,
                               std::span<const double> x_grid) {
  if (!(order > 0.0 && order <= 1.0)) {
    throw Error(ErrorKind::invalid_parameter, "Hölder order must lie in (0, 1]");
  }
  if (t_grid.empty()) throw Error(ErrorKind::degenerate, "empty t grid");
  double best = 0.0;
  bool any_pair = false;
  for (double t : t_grid) {
    std::vector<double> fx(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) fx[i] = f(t, x_grid[i]);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      for (std::size_t j = i + 1; j < x_grid.size(); ++j) {
        const double dx = std::abs(x_grid[i] - x_grid[j]);
        if (dx == 0.0) continue;
        any_pair = true;
        best = std::max(best, std::abs(fx[i] - fx[j]) / std::pow(dx, order));
      }
    }
  }
  if (!any_pair) throw Error(ErrorKind::degenerate, "x grid needs at least two distinct points");
  return best;
}

GrowthCheck check_linear_growth(const CoefficientPair& c, std::span<const double> t_grid,
                                std::span<const double> x_grid, double tolerance) {
  GrowthCheck out;
  for (double t : t_grid) {
    for (double x : x_grid) {
      const double ratio = (std::abs(c.mu(t, x)) + std::abs(c.sigma(t, x))) / (1.0 + std::abs(x));
      if (!(ratio <= out.worst_ratio)) {
        out.worst_ratio = ratio;
        out.witness_t = t;
        out.witness_x = x;
      }
    }
  }
  out.passed = std::isfinite(out.worst_ratio) && out.worst_ratio <= c.growth_const * (1.0 + tolerance);
  return out;
}

DivergenceAudit audit_divergence(const ModulusFn& integrand, double upper, double min_increment_ratio) {
  DivergenceAudit audit;
  for (int e = 2; e <= 8; ++e) {
    const double delta = std::pow(10.0, -e);
    audit.deltas.push_back(delta);
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      value = numeric::integrate_log(integrand, delta, upper, 1e-10);
    } catch (const Error& err) {
      audit.detail = err.what();
    }
    audit.integrals.push_back(value);
  }
  std::vector<double> increments;
  for (std::size_t i = 1; i < audit.integrals.size(); ++i) {
    increments.push_back(audit.integrals[i] - audit.integrals[i - 1]);
  }
  const bool finite = std::all_of(audit.integrals.begin(), audit.integrals.end(),
                                  [](double v) { return std::isfinite(v); });
  const bool growing = std::all_of(increments.begin(), increments.end(), [](double g) { return g > 0.0; });
  audit.passed = finite && growing && increments.back() >= min_increment_ratio * increments.front();
  if (audit.detail.empty()) {
    std::ostringstream os;
    os << "integral over [1e-8, " << upper << "] = " << audit.integrals.back()
       << "; last/first per-decade increment = " << increments.back() / increments.front();
    audit.detail = os.str();
  }
  return audit;
}

DivergenceAudit audit_yw_divergence(const ModulusFn& rho) {
  return audit_divergence([&rho](double x) {
    const double r = rho(x);
    return 1.0 / (r * r);
  });
}

DivergenceAudit audit_osgood_divergence(const ModulusFn& kappa, double q) {
  if (!(q > 0.0)) throw Error(ErrorKind::invalid_parameter, "Osgood audit exponent q must be positive");
  return audit_divergence([&kappa, q](double x) {
    const double root = std::pow(x, 1.0 / q);
    return 1.0 / std::pow(kappa(root) + root, q);
  });
}

bool check_modulus_shape(const ModulusFn& rho, double upper) {
  if (rho(0.0) != 0.0) return false;
  double prev = 0.0;
  for (int i = 1; i <= 256; ++i) {
    const double x = upper * std::pow(2.0, -0.125 * (256 - i));  // geometric sweep down to ~1e-10
    const double v = rho(x);
    if (!(v > prev)) return false;
    prev = v;
  }
  return true;
}

}  // namespace sve
