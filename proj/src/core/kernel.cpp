#include "sve/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "sve/error.hpp"
#include "sve/expr.hpp"

namespace sve {

namespace {

constexpr std::array<std::pair<KernelFamily, std::string_view>, 4> kFamilies{{
    {KernelFamily::constant, "constant"},
    {KernelFamily::exponential_convolution, "exponential_convolution"},
    {KernelFamily::smooth_bivariate, "smooth_bivariate"},
    {KernelFamily::fractional, "fractional"},
}};

void require_params(std::string_view family, std::span<const double> params, std::size_t n) {
  if (params.size() != n) {
    std::ostringstream os;
    os << family << " kernel expects " << n << " parameter(s), got " << params.size();
    throw Error(ErrorKind::invalid_parameter, os.str());
  }
  for (double p : params) {
    if (!std::isfinite(p)) {
      throw Error(ErrorKind::invalid_parameter, std::string(family) + " kernel parameters must be finite");
    }
  }
}

// Attaches eval from a convolution profile so both routes share one code path.
void attach_profile(KernelSpec& k, ProfileFn profile) {
  k.is_convolution = true;
  k.convolution_profile = profile;
  k.eval = [profile](double s, double t) { return profile(t - s); };
}

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::missing_derivative: return "missing-derivative";
    case ErrorKind::quadrature_failure: return "quadrature-failure";
    case ErrorKind::incompatible_grid: return "incompatible-grid";
    case ErrorKind::non_finite: return "non-finite-value";
    case ErrorKind::not_convolution: return "not-convolution";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::insufficient_paths: return "insufficient-paths";
    case ErrorKind::missing_aux: return "missing-aux";
    case ErrorKind::identical_config: return "identical-config";
    case ErrorKind::construction_failure: return "construction-failure";
    case ErrorKind::root_not_bracketed: return "root-not-bracketed";
    case ErrorKind::divergence_audit: return "divergence-audit";
    case ErrorKind::syntax: return "syntax";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::string_view to_string(KernelFamily family) noexcept {
  for (const auto& [f, name] : kFamilies) {
    if (f == family) return name;
  }
  return "unknown";
}

std::vector<std::string_view> kernel_family_names() {
  std::vector<std::string_view> names;
  for (const auto& entry : kFamilies) names.push_back(entry.second);
  return names;
}

KernelFamily parse_kernel_family(std::string_view name) {
  for (const auto& [f, n] : kFamilies) {
    if (n == name) return f;
  }
  std::string msg = "unknown kernel family \"" + std::string(name) + "\"; valid families:";
  for (const auto& entry : kFamilies) msg += " " + std::string(entry.second);
  throw Error(ErrorKind::invalid_parameter, msg);
}

double eval_kernel(const KernelSpec& k, double s, double t) {
  if (!k.domain.contains(s, t)) {
    std::ostringstream os;
    os << "kernel " << k.name << " evaluated outside the triangle: (s,t) = (" << s << ", " << t
       << "), T = " << k.domain.T;
    throw Error(ErrorKind::domain, os.str());
  }
  return k.eval(s, t);
}

KernelSpec make_builtin_kernel(KernelFamily family, std::span<const double> params, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorKind::invalid_parameter, "kernel horizon T must be positive and finite");
  }
  KernelSpec k;
  k.name = std::string(to_string(family));
  k.params.assign(params.begin(), params.end());
  k.domain = Triangle{T};

  switch (family) {
    case KernelFamily::constant: {
      require_params(k.name, params, 1);
      const double c = params[0];
      attach_profile(k, [c](double) { return c; });
      k.d1 = [](double, double) { return 0.0; };
      k.d2 = [](double, double) { return 0.0; };
      k.d21 = [](double, double) { return 0.0; };
      k.diag_lower_bound = std::abs(c);
      break;
    }
    case KernelFamily::exponential_convolution: {
      require_params(k.name, params, 1);
      const double lambda = params[0];
      if (lambda < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "exponential_convolution requires lambda >= 0");
      }
      attach_profile(k, [lambda](double u) { return std::exp(-lambda * u); });
      k.d1 = [lambda](double s, double t) { return lambda * std::exp(-lambda * (t - s)); };
      k.d2 = [lambda](double s, double t) { return -lambda * std::exp(-lambda * (t - s)); };
      k.d21 = [lambda](double s, double t) { return -lambda * lambda * std::exp(-lambda * (t - s)); };
      k.diag_lower_bound = 1.0;
      break;
    }
    case KernelFamily::smooth_bivariate: {
      // K(s,t) = (1 + a s) exp(-b (t - s))
      require_params(k.name, params, 2);
      const double a = params[0];
      const double b = params[1];
      const double diag_min = std::min(1.0, 1.0 + a * T);
      if (!(diag_min > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "smooth_bivariate requires 1 + a*T > 0");
      }
      k.eval = [a, b](double s, double t) { return (1.0 + a * s) * std::exp(-b * (t - s)); };
      k.d1 = [a, b](double s, double t) { return (a + b * (1.0 + a * s)) * std::exp(-b * (t - s)); };
      k.d2 = [a, b](double s, double t) { return -b * (1.0 + a * s) * std::exp(-b * (t - s)); };
      k.d21 = [a, b](double s, double t) {
        return -b * (a + b * (1.0 + a * s)) * std::exp(-b * (t - s));
      };
      k.diag_lower_bound = diag_min;
      break;
    }
    case KernelFamily::fractional: {
      // k(u) = u^(H - 1/2); singular on the diagonal for H < 1/2, vanishing for H > 1/2.
      require_params(k.name, params, 1);
      const double H = params[0];
      if (!(H > 0.0 && H < 1.0)) {
        throw Error(ErrorKind::invalid_parameter, "fractional kernel requires H in (0, 1)");
      }
      const double p = H - 0.5;
      attach_profile(k, [p](double u) { return std::pow(u, p); });
      if (p == 0.0) {
        k.d1 = [](double, double) { return 0.0; };
        k.d2 = [](double, double) { return 0.0; };
        k.d21 = [](double, double) { return 0.0; };
        k.diag_lower_bound = 1.0;
      } else {
        k.d1 = [p](double s, double t) { return -p * std::pow(t - s, p - 1.0); };
        k.d2 = [p](double s, double t) { return p * std::pow(t - s, p - 1.0); };
        k.d21 = [p](double s, double t) { return -p * (p - 1.0) * std::pow(t - s, p - 2.0); };
        k.diag_lower_bound = 0.0;
        k.outside_assumption = true;
        k.assumption_note = p < 0.0
            ? "fractional kernel with H < 1/2 is infinite on the diagonal (not continuous on the triangle)"
            : "fractional kernel with H > 1/2 vanishes on the diagonal (no positive lower bound)";
      }
      k.gamma = std::min(H, 0.5);
      break;
    }
  }
  return k;
}

// ---------------------------------------------------------------------------

KernelSpec make_expression_kernel(const KernelExpressions& source, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorKind::invalid_parameter, "kernel horizon T must be positive and finite");
  }
  if (!(source.gamma > 0.0 && source.gamma <= 0.5)) throw Error(ErrorKind::invalid_parameter, "gamma out of (0, 0.5]");
  if (!(source.epsilon > 0.0)) throw Error(ErrorKind::invalid_parameter, "epsilon must be positive");
  if (!(source.alpha >= 0.0 && source.alpha < 0.5)) throw Error(ErrorKind::invalid_parameter, "alpha out of [0, 0.5)");
  auto compile = [](const std::string& text) -> KernelFn {
    if (text.empty()) return {};
    auto e = Expression::parse(text, "s", "t");
    return [e](double s, double t) { return e(s, t); };
  };
  KernelSpec k;
  k.name = "expression";
  k.domain = Triangle{T};
  k.eval = compile(source.eval);
  if (!k.eval) throw Error(ErrorKind::invalid_parameter, "kernel expression is empty");
  k.d1 = compile(source.d1);
  k.d2 = compile(source.d2);
  k.d21 = compile(source.d21);
  k.gamma = source.gamma;
  k.epsilon = source.epsilon;
  k.alpha = source.alpha;
  k.diag_lower_bound = source.diag_lower_bound;
  return k;
}

bool AssumptionReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

const AuditCheck* AssumptionReport::find(std::string_view id) const noexcept {
  for (const auto& c : checks) {
    if (c.condition == id) return &c;
  }
  return nullptr;
}

namespace {

constexpr double kDiagonalGap = 1e-12;
constexpr int kCoarseResolution = 8;

std::vector<double> lattice_nodes(double T, int resolution) {
  std::vector<double> nodes(static_cast<std::size_t>(resolution) + 1);
  for (int i = 0; i <= resolution; ++i) {
    nodes[static_cast<std::size_t>(i)] = T * (static_cast<double>(i) / static_cast<double>(resolution));
  }
  return nodes;
}

struct Extremum {
  double value = -std::numeric_limits<double>::infinity();
  double s = 0.0;
  double t = 0.0;
  bool non_finite = false;
};

// Sweeps all lattice pairs s <= t; `ratio` returns NaN for points it skips.
template <class Ratio>
Extremum sweep_max(const std::vector<double>& nodes, Ratio&& ratio) {
  Extremum best;
  for (std::size_t b = 0; b < nodes.size(); ++b) {
    for (std::size_t a = 0; a <= b; ++a) {
      const double s = nodes[a];
      const double t = nodes[b];
      const std::optional<double> r = ratio(s, t);
      if (!r) continue;
      if (!std::isfinite(*r)) {
        if (!best.non_finite) {
          best = Extremum{std::numeric_limits<double>::infinity(), s, t, true};
        }
        continue;
      }
      if (!best.non_finite && *r > best.value) best = Extremum{*r, s, t, false};
    }
  }
  if (best.value == -std::numeric_limits<double>::infinity()) best.value = 0.0;
  return best;
}

double tolerance_for(const AuditOptions& options, std::string_view id) {
  auto it = options.tolerances.find(std::string(id));
  return it == options.tolerances.end() ? 1e-9 : it->second;
}

// Upper-bound condition with a fitted constant: fit on the coarse lattice,
// check on the full lattice against safety_factor * fitted + tolerance.
template <class Ratio>
AuditCheck fitted_upper_bound(std::string_view id, const std::vector<double>& coarse,
                              const std::vector<double>& full, const AuditOptions& options,
                              Ratio&& ratio) {
  AuditCheck check;
  check.condition = std::string(id);
  const double tol = tolerance_for(options, id);
  const Extremum fit = sweep_max(coarse, ratio);
  const Extremum worst = sweep_max(full, ratio);
  if (fit.non_finite || worst.non_finite) {
    const Extremum& w = worst.non_finite ? worst : fit;
    check.passed = false;
    check.margin = -std::numeric_limits<double>::infinity();
    check.witness_s = w.s;
    check.witness_t = w.t;
    check.fitted_constant = fit.non_finite ? std::numeric_limits<double>::infinity() : fit.value;
    return check;
  }
  check.fitted_constant = fit.value;
  check.margin = options.safety_factor * fit.value + tol - worst.value;
  check.passed = check.margin >= 0.0;
  check.witness_s = worst.s;
  check.witness_t = worst.t;
  return check;
}

// Composite midpoint rule on [lo, hi]; never evaluates at the endpoints.
template <class F>
double midpoint_rule(double lo, double hi, int nodes, F&& f) {
  const double h = (hi - lo) / nodes;
  double sum = 0.0;
  for (int q = 0; q < nodes; ++q) {
    const double u = lo + (q + 0.5) * h;
    const double v = f(u);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite audit integrand at interior node u = " << u << " of [" << lo << ", " << hi << "]";
      throw Error(ErrorKind::quadrature_failure, os.str());
    }
    sum += v;
  }
  return sum * h;
}

}  // namespace

AssumptionReport audit_assumption_kernels(const KernelSpec& k_mu, const KernelSpec& k_sigma,
                                          const AuditOptions& options) {
  if (options.resolution < kCoarseResolution) {
    throw Error(ErrorKind::invalid_parameter, "audit resolution must be >= 8");
  }
  if (options.quadrature_nodes < 1 || !(options.safety_factor >= 1.0)) {
    throw Error(ErrorKind::invalid_parameter, "audit needs quadrature_nodes >= 1 and safety_factor >= 1");
  }
  if (!k_mu.d2) {
    throw Error(ErrorKind::missing_derivative, "kernel_mu (" + k_mu.name + ") lacks d2");
  }
  if (!k_sigma.d1 || !k_sigma.d2 || !k_sigma.d21) {
    throw Error(ErrorKind::missing_derivative, "kernel_sigma (" + k_sigma.name + ") lacks d1/d2/d21");
  }
  const double T = k_sigma.domain.T;
  const auto coarse = lattice_nodes(T, kCoarseResolution);
  const auto full = lattice_nodes(T, options.resolution);
  const int nq = options.quadrature_nodes;

  AssumptionReport report;
  report.grid_resolution = options.resolution;
  for (auto id : {condition::kmu_d2_bounded, condition::ksigma_diag_lower_bound,
                  condition::ksigma_holder_integral, condition::ksigma_singularity_bound}) {
    report.tolerances[std::string(id)] = tolerance_for(options, id);
  }

  // (a) d2 K_mu bounded on the triangle.
  report.checks.push_back(fitted_upper_bound(
      condition::kmu_d2_bounded, lattice_nodes(k_mu.domain.T, kCoarseResolution),
      lattice_nodes(k_mu.domain.T, options.resolution), options,
      [&](double s, double t) -> std::optional<double> { return std::abs(k_mu.d2(s, t)); }));

  // (b) |K_sigma(t,t)| >= C on the diagonal.
  {
    AuditCheck check;
    check.condition = std::string(condition::ksigma_diag_lower_bound);
    const double tol = tolerance_for(options, condition::ksigma_diag_lower_bound);
    double worst = std::numeric_limits<double>::infinity();
    double witness = 0.0;
    bool non_finite = false;
    for (double t : full) {
      const double v = std::abs(k_sigma.eval(t, t));
      if (!std::isfinite(v)) {
        non_finite = true;
        witness = t;
        break;
      }
      if (v < worst) {
        worst = v;
        witness = t;
      }
    }
    check.fitted_constant = k_sigma.diag_lower_bound;
    check.witness_s = witness;
    check.witness_t = witness;
    if (non_finite) {
      check.margin = -std::numeric_limits<double>::infinity();
      check.passed = false;
    } else {
      check.margin = worst - k_sigma.diag_lower_bound;
      // Without a declared bound the diagonal must still stay away from zero.
      check.passed = check.margin >= -tol && worst > 0.0;
    }
    report.checks.push_back(check);
  }

  // (c) int_0^s |K(u,t) - K(u,s)|^(2+eps) du <= C |t-s|^(gamma (2+eps)).
  {
    const double power = 2.0 + k_sigma.epsilon;
    const double rate = k_sigma.gamma * power;
    auto ratio = [&](double s, double t) -> std::optional<double> {
      if (t - s < kDiagonalGap || s <= 0.0) return std::nullopt;
      const double integral = midpoint_rule(0.0, s, nq, [&](double u) {
        return std::pow(std::abs(k_sigma.eval(u, t) - k_sigma.eval(u, s)), power);
      });
      return integral / std::pow(t - s, rate);
    };
    report.checks.push_back(
        fitted_upper_bound(condition::ksigma_holder_integral, coarse, full, options, ratio));
  }

  // (d) |d1 K(s,t)| + |d2 K(s,s)| + int_s^t |d21 K(s,u)| du <= C (t-s)^(-alpha).
  {
    const double alpha = k_sigma.alpha;
    auto ratio = [&](double s, double t) -> std::optional<double> {
      if (t - s < kDiagonalGap) {
        if (alpha > 0.0) return std::nullopt;  // right-hand side is infinite
        return std::abs(k_sigma.d1(s, s)) + std::abs(k_sigma.d2(s, s));
      }
      const double integral =
          midpoint_rule(s, t, nq, [&](double u) { return std::abs(k_sigma.d21(s, u)); });
      const double lhs = std::abs(k_sigma.d1(s, t)) + std::abs(k_sigma.d2(s, s)) + integral;
      return lhs * std::pow(t - s, alpha);
    };
    report.checks.push_back(
        fitted_upper_bound(condition::ksigma_singularity_bound, coarse, full, options, ratio));
  }
  return report;
}

}  // namespace sve
