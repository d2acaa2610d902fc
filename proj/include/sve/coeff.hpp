#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sve {

using CoeffFn = std::function<double(double t, double x)>;
using ModulusFn = std::function<double(double)>;

enum class CoeffFamily { linear_ou, holder_power, constant_sigma, custom };

std::string_view to_string(CoeffFamily family) noexcept;
CoeffFamily parse_coeff_family(std::string_view name);
std::vector<std::string_view> coeff_family_names();

/// Named parameters of a built-in family in positional order, with defaults
/// for trailing optional ones (NaN marks a required parameter).
struct FamilyParam {
  std::string_view name;
  double default_value;
};
std::span<const FamilyParam> coeff_family_params(CoeffFamily family);

/// Drift/diffusion pair with the regularity constants it claims.
struct CoefficientPair {
  std::string name;
  std::vector<double> params;

  CoeffFn mu;
  CoeffFn sigma;

  double growth_const = 1.0;              // |mu| + |sigma| <= C (1 + |x|)
  std::optional<double> lipschitz_const;  // of mu in x
  std::optional<double> holder_const;     // of sigma in x, order 1/2 + xi
  double xi = 0.0;                        // in [0, 1/2]

  ModulusFn osgood_kappa;  // drift modulus; empty if not supplied
  ModulusFn yw_rho;        // diffusion modulus; empty if not supplied

  std::string mu_source;     // expression text for custom pairs
  std::string sigma_source;
};

struct InitialCondition {
  std::function<double(double)> x0;
  double holder_beta_claim = 1.0;
  std::string source;

  static InitialCondition constant(double value);
};

/// Spot-checks that x0 is finite on [0,T] and has no jumps at a fine sampling.
void validate_initial_condition(const InitialCondition& ic, double T);

CoefficientPair make_builtin_coeffs(CoeffFamily family, std::span<const double> params);

struct CustomCoeffMetadata {
  double growth_const = 1.0;
  std::optional<double> lipschitz_const;
  std::optional<double> holder_const;
  double xi = 0.0;
};

/// Coefficients from expression strings over (t, x).
CoefficientPair make_custom_coeffs(std::string_view mu_expr, std::string_view sigma_expr,
                                   const CustomCoeffMetadata& meta);

/// Truncates the state argument to the ball of radius n.
CoefficientPair localize(const CoefficientPair& c, double n);

/// sup over t and distinct grid pairs of |f(t,x) - f(t,y)| / |x - y|^order.
double estimate_holder_modulus(const CoeffFn& f, double order, std::span<const double> t_grid,
                               std::span<const double> x_grid);

struct GrowthCheck {
  bool passed = false;
  double worst_ratio = 0.0;
  double witness_t = 0.0;
  double witness_x = 0.0;
};

GrowthCheck check_linear_growth(const CoefficientPair& c, std::span<const double> t_grid,
                                std::span<const double> x_grid, double tolerance = 1e-9);

/// Finite falsification of a divergent integral at zero: the partial
/// integrals over [delta, upper] for delta = 1e-2 ... 1e-8 must keep growing,
/// with the last per-decade increment at least `min_increment_ratio` times the first.
struct DivergenceAudit {
  bool passed = false;
  std::vector<double> deltas;
  std::vector<double> integrals;
  std::string detail;
};

DivergenceAudit audit_divergence(const ModulusFn& integrand, double upper = 1.0,
                                 double min_increment_ratio = 0.5);

/// Divergence of int_0 rho(x)^-2 dx.
DivergenceAudit audit_yw_divergence(const ModulusFn& rho);

/// Divergence of int_0 dx / (kappa(x^(1/q)) + x^(1/q))^q, for one q.
DivergenceAudit audit_osgood_divergence(const ModulusFn& kappa, double q);

/// rho(0) == 0 and rho strictly increasing on a sampled grid of (0, upper].
bool check_modulus_shape(const ModulusFn& rho, double upper = 1.0);

}  // namespace sve
