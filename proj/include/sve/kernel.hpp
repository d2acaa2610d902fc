#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sve {

/// The closed triangle {0 <= s <= t <= T} on which Volterra kernels live.
struct Triangle {
  double T = 1.0;

  bool contains(double s, double t) const noexcept {
    return 0.0 <= s && s <= t && t <= T;
  }
};

using KernelFn = std::function<double(double s, double t)>;
using ProfileFn = std::function<double(double lag)>;

enum class KernelFamily { constant, exponential_convolution, smooth_bivariate, fractional };

std::string_view to_string(KernelFamily family) noexcept;
KernelFamily parse_kernel_family(std::string_view name);
std::vector<std::string_view> kernel_family_names();

/// A two-argument kernel K(s,t) with optional partial derivatives and the
/// regularity metadata the kernel claims for itself.
///
/// Handles are pure and may be invoked concurrently. An empty derivative
/// handle means the derivative is not provided.
struct KernelSpec {
  std::string name;
  std::vector<double> params;
  Triangle domain;

  KernelFn eval;
  KernelFn d1;   // d/ds K(s,t)
  KernelFn d2;   // d/dt K(s,t)
  KernelFn d21;  // d/dt d/ds K(s,t)

  double gamma = 0.5;            // Hölder exponent, in (0, 1/2]
  double epsilon = 1.0;          // integrability surplus of the Hölder condition
  double alpha = 0.0;            // weak-singularity exponent, in [0, 1/2)
  double diag_lower_bound = 0.0; // |K(t,t)| >= this; zero makes no claim

  bool is_convolution = false;
  ProfileFn convolution_profile;  // k with K(s,t) = k(t - s)

  /// Set for kernels known to violate the continuity/diagonal requirements
  /// (e.g. the fractional power kernel). They still run in the scheme.
  bool outside_assumption = false;
  std::string assumption_note;
};

/// K(s,t) with a domain check against the kernel's triangle.
double eval_kernel(const KernelSpec& k, double s, double t);

KernelSpec make_builtin_kernel(KernelFamily family, std::span<const double> params, double T);

/// A kernel from expression strings over (s, t). Derivative strings may be
/// empty; the metadata is taken as declared.
struct KernelExpressions {
  std::string eval;
  std::string d1;
  std::string d2;
  std::string d21;
  double gamma = 0.5;
  double epsilon = 1.0;
  double alpha = 0.0;
  double diag_lower_bound = 0.0;
};

KernelSpec make_expression_kernel(const KernelExpressions& source, double T);

// ---------------------------------------------------------------------------
// Numerical audit of the kernel regularity conditions.

namespace condition {
inline constexpr std::string_view kmu_d2_bounded = "kmu_d2_bounded";
inline constexpr std::string_view ksigma_diag_lower_bound = "ksigma_diag_lower_bound";
inline constexpr std::string_view ksigma_holder_integral = "ksigma_holder_integral";
inline constexpr std::string_view ksigma_singularity_bound = "ksigma_singularity_bound";
}  // namespace condition

struct AuditCheck {
  std::string condition;
  bool passed = false;
  double margin = 0.0;          // slack of the worst lattice point; negative on failure
  double witness_s = 0.0;
  double witness_t = 0.0;
  double fitted_constant = 0.0; // constant fitted on the coarse sub-lattice
};

struct AssumptionReport {
  std::vector<AuditCheck> checks;
  int grid_resolution = 0;
  std::map<std::string, double> tolerances;

  bool passed() const noexcept;
  const AuditCheck* find(std::string_view condition) const noexcept;
};

struct AuditOptions {
  int resolution = 64;                       // lattice intervals per axis, >= 8
  std::map<std::string, double> tolerances;  // per-condition absolute slack, default 1e-9
  double safety_factor = 1.5;                // multiplies every fitted constant
  int quadrature_nodes = 64;                 // midpoint nodes per audit integral
};

/// Audits the kernel regularity conditions on a lattice of the triangle.
/// Constants are fitted on the fixed 8x8 sub-lattice and checked (times the
/// safety factor) on the full lattice, so results are monotone in resolution.
AssumptionReport audit_assumption_kernels(const KernelSpec& k_mu, const KernelSpec& k_sigma,
                                          const AuditOptions& options = {});

}  // namespace sve
