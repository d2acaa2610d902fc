#pragma once

#include <optional>

#include "sve/scheme.hpp"

namespace sve::detail {

/// Tables for both kernels when the chosen route tabulates; nullopt for generic.
struct RouteTables {
  std::optional<LagWeights> mu;
  std::optional<LagWeights> sigma;
};

RouteTables prepare_route(const KernelSpec& k_mu, const KernelSpec& k_sigma, const DyadicGrid& grid,
                          const SchemeConfig& cfg);

PathSample run_scheme(const KernelSpec& k_mu, const KernelSpec& k_sigma, const CoefficientPair& c,
                      const InitialCondition& x0, std::span<const double> increments, std::uint64_t seed,
                      const DyadicGrid& grid, const SchemeConfig& cfg, const RouteTables& tables);

}  // namespace sve::detail
