#pragma once

#include <iosfwd>
#include <string>

#include "sve/analysis.hpp"
#include "sve/coeff.hpp"
#include "sve/kernel.hpp"

namespace sve {

// JSON text of each report, tagged with a `schema` field. Numbers are written
// in shortest round-trip form and NaN as null, so equal reports give equal bytes.
std::string to_json(const MomentReport& r);
std::string to_json(const HolderEstimate& r);
std::string cauchy_json(const ConvergenceReport& r);
std::string coupling_json(const ConvergenceReport& r);
std::string to_json(const DecompositionReport& r, const DyadicGrid& grid);
std::string to_json(const DecompositionStudy& r);
std::string to_json(const AssumptionReport& r);

// CSV for plotting, one row per time point / lag / level.
void write_csv(std::ostream& out, const MomentReport& r);
void write_csv(std::ostream& out, const HolderEstimate& r);
void write_csv(std::ostream& out, const ConvergenceReport& r);
void write_csv(std::ostream& out, const DecompositionReport& r, const DyadicGrid& grid);
void write_csv(std::ostream& out, const DecompositionStudy& r);

}  // namespace sve
