#include "sve/report_io.hpp"

#include <iomanip>
#include <json.hpp>
#include <ostream>

namespace sve {

using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json grid_json(const DyadicGrid& g) {
  return {{"T", g.horizon()}, {"level", g.level()}, {"base", g.base()}, {"n_steps", g.n_steps()}};
}

json convergence_body(const ConvergenceReport& r) {
  json gaps = json::array();
  for (std::size_t k = 0; k < r.gaps.size(); ++k) {
    gaps.push_back({{"level", r.gap_levels[k]}, {"gap", r.gaps[k]}, {"witness_index", r.gap_witness[k]}});
  }
  return {{"levels", r.levels}, {"gaps", gaps}, {"fitted_rate", r.fitted_rate}, {"n_paths", r.n_paths}};
}

}  // namespace

std::string to_json(const MomentReport& r) {
  json j{{"schema", "moment-v1"}, {"grid", grid_json(r.grid)}, {"n_paths", r.n_paths}};
  json rows = json::array();
  for (std::size_t k = 0; k < r.q_list.size(); ++k) {
    rows.push_back({{"q", r.q_list[k]},
                    {"sup_moment", r.sup_moment[k]},
                    {"mc_stderr", r.mc_stderr[k]},
                    {"argmax_t", r.grid.point(r.argmax[k])}});
  }
  j["moments"] = rows;
  return dump(j);
}

std::string to_json(const HolderEstimate& r) {
  json j{{"schema", "holder-v1"}, {"p", r.p},          {"lags", r.lags},
         {"dropped_lags", r.dropped}, {"d_values", r.d_values}, {"beta_hat", r.beta_hat},
         {"r_squared", r.r_squared},  {"intercept", r.intercept}, {"n_paths", r.n_paths}};
  return dump(j);
}

std::string cauchy_json(const ConvergenceReport& r) {
  json j = convergence_body(r);
  j["schema"] = "cauchy-v1";
  return dump(j);
}

std::string coupling_json(const ConvergenceReport& r) {
  json j = convergence_body(r);
  j["schema"] = "coupling-v1";
  j["verdict"] = r.verdict;
  return dump(j);
}

std::string to_json(const DecompositionReport& r, const DyadicGrid& grid) {
  json j{{"schema", "decomp-v1"},
         {"grid", grid_json(grid)},
         {"residual_sup", r.residual_sup},
         {"witness_t", grid.point(r.witness)}};
  return dump(j);
}

std::string to_json(const DecompositionStudy& r) {
  json j{{"schema", "decomp-v1"},
         {"levels", r.levels},
         {"median_residual_sup", r.median_residual},
         {"max_residual_sup", r.max_residual},
         {"n_paths", r.n_paths}};
  return dump(j);
}

std::string to_json(const AssumptionReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"condition", c.condition},
                      {"passed", c.passed},
                      {"margin", c.margin},
                      {"witness", {c.witness_s, c.witness_t}},
                      {"fitted_constant", c.fitted_constant}});
  }
  json j{{"schema", "audit-v1"},
         {"passed", r.passed()},
         {"grid_resolution", r.grid_resolution},
         {"tolerances", r.tolerances},
         {"checks", checks}};
  return dump(j);
}

// ---------------------------------------------------------------------------

void write_csv(std::ostream& out, const MomentReport& r) {
  out << std::setprecision(17);
  if (r.per_time.empty()) {
    out << "q,sup_moment,mc_stderr,argmax_t\n";
    for (std::size_t k = 0; k < r.q_list.size(); ++k) {
      out << r.q_list[k] << ',' << r.sup_moment[k] << ',' << r.mc_stderr[k] << ',' << r.grid.point(r.argmax[k])
          << '\n';
    }
    return;
  }
  out << 't';
  for (double q : r.q_list) out << ",m_" << q;
  out << '\n';
  for (std::size_t j = 0; j < r.per_time.front().size(); ++j) {
    out << r.grid.point(j);
    for (const auto& curve : r.per_time) out << ',' << curve[j];
    out << '\n';
  }
}

void write_csv(std::ostream& out, const HolderEstimate& r) {
  out << std::setprecision(17) << "lag,d_value\n";
  for (std::size_t k = 0; k < r.lags.size(); ++k) out << r.lags[k] << ',' << r.d_values[k] << '\n';
}

void write_csv(std::ostream& out, const ConvergenceReport& r) {
  out << std::setprecision(17) << "level,gap\n";
  for (std::size_t k = 0; k < r.gaps.size(); ++k) out << r.gap_levels[k] << ',' << r.gaps[k] << '\n';
}

void write_csv(std::ostream& out, const DecompositionReport& r, const DyadicGrid& grid) {
  out << std::setprecision(17) << "t,M,A\n";
  for (std::size_t j = 0; j < r.martingale.size(); ++j) {
    out << grid.point(j) << ',' << r.martingale[j] << ',' << r.drift[j] << '\n';
  }
}

void write_csv(std::ostream& out, const DecompositionStudy& r) {
  out << std::setprecision(17) << "level,median_residual_sup,max_residual_sup\n";
  for (std::size_t k = 0; k < r.levels.size(); ++k) {
    out << r.levels[k] << ',' << r.median_residual[k] << ',' << r.max_residual[k] << '\n';
  }
}

}  // namespace sve
