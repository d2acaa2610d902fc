#include "sve/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "sve/report_io.hpp"

namespace sve {

using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

bool RunResult::any_failed() const noexcept {
  return std::any_of(outcomes.begin(), outcomes.end(), [](const AnalysisOutcome& o) { return !o.ok; });
}

namespace {

struct Artifact {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::string write(const std::string& name, const std::string& content) {
    const auto file = dir_ / name;
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::io, "cannot write " + file.string());
    artifacts_.push_back({name, sha256_hex(content), content.size()});
    return name;
  }

  const std::vector<Artifact>& artifacts() const noexcept { return artifacts_; }

 private:
  std::filesystem::path dir_;
  std::vector<Artifact> artifacts_;
};

template <class Report, class... Extra>
std::string csv_text(const Report& r, const Extra&... extra) {
  std::ostringstream os;
  write_csv(os, r, extra...);
  return os.str();
}

EnsembleSpec ensemble_spec(const ExperimentConfig& cfg, unsigned level, std::size_t n_paths) {
  EnsembleSpec spec;
  spec.k_mu = cfg.k_mu;
  spec.k_sigma = cfg.k_sigma;
  spec.coeffs = cfg.coeffs;
  spec.x0 = cfg.x0;
  spec.grid = DyadicGrid(cfg.T, level);
  spec.scheme = cfg.scheme;
  spec.base_seed = cfg.base_seed;
  spec.n_paths = n_paths;
  spec.driver_level = cfg.finest_level;
  return spec;
}

CoupledProblem coupled_problem(const ExperimentConfig& cfg, std::size_t n_paths) {
  CoupledProblem pb;
  pb.k_mu = cfg.k_mu;
  pb.k_sigma = cfg.k_sigma;
  pb.coeffs = cfg.coeffs;
  pb.x0 = cfg.x0;
  pb.T = cfg.T;
  pb.base_seed = cfg.base_seed;
  pb.n_paths = n_paths;
  return pb;
}

json coefficient_audit(const ExperimentConfig& cfg, bool& passed) {
  std::vector<double> t_grid;
  for (int i = 0; i <= 8; ++i) t_grid.push_back(cfg.T * (i / 8.0));
  std::vector<double> x_grid;
  for (int i = -40; i <= 40; ++i) x_grid.push_back(0.25 * i);
  json out;
  const auto growth = check_linear_growth(cfg.coeffs, t_grid, x_grid);
  out["linear_growth"] = {{"passed", growth.passed},
                          {"worst_ratio", growth.worst_ratio},
                          {"witness", {growth.witness_t, growth.witness_x}}};
  passed = passed && growth.passed;
  if (cfg.coeffs.holder_const) {
    const double order = 0.5 + cfg.coeffs.xi;
    const double estimate = estimate_holder_modulus(cfg.coeffs.sigma, order, t_grid, x_grid);
    const bool ok = estimate <= *cfg.coeffs.holder_const * (1.0 + 1e-9) + 1e-12;
    out["sigma_holder"] = {{"passed", ok}, {"order", order}, {"declared", *cfg.coeffs.holder_const},
                           {"estimate", estimate}};
    passed = passed && ok;
  }
  if (cfg.coeffs.yw_rho) {
    const auto audit = audit_yw_divergence(cfg.coeffs.yw_rho);
    out["rho_divergence"] = {{"passed", audit.passed}, {"deltas", audit.deltas}, {"integrals", audit.integrals},
                             {"detail", audit.detail}};
    passed = passed && audit.passed;
  }
  return out;
}

json audit_json(const ExperimentConfig& cfg, int resolution, bool& passed) {
  AuditOptions options;
  options.resolution = resolution;
  const auto kernels = audit_assumption_kernels(cfg.k_mu, cfg.k_sigma, options);
  passed = kernels.passed();
  json j;
  j["schema"] = "audit-v1";
  j["kernels"] = json::parse(to_json(kernels));
  j["kernels"].erase("schema");
  j["coefficients"] = coefficient_audit(cfg, passed);
  j["passed"] = passed;
  return j;
}

void run_one(const ExperimentConfig& cfg, const AnalysisRequest& req, const RunOptions& options,
             const std::string& id, ArtifactWriter& writer, AnalysisOutcome& outcome) {
  const std::size_t n_paths = req.n_paths.value_or(cfg.n_paths);
  const unsigned level = req.level.value_or(cfg.finest_level);
  const std::vector<unsigned>& levels = req.levels.empty() ? cfg.levels : req.levels;
  auto emit = [&](const std::string& suffix, const std::string& content) {
    outcome.artifacts.push_back(writer.write(id + suffix, content));
  };
  switch (req.kind) {
    case AnalysisKind::moments: {
      const Ensemble ensemble(ensemble_spec(cfg, level, n_paths), options);
      const auto report = estimate_moments(ensemble, req.q_list, true);
      emit(".json", to_json(report));
      emit(".csv", csv_text(report));
      break;
    }
    case AnalysisKind::holder: {
      const Ensemble ensemble(ensemble_spec(cfg, level, n_paths), options);
      const auto report = estimate_holder_exponent(ensemble, req.p, req.lags);
      emit(".json", to_json(report));
      emit(".csv", csv_text(report));
      break;
    }
    case AnalysisKind::cauchy: {
      const auto report = measure_cauchy_gaps(coupled_problem(cfg, n_paths), levels, cfg.scheme, options);
      emit(".json", cauchy_json(report));
      emit(".csv", csv_text(report));
      break;
    }
    case AnalysisKind::decomposition: {
      const auto report = decomposition_study(coupled_problem(cfg, n_paths), levels, cfg.scheme, options);
      emit(".json", to_json(report));
      emit(".csv", csv_text(report));
      break;
    }
    case AnalysisKind::coupling: {
      const auto report =
          uniqueness_coupling_test(coupled_problem(cfg, n_paths), levels, cfg.scheme, req.scheme_b, options);
      emit(".json", coupling_json(report));
      emit(".csv", csv_text(report));
      break;
    }
    case AnalysisKind::audit: {
      bool passed = true;
      emit(".json", audit_json(cfg, req.resolution, passed).dump(2) + "\n");
      break;
    }
    case AnalysisKind::paths: {
      auto spec = ensemble_spec(cfg, level, req.count);
      const Ensemble ensemble(spec, options);
      ensemble.for_each([&](std::size_t index, const PathSample& path) {
        std::ostringstream os;
        write_path_csv(os, path);
        std::ostringstream suffix;
        suffix << "-path" << std::setw(4) << std::setfill('0') << index << ".csv";
        emit(suffix.str(), os.str());
      });
      break;
    }
  }
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());

  RunResult result;
  for (const auto* k : {&cfg.k_mu, &cfg.k_sigma}) {
    if (k->outside_assumption) {
      const std::string which = k == &cfg.k_mu ? "kernel_mu" : "kernel_sigma";
      result.assumption_warnings.push_back(which + ": " + k->assumption_note);
    }
  }

  ArtifactWriter writer(cfg.output_dir);
  for (std::size_t i = 0; i < cfg.analyses.size(); ++i) {
    const auto& req = cfg.analyses[i];
    std::ostringstream id;
    id << std::setw(2) << std::setfill('0') << i << '-' << to_string(req.kind);
    AnalysisOutcome outcome;
    outcome.kind = req.kind;
    outcome.id = id.str();
    try {
      run_one(cfg, req, options, outcome.id, writer, outcome);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::io) throw;
      outcome.ok = false;
      outcome.error_kind = to_string(e.kind());
      outcome.message = e.what();
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error_kind = "runtime";
      outcome.message = e.what();
    }
    result.outcomes.push_back(std::move(outcome));
  }

  json manifest;
  manifest["schema"] = "manifest-v1";
  manifest["name"] = cfg.name;
  manifest["config"] = {{"T", cfg.T},
                        {"finest_level", cfg.finest_level},
                        {"levels", cfg.levels},
                        {"n_paths", cfg.n_paths},
                        {"base_seed", cfg.base_seed},
                        {"kernel_mu", cfg.kernel_mu_desc.family},
                        {"kernel_sigma", cfg.kernel_sigma_desc.family},
                        {"coefficients", cfg.coeff_desc.family},
                        {"x0", cfg.x0_source},
                        {"scheme",
                         {{"kernel_quadrature", to_string(cfg.scheme.kernel_quadrature)},
                          {"quadrature_nodes", cfg.scheme.quadrature_nodes},
                          {"store_aux", cfg.scheme.store_aux},
                          {"weight_route", to_string(cfg.scheme.weight_route)}}}};
  manifest["assumption_warnings"] = result.assumption_warnings;
  json analyses = json::array();
  for (const auto& o : result.outcomes) {
    json a{{"id", o.id}, {"kind", to_string(o.kind)}, {"status", o.ok ? "ok" : "failed"}, {"artifacts", o.artifacts}};
    if (!o.ok) {
      a["error_kind"] = o.error_kind;
      a["message"] = o.message;
    }
    analyses.push_back(a);
  }
  manifest["analyses"] = analyses;
  json artifacts = json::array();
  for (const auto& a : writer.artifacts()) {
    artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  }
  manifest["artifacts"] = artifacts;

  result.manifest_path = cfg.output_dir / "manifest.json";
  std::ofstream out(result.manifest_path, std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, "cannot write " + result.manifest_path.string());
  return result;
}

AuditSummary audit_experiment(const ExperimentConfig& cfg, int resolution) {
  AuditSummary s;
  bool passed = true;
  const json j = audit_json(cfg, resolution, passed);
  s.passed = passed;
  s.json = j.dump(2) + "\n";
  return s;
}

std::string summarize_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read manifest " + manifest.string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::syntax, "manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!m.is_object() || m.value("schema", "") != "manifest-v1") {
    throw Error(ErrorKind::validation, "not a manifest-v1 file");
  }
  std::ostringstream os;
  os << "experiment " << m.value("name", "") << '\n';
  if (m.contains("config")) {
    const auto& c = m["config"];
    os << "  T=" << c.value("T", 0.0) << " finest_level=" << c.value("finest_level", 0)
       << " n_paths=" << c.value("n_paths", 0) << " base_seed=" << c.value("base_seed", std::uint64_t{0}) << '\n';
  }
  for (const auto& w : m.value("assumption_warnings", json::array())) {
    os << "  warning: " << w.get<std::string>() << '\n';
  }
  std::size_t failed = 0;
  for (const auto& a : m.value("analyses", json::array())) {
    const std::string status = a.value("status", "");
    os << "  " << a.value("id", "") << ": " << status;
    if (status != "ok") {
      ++failed;
      os << " (" << a.value("error_kind", "") << ": " << a.value("message", "") << ")";
    }
    os << ", " << a.value("artifacts", json::array()).size() << " artifact(s)\n";
  }
  const auto artifacts = m.value("artifacts", json::array());
  os << "  " << artifacts.size() << " artifact(s), " << failed << " failed analysis(es)\n";
  return os.str();
}

}  // namespace sve
