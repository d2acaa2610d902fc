#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sve/analysis.hpp"
#include "sve/coeff.hpp"
#include "sve/kernel.hpp"
#include "sve/scheme.hpp"

namespace sve {

/// A built-in family with parameters, or expression strings over (s, t).
struct KernelDescriptor {
  std::string family;  // "expression" for expression kernels
  std::vector<double> params;
  KernelExpressions expressions;
};

struct CoefficientDescriptor {
  std::string family;
  std::vector<double> params;
  std::string mu_expr;  // custom only
  std::string sigma_expr;
  CustomCoeffMetadata meta;
};

enum class AnalysisKind { moments, holder, cauchy, decomposition, coupling, audit, paths };

std::string_view to_string(AnalysisKind kind) noexcept;

struct AnalysisRequest {
  AnalysisKind kind = AnalysisKind::moments;
  std::optional<unsigned> level;        // moments, holder, paths; defaults to finest_level
  std::vector<unsigned> levels;         // cauchy, decomposition, coupling; defaults to the config's levels
  std::optional<std::size_t> n_paths;   // defaults to the config's n_paths
  std::vector<double> q_list{2.0, 4.0}; // moments
  double p = 4.0;                       // holder
  std::vector<double> lags;             // holder, in time units
  SchemeConfig scheme_b;                // coupling: compared against the config's scheme
  std::size_t count = 4;                // paths: number of paths written
  int resolution = 64;                  // audit
};

struct ExperimentConfig {
  std::string name;
  double T = 1.0;
  unsigned finest_level = 0;
  std::vector<unsigned> levels;
  std::size_t n_paths = 1;
  std::uint64_t base_seed = 0;
  KernelDescriptor kernel_mu_desc;
  KernelDescriptor kernel_sigma_desc;
  CoefficientDescriptor coeff_desc;
  std::string x0_source;
  SchemeConfig scheme;
  std::vector<AnalysisRequest> analyses;
  std::filesystem::path output_dir;

  // Resolved from the descriptors.
  KernelSpec k_mu;
  KernelSpec k_sigma;
  CoefficientPair coeffs;
  InitialCondition x0;
};

/// All validation errors of a config, each prefixed with its field path.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  std::vector<std::string> messages_;
};

/// Parses a JSON config. Malformed JSON raises Error(syntax) with line and
/// column; every semantic problem is collected into one ValidationError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& file);

struct AnalysisOutcome {
  AnalysisKind kind = AnalysisKind::moments;
  std::string id;  // "<index>-<kind>"
  bool ok = true;
  std::string error_kind;
  std::string message;
  std::vector<std::string> artifacts;
};

struct RunResult {
  std::filesystem::path manifest_path;
  std::vector<AnalysisOutcome> outcomes;
  std::vector<std::string> assumption_warnings;

  bool any_failed() const noexcept;
};

/// Runs every requested analysis in order, writes artifacts into
/// cfg.output_dir and a manifest.json listing them with SHA-256 hashes.
/// Analysis failures are recorded per analysis; I/O failures throw.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Kernel and coefficient audits only, as JSON text.
struct AuditSummary {
  bool passed = false;
  std::string json;
};
AuditSummary audit_experiment(const ExperimentConfig& cfg, int resolution = 64);

/// Human-readable summary of a manifest file.
std::string summarize_manifest(const std::filesystem::path& manifest);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace sve
