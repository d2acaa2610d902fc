#include "sve/sve.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "sve/experiment.hpp"
#include "sve/kernel.hpp"
#include "sve/noise.hpp"
#include "sve/ywapprox.hpp"

struct sve_experiment {
  sve::ExperimentConfig config;
};

struct sve_kernel {
  sve::KernelSpec spec;
};

struct sve_driver {
  sve::BrownianDriver driver;
};

struct sve_smoother {
  sve::YWSmoother smoother;
};

namespace {

thread_local std::string last_error;

sve_status status_of(sve::ErrorKind kind) {
  using K = sve::ErrorKind;
  switch (kind) {
    case K::domain: return SVE_ERR_DOMAIN;
    case K::invalid_parameter: return SVE_ERR_INVALID_PARAMETER;
    case K::missing_derivative: return SVE_ERR_MISSING_DERIVATIVE;
    case K::quadrature_failure: return SVE_ERR_QUADRATURE;
    case K::incompatible_grid: return SVE_ERR_INCOMPATIBLE_GRID;
    case K::non_finite: return SVE_ERR_NON_FINITE;
    case K::not_convolution: return SVE_ERR_NOT_CONVOLUTION;
    case K::degenerate: return SVE_ERR_DEGENERATE;
    case K::insufficient_paths: return SVE_ERR_INSUFFICIENT_PATHS;
    case K::missing_aux: return SVE_ERR_MISSING_AUX;
    case K::identical_config: return SVE_ERR_IDENTICAL_CONFIG;
    case K::construction_failure: return SVE_ERR_CONSTRUCTION;
    case K::root_not_bracketed: return SVE_ERR_ROOT_NOT_BRACKETED;
    case K::divergence_audit: return SVE_ERR_DIVERGENCE_AUDIT;
    case K::syntax: return SVE_ERR_SYNTAX;
    case K::validation: return SVE_ERR_VALIDATION;
    case K::io: return SVE_ERR_IO;
  }
  return SVE_ERR_INTERNAL;
}

template <class F>
sve_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return SVE_OK;
  } catch (const sve::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    last_error = e.what();
    return SVE_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return SVE_ERR_INTERNAL;
  }
}

sve_status null_argument(const char* name) {
  last_error = std::string("null argument: ") + name;
  return SVE_ERR_NULL_ARGUMENT;
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* sve_last_error(void) { return last_error.c_str(); }

const char* sve_status_name(sve_status status) {
  switch (status) {
    case SVE_OK: return "ok";
    case SVE_ERR_NULL_ARGUMENT: return "null_argument";
    case SVE_ERR_INVALID_PARAMETER: return "invalid_parameter";
    case SVE_ERR_DOMAIN: return "domain";
    case SVE_ERR_MISSING_DERIVATIVE: return "missing_derivative";
    case SVE_ERR_QUADRATURE: return "quadrature_failure";
    case SVE_ERR_INCOMPATIBLE_GRID: return "incompatible_grid";
    case SVE_ERR_NON_FINITE: return "non_finite";
    case SVE_ERR_NOT_CONVOLUTION: return "not_convolution";
    case SVE_ERR_DEGENERATE: return "degenerate";
    case SVE_ERR_INSUFFICIENT_PATHS: return "insufficient_paths";
    case SVE_ERR_MISSING_AUX: return "missing_aux";
    case SVE_ERR_IDENTICAL_CONFIG: return "identical_config";
    case SVE_ERR_CONSTRUCTION: return "construction_failure";
    case SVE_ERR_ROOT_NOT_BRACKETED: return "root_not_bracketed";
    case SVE_ERR_DIVERGENCE_AUDIT: return "divergence_audit";
    case SVE_ERR_SYNTAX: return "syntax";
    case SVE_ERR_VALIDATION: return "validation";
    case SVE_ERR_IO: return "io";
    case SVE_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sve_version(void) { return "0.1.0"; }

void sve_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------------------

sve_status sve_experiment_parse(const char* text, sve_experiment** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new sve_experiment{sve::parse_config(text)}; });
}

sve_status sve_experiment_load(const char* path, sve_experiment** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new sve_experiment{sve::load_config(path)}; });
}

sve_status sve_experiment_set_output_dir(sve_experiment* e, const char* dir) {
  if (!e) return null_argument("experiment");
  if (!dir) return null_argument("dir");
  return guarded([&] { e->config.output_dir = dir; });
}

sve_status sve_experiment_set_seed(sve_experiment* e, uint64_t seed) {
  if (!e) return null_argument("experiment");
  e->config.base_seed = seed;
  return SVE_OK;
}

sve_status sve_experiment_run(sve_experiment* e, unsigned workers, int* any_failed, char** manifest_path) {
  if (!e) return null_argument("experiment");
  return guarded([&] {
    sve::RunOptions options;
    options.workers = workers == 0 ? 1 : workers;
    const auto result = sve::run_experiment(e->config, options);
    if (any_failed) *any_failed = result.any_failed() ? 1 : 0;
    if (manifest_path) *manifest_path = duplicate(result.manifest_path.string());
  });
}

sve_status sve_experiment_audit(const sve_experiment* e, int* passed, char** report_json) {
  if (!e) return null_argument("experiment");
  return guarded([&] {
    int resolution = 64;
    for (const auto& a : e->config.analyses) {
      if (a.kind == sve::AnalysisKind::audit) resolution = a.resolution;
    }
    const auto summary = sve::audit_experiment(e->config, resolution);
    if (passed) *passed = summary.passed ? 1 : 0;
    if (report_json) *report_json = duplicate(summary.json);
  });
}

void sve_experiment_free(sve_experiment* e) { delete e; }

sve_status sve_manifest_summary(const char* manifest_path, char** summary) {
  if (!manifest_path) return null_argument("manifest_path");
  if (!summary) return null_argument("summary");
  return guarded([&] { *summary = duplicate(sve::summarize_manifest(manifest_path)); });
}

// ---------------------------------------------------------------------------

sve_status sve_kernel_create(const char* family, const double* params, size_t n_params, double T, sve_kernel** out) {
  if (!family) return null_argument("family");
  if (!params && n_params > 0) return null_argument("params");
  if (!out) return null_argument("out");
  return guarded([&] {
    const std::span<const double> p(params, n_params);
    *out = new sve_kernel{sve::make_builtin_kernel(sve::parse_kernel_family(family), p, T)};
  });
}

sve_status sve_kernel_eval(const sve_kernel* k, double s, double t, double* value) {
  if (!k) return null_argument("kernel");
  if (!value) return null_argument("value");
  return guarded([&] { *value = sve::eval_kernel(k->spec, s, t); });
}

sve_status sve_kernel_is_flagged(const sve_kernel* k, int* flagged) {
  if (!k) return null_argument("kernel");
  if (!flagged) return null_argument("flagged");
  *flagged = k->spec.outside_assumption ? 1 : 0;
  return SVE_OK;
}

void sve_kernel_free(sve_kernel* k) { delete k; }

// ---------------------------------------------------------------------------

sve_status sve_driver_sample(uint64_t seed, double T, unsigned level, sve_driver** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new sve_driver{sve::sample_driver(seed, sve::DyadicGrid(T, level))}; });
}

sve_status sve_driver_increments(const sve_driver* d, const double** data, size_t* count) {
  if (!d) return null_argument("driver");
  if (!data) return null_argument("data");
  if (!count) return null_argument("count");
  *data = d->driver.increments.data();
  *count = d->driver.increments.size();
  return SVE_OK;
}

sve_status sve_driver_restrict(const sve_driver* d, unsigned level, double* out, size_t capacity) {
  if (!d) return null_argument("driver");
  if (!out) return null_argument("out");
  return guarded([&] {
    const sve::DyadicGrid coarse(d->driver.finest.horizon(), level, d->driver.finest.base());
    const auto inc = sve::restrict_increments(d->driver, coarse);
    if (capacity < inc.size()) throw sve::Error(sve::ErrorKind::invalid_parameter, "output buffer too small");
    std::memcpy(out, inc.data(), inc.size() * sizeof(double));
  });
}

void sve_driver_free(sve_driver* d) { delete d; }

// ---------------------------------------------------------------------------

sve_status sve_smoother_create(double delta, double eps, sve_smoother** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new sve_smoother{sve::build_smoother(delta, eps)}; });
}

sve_status sve_smoother_eval(const sve_smoother* s, double x, double* phi, double* phi_prime, double* phi_second) {
  if (!s) return null_argument("smoother");
  return guarded([&] {
    const auto& m = s->smoother.profile;
    if (phi) *phi = m.phi(x);
    if (phi_prime) *phi_prime = m.phi_prime(x);
    if (phi_second) *phi_second = m.phi_second(x);
  });
}

void sve_smoother_free(sve_smoother* s) { delete s; }

sve_status sve_yw_thresholds(double (*rho)(double x, void* user), void* user, size_t n_max, double* out) {
  if (!rho) return null_argument("rho");
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto a = sve::yw_thresholds([rho, user](double x) { return rho(x, user); }, n_max);
    std::memcpy(out, a.data(), a.size() * sizeof(double));
  });
}

}  // extern "C"
