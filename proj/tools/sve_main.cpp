// Command-line runner. Links only the C interface.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>

#include "sve/sve.h"

namespace {

enum Exit { kSuccess = 0, kAnalysisFailure = 1, kValidation = 2, kRuntime = 3 };

int exit_for(sve_status status) {
  if (status == SVE_OK) return kSuccess;
  if (status == SVE_ERR_VALIDATION || status == SVE_ERR_SYNTAX) return kValidation;
  return kRuntime;
}

int report(sve_status status, const char* what) {
  std::fprintf(stderr, "sve: %s failed (%s)\n%s\n", what, sve_status_name(status), sve_last_error());
  return exit_for(status);
}

struct ExperimentHandle {
  sve_experiment* ptr = nullptr;
  ~ExperimentHandle() { sve_experiment_free(ptr); }
};

void print_and_free(char* text) {
  if (text) std::fputs(text, stdout);
  sve_string_free(text);
}

int cmd_run(const std::string& config, const std::string& out, const std::uint64_t* seed, unsigned workers) {
  ExperimentHandle e;
  if (auto st = sve_experiment_load(config.c_str(), &e.ptr); st != SVE_OK) return report(st, "config");
  if (!out.empty()) {
    if (auto st = sve_experiment_set_output_dir(e.ptr, out.c_str()); st != SVE_OK) return report(st, "config");
  }
  if (seed) sve_experiment_set_seed(e.ptr, *seed);
  int any_failed = 0;
  char* manifest = nullptr;
  if (auto st = sve_experiment_run(e.ptr, workers, &any_failed, &manifest); st != SVE_OK) return report(st, "run");
  char* summary = nullptr;
  const sve_status st = sve_manifest_summary(manifest, &summary);
  std::printf("manifest: %s\n", manifest);
  sve_string_free(manifest);
  if (st != SVE_OK) return report(st, "summary");
  print_and_free(summary);
  return any_failed ? kAnalysisFailure : kSuccess;
}

int cmd_audit(const std::string& config) {
  ExperimentHandle e;
  if (auto st = sve_experiment_load(config.c_str(), &e.ptr); st != SVE_OK) return report(st, "config");
  int passed = 0;
  char* json = nullptr;
  if (auto st = sve_experiment_audit(e.ptr, &passed, &json); st != SVE_OK) return report(st, "audit");
  print_and_free(json);
  return passed ? kSuccess : kAnalysisFailure;
}

int cmd_show(const std::string& manifest) {
  char* summary = nullptr;
  if (auto st = sve_manifest_summary(manifest.c_str(), &summary); st != SVE_OK) return report(st, "show");
  print_and_free(summary);
  return kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Volterra equation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sve_version()));

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  auto* run = app.add_subcommand("run", "Run every analysis in a config and write a manifest");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("--out", out, "Override output_dir");
  auto* seed_opt = run->add_option("--seed", seed, "Override base_seed");
  run->add_option("--workers", workers, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));

  auto* audit = app.add_subcommand("audit", "Kernel and coefficient audits only");
  audit->add_option("config", config, "Experiment config (JSON)")->required();

  std::string manifest;
  auto* show = app.add_subcommand("show", "Summarize a manifest");
  show->add_option("manifest", manifest, "manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  if (*run) return cmd_run(config, out, seed_opt->count() > 0 ? &seed : nullptr, workers);
  if (*audit) return cmd_audit(config);
  return cmd_show(manifest);
}
