#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "sve/sve.h"

namespace {

const char* kConfig = R"({
  "name": "capi",
  "T": 1.0,
  "finest_level": 5,
  "levels": [3, 4, 5],
  "n_paths": 40,
  "base_seed": 1,
  "kernel_mu": {"family": "constant", "params": [1.0]},
  "kernel_sigma": {"family": "constant", "params": [1.0]},
  "coefficients": {"family": "linear_ou", "params": [1.0, 1.0]},
  "x0": 0.5,
  "analyses": [{"kind": "moments"}, {"kind": "cauchy", "n_paths": 4}]
})";

double square_root(double x, void*) { return std::sqrt(x); }

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strcmp(sve_status_name(SVE_OK), "ok") == 0);
  CHECK(std::strcmp(sve_status_name(SVE_ERR_VALIDATION), "validation") == 0);
  CHECK(std::strlen(sve_version()) > 0);
}

TEST_CASE("experiments through the C interface") {
  sve_experiment* e = nullptr;
  REQUIRE(sve_experiment_parse(kConfig, &e) == SVE_OK);
  const auto dir = std::filesystem::temp_directory_path() / "sve-test-capi";
  std::filesystem::remove_all(dir);
  REQUIRE(sve_experiment_set_output_dir(e, dir.c_str()) == SVE_OK);
  REQUIRE(sve_experiment_set_seed(e, 99) == SVE_OK);
  int failed = -1;
  char* manifest = nullptr;
  REQUIRE(sve_experiment_run(e, 2, &failed, &manifest) == SVE_OK);
  CHECK(failed == 0);
  REQUIRE(manifest != nullptr);
  CHECK(std::filesystem::exists(manifest));
  char* summary = nullptr;
  REQUIRE(sve_manifest_summary(manifest, &summary) == SVE_OK);
  CHECK(std::string(summary).find("base_seed=99") != std::string::npos);
  sve_string_free(summary);
  sve_string_free(manifest);

  int passed = -1;
  char* audit = nullptr;
  REQUIRE(sve_experiment_audit(e, &passed, &audit) == SVE_OK);
  CHECK(passed == 1);
  CHECK(std::string(audit).find("audit-v1") != std::string::npos);
  sve_string_free(audit);
  sve_experiment_free(e);
  std::filesystem::remove_all(dir);
}

TEST_CASE("errors map to status codes with a message") {
  sve_experiment* e = nullptr;
  CHECK(sve_experiment_parse("{", &e) == SVE_ERR_SYNTAX);
  CHECK(std::string(sve_last_error()).find("line 1") != std::string::npos);
  CHECK(sve_experiment_parse("{\"name\": \"x\"}", &e) == SVE_ERR_VALIDATION);
  CHECK(std::string(sve_last_error()).find("T: missing required field") != std::string::npos);
  CHECK(e == nullptr);
  CHECK(sve_experiment_parse(nullptr, &e) == SVE_ERR_NULL_ARGUMENT);
  CHECK(sve_experiment_load("/nonexistent.json", &e) == SVE_ERR_IO);
  CHECK(sve_manifest_summary("/nonexistent.json", nullptr) == SVE_ERR_NULL_ARGUMENT);
}

TEST_CASE("kernels") {
  const double p[] = {2.0};
  sve_kernel* k = nullptr;
  REQUIRE(sve_kernel_create("exponential_convolution", p, 1, 1.0, &k) == SVE_OK);
  double v = 0.0;
  CHECK(sve_kernel_eval(k, 0.25, 0.75, &v) == SVE_OK);
  CHECK(v == doctest::Approx(std::exp(-1.0)));
  CHECK(sve_kernel_eval(k, 0.75, 0.25, &v) == SVE_ERR_DOMAIN);
  int flagged = -1;
  CHECK(sve_kernel_is_flagged(k, &flagged) == SVE_OK);
  CHECK(flagged == 0);
  sve_kernel_free(k);

  sve_kernel* bad = nullptr;
  CHECK(sve_kernel_create("gauss", p, 1, 1.0, &bad) == SVE_ERR_INVALID_PARAMETER);
  CHECK(std::string(sve_last_error()).find("fractional") != std::string::npos);
  const double h[] = {0.3};
  REQUIRE(sve_kernel_create("fractional", h, 1, 1.0, &k) == SVE_OK);
  CHECK(sve_kernel_is_flagged(k, &flagged) == SVE_OK);
  CHECK(flagged == 1);
  sve_kernel_free(k);
}

TEST_CASE("drivers") {
  sve_driver* d = nullptr;
  REQUIRE(sve_driver_sample(3, 1.0, 6, &d) == SVE_OK);
  const double* data = nullptr;
  size_t count = 0;
  REQUIRE(sve_driver_increments(d, &data, &count) == SVE_OK);
  CHECK(count == 64);
  double coarse[4];
  REQUIRE(sve_driver_restrict(d, 2, coarse, 4) == SVE_OK);
  double first = 0.0;
  for (int i = 0; i < 16; ++i) first += data[i];
  CHECK(coarse[0] == doctest::Approx(first).epsilon(1e-12));
  CHECK(sve_driver_restrict(d, 3, coarse, 4) == SVE_ERR_INVALID_PARAMETER);
  CHECK(sve_driver_restrict(d, 7, coarse, 4) == SVE_ERR_INCOMPATIBLE_GRID);
  sve_driver_free(d);
}

TEST_CASE("smoothers and thresholds") {
  sve_smoother* s = nullptr;
  REQUIRE(sve_smoother_create(8.0, 0.1, &s) == SVE_OK);
  double phi = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  REQUIRE(sve_smoother_eval(s, -0.5, &phi, &d1, &d2) == SVE_OK);
  CHECK(d1 == -1.0);
  CHECK(d2 == 0.0);
  CHECK(0.5 - phi <= 0.1);
  sve_smoother_free(s);
  CHECK(sve_smoother_create(0.5, 0.1, &s) == SVE_ERR_INVALID_PARAMETER);

  double a[4];
  REQUIRE(sve_yw_thresholds(square_root, nullptr, 3, a) == SVE_OK);
  CHECK(a[0] == 1.0);
  CHECK(a[3] == doctest::Approx(std::exp(-6.0)).epsilon(1e-10));
}
