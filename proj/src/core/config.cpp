#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "sve/expr.hpp"
#include "sve/experiment.hpp"

namespace sve {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

// Collects errors with their field paths instead of stopping at the first.
class Checker {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  void unknown_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(path.empty() ? key : path + "." + key, "unknown field");
      }
    }
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path, bool required) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(where, "missing required field");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      fail(where, "expected a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(where, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::uint64_t> integer(const json& obj, const std::string& key, const std::string& path,
                                       bool required) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(where, "missing required field");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      fail(where, "expected a nonnegative integer");
      return std::nullopt;
    }
    return v.get<std::uint64_t>();
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path,
                                    bool required) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(where, "missing required field");
      return std::nullopt;
    }
    if (!obj.at(key).is_string()) {
      fail(where, "expected a string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& key, const std::string& path,
                                             bool required) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(where, "missing required field");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
      fail(where, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(where + "[" + std::to_string(i) + "]", "expected a finite number");
        return std::nullopt;
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::optional<std::vector<unsigned>> levels(const json& obj, const std::string& key, const std::string& path,
                                              bool required) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(where, "missing required field");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
      fail(where, "expected an array of integers");
      return std::nullopt;
    }
    std::vector<unsigned> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned() || v[i].get<std::uint64_t>() > 30) {
        fail(where + "[" + std::to_string(i) + "]", "expected an integer level in [0, 30]");
        return std::nullopt;
      }
      out.push_back(v[i].get<unsigned>());
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (out[i] <= out[i - 1]) {
        fail(where, "levels must be strictly increasing");
        return std::nullopt;
      }
    }
    return out;
  }

  const json* object(const json& obj, const std::string& key, const std::string& path, bool required) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(where, "missing required field");
      return nullptr;
    }
    if (!obj.at(key).is_object()) {
      fail(where, "expected an object");
      return nullptr;
    }
    return &obj.at(key);
  }
};

void parse_kernel(Checker& ck, const json& root, const std::string& key, double T, KernelDescriptor& desc,
                  KernelSpec& spec) {
  const json* obj = ck.object(root, key, "", true);
  if (!obj) return;
  const auto family = ck.string(*obj, "family", key, true);
  if (!family) return;
  desc.family = *family;
  try {
    if (*family == "expression") {
      ck.unknown_keys(*obj, key, {"family", "eval", "d1", "d2", "d21", "gamma", "epsilon", "alpha",
                                  "diag_lower_bound"});
      auto& e = desc.expressions;
      e.eval = ck.string(*obj, "eval", key, true).value_or("");
      e.d1 = ck.string(*obj, "d1", key, false).value_or("");
      e.d2 = ck.string(*obj, "d2", key, false).value_or("");
      e.d21 = ck.string(*obj, "d21", key, false).value_or("");
      e.gamma = ck.number(*obj, "gamma", key, false).value_or(e.gamma);
      e.epsilon = ck.number(*obj, "epsilon", key, false).value_or(e.epsilon);
      e.alpha = ck.number(*obj, "alpha", key, false).value_or(e.alpha);
      e.diag_lower_bound = ck.number(*obj, "diag_lower_bound", key, false).value_or(e.diag_lower_bound);
      if (e.eval.empty()) return;
      spec = make_expression_kernel(e, T);
      return;
    }
    ck.unknown_keys(*obj, key, {"family", "params"});
    const auto params = ck.numbers(*obj, "params", key, true);
    if (!params) return;
    desc.params = *params;
    spec = make_builtin_kernel(parse_kernel_family(*family), *params, T);
  } catch (const Error& e) {
    std::string msg = e.what();
    if (*family != "expression" && msg.rfind("unknown kernel family", 0) == 0) {
      msg += " expression";
    }
    ck.fail(key, msg);
  }
}

void parse_coefficients(Checker& ck, const json& root, CoefficientDescriptor& desc, CoefficientPair& pair) {
  const std::string key = "coefficients";
  const json* obj = ck.object(root, key, "", true);
  if (!obj) return;
  const auto family_name = ck.string(*obj, "family", key, true);
  if (!family_name) return;
  desc.family = *family_name;
  try {
    const CoeffFamily family = parse_coeff_family(*family_name);
    if (family == CoeffFamily::custom) {
      ck.unknown_keys(*obj, key, {"family", "mu", "sigma", "growth_const", "lipschitz_const", "holder_const", "xi"});
      const auto mu = ck.string(*obj, "mu", key, true);
      const auto sigma = ck.string(*obj, "sigma", key, true);
      auto& meta = desc.meta;
      meta.growth_const = ck.number(*obj, "growth_const", key, false).value_or(meta.growth_const);
      meta.lipschitz_const = ck.number(*obj, "lipschitz_const", key, false);
      meta.holder_const = ck.number(*obj, "holder_const", key, false);
      meta.xi = ck.number(*obj, "xi", key, false).value_or(meta.xi);
      if (!(meta.xi >= 0.0 && meta.xi <= 0.5)) ck.fail(key + ".xi", "xi out of [0, 0.5]");
      if (!mu || !sigma) return;
      desc.mu_expr = *mu;
      desc.sigma_expr = *sigma;
      bool expressions_ok = true;
      for (const auto& [field, text] : {std::pair{"mu", *mu}, std::pair{"sigma", *sigma}}) {
        try {
          (void)Expression::parse(text);
        } catch (const Error& e) {
          ck.fail(key + "." + field, e.what());
          expressions_ok = false;
        }
      }
      if (!expressions_ok || !(meta.xi >= 0.0 && meta.xi <= 0.5)) return;
      pair = make_custom_coeffs(*mu, *sigma, meta);
      return;
    }
    // Parameters either positionally ("params") or by name.
    const auto names = coeff_family_params(family);
    std::vector<std::string> allowed_store{"family", "params"};
    for (const auto& p : names) allowed_store.emplace_back(p.name);
    for (const auto& [k, v] : obj->items()) {
      if (std::find(allowed_store.begin(), allowed_store.end(), k) == allowed_store.end()) {
        ck.fail(key + "." + k, "unknown field");
      }
    }
    std::vector<double> params;
    if (obj->contains("params")) {
      const auto given = ck.numbers(*obj, "params", key, true);
      if (!given) return;
      params = *given;
    } else {
      for (const auto& p : names) {
        const auto v = ck.number(*obj, std::string(p.name), key, std::isnan(p.default_value));
        if (!v && std::isnan(p.default_value)) return;
        params.push_back(v.value_or(p.default_value));
      }
    }
    desc.params = params;
    pair = make_builtin_coeffs(family, params);
  } catch (const Error& e) {
    ck.fail(key, e.what());
  }
}

void parse_x0(Checker& ck, const json& root, double T, std::string& source, InitialCondition& x0) {
  if (!root.contains("x0")) {
    ck.fail("x0", "missing required field");
    return;
  }
  const json& v = root.at("x0");
  try {
    if (v.is_number()) {
      x0 = InitialCondition::constant(v.get<double>());
      source = x0.source;
    } else if (v.is_string()) {
      const Expression e = Expression::parse(v.get<std::string>(), "t", "x");
      x0.x0 = [e](double t) { return e(t, 0.0); };
      x0.source = e.source();
      source = x0.source;
    } else {
      ck.fail("x0", "expected a number or an expression string");
      return;
    }
    validate_initial_condition(x0, T);
  } catch (const Error& e) {
    ck.fail("x0", e.what());
  }
}

void parse_scheme_fields(Checker& ck, const json& obj, const std::string& path, SchemeConfig& s) {
  ck.unknown_keys(obj, path, {"kernel_quadrature", "quadrature_nodes", "store_aux", "weight_route"});
  try {
    if (const auto q = ck.string(obj, "kernel_quadrature", path, false)) s.kernel_quadrature = parse_kernel_quadrature(*q);
  } catch (const Error& e) {
    ck.fail(path + ".kernel_quadrature", e.what());
  }
  if (const auto n = ck.integer(obj, "quadrature_nodes", path, false)) {
    if (*n < 1 || *n > 64) {
      ck.fail(path + ".quadrature_nodes", "must lie in [1, 64]");
    } else {
      s.quadrature_nodes = static_cast<int>(*n);
    }
  }
  if (obj.contains("store_aux")) {
    if (!obj.at("store_aux").is_boolean()) {
      ck.fail(path + ".store_aux", "expected a boolean");
    } else {
      s.store_aux = obj.at("store_aux").get<bool>();
    }
  }
  try {
    if (const auto r = ck.string(obj, "weight_route", path, false)) s.weight_route = parse_weight_route(*r);
  } catch (const Error& e) {
    ck.fail(path + ".weight_route", e.what());
  }
}

AnalysisKind parse_kind(std::string_view name) {
  for (auto k : {AnalysisKind::moments, AnalysisKind::holder, AnalysisKind::cauchy, AnalysisKind::decomposition,
                 AnalysisKind::coupling, AnalysisKind::audit, AnalysisKind::paths}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::invalid_parameter, "unknown analysis kind \"" + std::string(name) +
                                                "\"; valid: moments holder cauchy decomposition coupling audit paths");
}

void parse_analysis(Checker& ck, const json& item, const std::string& path, ExperimentConfig& cfg, bool grid_ok) {
  if (!item.is_object()) {
    ck.fail(path, "expected an object");
    return;
  }
  const auto kind_name = ck.string(item, "kind", path, true);
  if (!kind_name) return;
  AnalysisRequest req;
  try {
    req.kind = parse_kind(*kind_name);
  } catch (const Error& e) {
    ck.fail(path + ".kind", e.what());
    return;
  }
  auto read_level = [&] {
    if (const auto l = ck.integer(item, "level", path, false)) {
      if (*l > cfg.finest_level) {
        ck.fail(path + ".level", "exceeds finest_level " + std::to_string(cfg.finest_level));
      } else {
        req.level = static_cast<unsigned>(*l);
      }
    }
  };
  auto read_levels = [&](std::size_t min_count) {
    if (const auto ls = ck.levels(item, "levels", path, false)) req.levels = *ls;
    const auto& used = req.levels.empty() ? cfg.levels : req.levels;
    if (used.size() < min_count) {
      ck.fail(path + ".levels", "at least " + std::to_string(min_count) + " levels are required");
    }
    for (unsigned l : used) {
      if (l > cfg.finest_level) ck.fail(path + ".levels", "level " + std::to_string(l) + " exceeds finest_level");
    }
  };
  auto read_paths = [&] {
    if (const auto n = ck.integer(item, "n_paths", path, false)) {
      if (*n < 1) {
        ck.fail(path + ".n_paths", "must be at least 1");
      } else {
        req.n_paths = static_cast<std::size_t>(*n);
      }
    }
  };

  switch (req.kind) {
    case AnalysisKind::moments: {
      ck.unknown_keys(item, path, {"kind", "level", "n_paths", "q"});
      read_level();
      read_paths();
      if (const auto q = ck.numbers(item, "q", path, false)) req.q_list = *q;
      if (req.q_list.empty()) ck.fail(path + ".q", "must not be empty");
      for (double q : req.q_list) {
        if (!(q >= 1.0 && q <= 8.0)) ck.fail(path + ".q", "moment orders must lie in [1, 8]");
      }
      if (req.n_paths.value_or(cfg.n_paths) < 2 * kJackknifeBlocks) {
        ck.fail(path + ".n_paths", "moment estimation needs at least " + std::to_string(2 * kJackknifeBlocks) +
                                       " paths");
      }
      break;
    }
    case AnalysisKind::holder: {
      ck.unknown_keys(item, path, {"kind", "level", "n_paths", "p", "lags", "lag_steps"});
      read_level();
      read_paths();
      req.p = ck.number(item, "p", path, false).value_or(req.p);
      if (!(req.p >= 2.0)) ck.fail(path + ".p", "must be at least 2");
      const unsigned level = req.level.value_or(cfg.finest_level);
      const bool has_lags = item.contains("lags");
      const bool has_steps = item.contains("lag_steps");
      if (has_lags == has_steps) {
        ck.fail(path, "exactly one of lags or lag_steps is required");
        break;
      }
      if (!grid_ok) break;
      const DyadicGrid grid(cfg.T, level);
      if (has_lags) {
        if (const auto lags = ck.numbers(item, "lags", path, true)) req.lags = *lags;
      } else if (const auto steps = ck.numbers(item, "lag_steps", path, true)) {
        for (double s : *steps) req.lags.push_back(s * grid.dt());
      }
      try {
        (void)admissible_lags(grid, req.lags);
      } catch (const Error& e) {
        ck.fail(path + (has_lags ? ".lags" : ".lag_steps"), e.what());
      }
      break;
    }
    case AnalysisKind::cauchy:
      ck.unknown_keys(item, path, {"kind", "levels", "n_paths"});
      read_levels(2);
      read_paths();
      break;
    case AnalysisKind::decomposition:
      ck.unknown_keys(item, path, {"kind", "levels", "n_paths"});
      read_levels(1);
      read_paths();
      if (cfg.k_mu.eval && !cfg.k_mu.d2) ck.fail(path, "kernel_mu provides no d2 derivative");
      if (cfg.k_sigma.eval && !cfg.k_sigma.d2) ck.fail(path, "kernel_sigma provides no d2 derivative");
      break;
    case AnalysisKind::coupling: {
      ck.unknown_keys(item, path, {"kind", "levels", "n_paths", "scheme_b"});
      read_levels(1);
      read_paths();
      req.scheme_b = cfg.scheme;
      if (const json* b = ck.object(item, "scheme_b", path, true)) {
        parse_scheme_fields(ck, *b, path + ".scheme_b", req.scheme_b);
        if (req.scheme_b == cfg.scheme) ck.fail(path + ".scheme_b", "identical to the main scheme");
      }
      break;
    }
    case AnalysisKind::audit:
      ck.unknown_keys(item, path, {"kind", "resolution"});
      if (const auto r = ck.integer(item, "resolution", path, false)) {
        if (*r < 8 || *r > 4096) {
          ck.fail(path + ".resolution", "must lie in [8, 4096]");
        } else {
          req.resolution = static_cast<int>(*r);
        }
      }
      break;
    case AnalysisKind::paths:
      ck.unknown_keys(item, path, {"kind", "level", "count"});
      read_level();
      if (const auto c = ck.integer(item, "count", path, false)) {
        if (*c < 1 || *c > cfg.n_paths) {
          ck.fail(path + ".count", "must lie in [1, n_paths]");
        } else {
          req.count = static_cast<std::size_t>(*c);
        }
      }
      req.count = std::min(req.count, cfg.n_paths);
      break;
  }
  cfg.analyses.push_back(std::move(req));
}

}  // namespace

std::string_view to_string(AnalysisKind kind) noexcept {
  switch (kind) {
    case AnalysisKind::moments: return "moments";
    case AnalysisKind::holder: return "holder";
    case AnalysisKind::cauchy: return "cauchy";
    case AnalysisKind::decomposition: return "decomposition";
    case AnalysisKind::coupling: return "coupling";
    case AnalysisKind::audit: return "audit";
    case AnalysisKind::paths: return "paths";
  }
  return "unknown";
}

ValidationError::ValidationError(std::vector<std::string> messages)
    : Error(ErrorKind::validation, join_lines(messages)), messages_(std::move(messages)) {}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a 1-based line and column.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string detail = e.what();
    if (const auto pos = detail.find("; "); pos != std::string::npos) detail = detail.substr(pos + 2);
    throw Error(ErrorKind::syntax, "config syntax error at line " + std::to_string(line) + ", column " +
                                       std::to_string(column) + ": " + detail);
  }
  if (!root.is_object()) throw ValidationError({"(root): expected an object"});

  Checker ck;
  ExperimentConfig cfg;
  ck.unknown_keys(root, "", {"name", "T", "finest_level", "levels", "n_paths", "base_seed", "kernel_mu",
                             "kernel_sigma", "coefficients", "x0", "scheme", "analyses", "output_dir"});
  cfg.name = ck.string(root, "name", "", true).value_or("");
  if (root.contains("name") && cfg.name.empty()) ck.fail("name", "must not be empty");
  for (char c : cfg.name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      ck.fail("name", "may contain only letters, digits, '_', '-' and '.'");
      break;
    }
  }

  bool grid_ok = true;
  if (const auto T = ck.number(root, "T", "", true)) {
    if (!(*T > 0.0)) {
      ck.fail("T", "must be positive");
      grid_ok = false;
    } else {
      cfg.T = *T;
    }
  } else {
    grid_ok = false;
  }
  if (const auto f = ck.integer(root, "finest_level", "", true)) {
    if (*f > 16) {
      ck.fail("finest_level", "must be at most 16");
      grid_ok = false;
    } else {
      cfg.finest_level = static_cast<unsigned>(*f);
    }
  } else {
    grid_ok = false;
  }
  if (const auto ls = ck.levels(root, "levels", "", true)) {
    cfg.levels = *ls;
    if (cfg.levels.empty()) ck.fail("levels", "must not be empty");
    for (unsigned l : cfg.levels) {
      if (grid_ok && l > cfg.finest_level) {
        ck.fail("levels", "level " + std::to_string(l) + " exceeds finest_level " + std::to_string(cfg.finest_level));
      }
    }
  }
  if (const auto n = ck.integer(root, "n_paths", "", true)) {
    if (*n < 1 || *n > 1000000) {
      ck.fail("n_paths", "must lie in [1, 1000000]");
    } else {
      cfg.n_paths = static_cast<std::size_t>(*n);
    }
  }
  cfg.base_seed = ck.integer(root, "base_seed", "", true).value_or(0);

  parse_kernel(ck, root, "kernel_mu", cfg.T, cfg.kernel_mu_desc, cfg.k_mu);
  parse_kernel(ck, root, "kernel_sigma", cfg.T, cfg.kernel_sigma_desc, cfg.k_sigma);
  parse_coefficients(ck, root, cfg.coeff_desc, cfg.coeffs);
  parse_x0(ck, root, cfg.T, cfg.x0_source, cfg.x0);

  if (const json* s = ck.object(root, "scheme", "", false)) parse_scheme_fields(ck, *s, "scheme", cfg.scheme);

  if (!root.contains("analyses")) {
    ck.fail("analyses", "missing required field");
  } else if (!root.at("analyses").is_array() || root.at("analyses").empty()) {
    ck.fail("analyses", "expected a nonempty array");
  } else {
    const json& list = root.at("analyses");
    for (std::size_t i = 0; i < list.size(); ++i) {
      parse_analysis(ck, list[i], "analyses[" + std::to_string(i) + "]", cfg, grid_ok);
    }
  }

  cfg.output_dir = ck.string(root, "output_dir", "", false).value_or(cfg.name.empty() ? "out" : "out/" + cfg.name);

  if (!ck.errors.empty()) throw ValidationError(std::move(ck.errors));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read config file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace sve
