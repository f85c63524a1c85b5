#include "advreg/config.hpp"

#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "advreg/errors.hpp"

namespace advreg {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& obj, const char* key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError(std::string("config: '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_string())
    throw ConfigError(std::string("config: '") + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

Vec get_vec(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(std::string("config: '") + key + "' must be an array");
  Vec out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError(std::string("config: '") + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

// p may be numeric or the string "inf".
double get_p(const json& obj) {
  if (!obj.contains("p")) return std::numeric_limits<double>::infinity();
  const auto& v = obj.at("p");
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity")
      return std::numeric_limits<double>::infinity();
    throw ConfigError("config: 'p' must be a number or \"inf\"");
  }
  if (!v.is_number()) throw ConfigError("config: 'p' must be a number or \"inf\"");
  return v.get<double>();
}

RegressionFunction parse_function(const json& obj) {
  check_keys(obj,
             {"kind", "beta", "L", "dim", "value", "slope", "intercept", "coord", "beta_vec",
              "L_vec"},
             "function");
  const std::string kind = get_string(obj, "kind");
  if (kind == "witness_smooth")
    return witness_iso_smooth(get_number(obj, "beta", 1.0), get_number(obj, "L", 1.0),
                              static_cast<int>(get_integer(obj, "dim", 1)));
  if (kind == "witness_rough")
    return witness_iso_rough(get_number(obj, "beta", 0.5),
                             static_cast<int>(get_integer(obj, "dim", 1)));
  if (kind == "witness_aniso") {
    if (!obj.contains("beta_vec")) throw ConfigError("config: witness_aniso needs 'beta_vec'");
    Vec beta = get_vec(obj, "beta_vec");
    Vec L = obj.contains("L_vec") ? get_vec(obj, "L_vec") : Vec(beta.size(), 1.0);
    const auto spec = SmoothnessSpec::anisotropic(std::move(beta), std::move(L));
    return witness_aniso(spec, static_cast<int>(get_integer(obj, "coord", 0)));
  }
  if (kind == "linear")
    return linear_function(get_number(obj, "slope", 1.0), get_number(obj, "intercept", 0.0),
                           static_cast<int>(get_integer(obj, "dim", 1)));
  if (kind == "constant")
    return constant_function(get_number(obj, "value", 0.0),
                             static_cast<int>(get_integer(obj, "dim", 1)));
  throw ConfigError("config: unknown function kind '" + kind + "'");
}

PerturbationSet parse_perturbation(const json& obj, int f_dim) {
  check_keys(obj, {"kind", "p", "q", "dim", "max_nonzero", "half_widths", "from", "to", "points"},
             "perturbation");
  const std::string kind = get_string(obj, "kind");
  const int dim = static_cast<int>(get_integer(obj, "dim", f_dim > 0 ? f_dim : 1));
  if (kind == "lp_ball")
    return PerturbationSet::lp_ball(get_p(obj), get_number(obj, "q", 0.0), dim);
  if (kind == "sparse_lp_ball")
    return PerturbationSet::sparse_lp_ball(get_p(obj), get_number(obj, "q", 0.0),
                                           static_cast<int>(get_integer(obj, "max_nonzero", 1)),
                                           dim);
  if (kind == "box") {
    if (!obj.contains("half_widths")) throw ConfigError("config: box needs 'half_widths'");
    return PerturbationSet::box(get_vec(obj, "half_widths"));
  }
  if (kind == "segment") {
    if (!obj.contains("from") || !obj.contains("to"))
      throw ConfigError("config: segment needs 'from' and 'to'");
    return PerturbationSet::segment(get_vec(obj, "from"), get_vec(obj, "to"));
  }
  if (kind == "finite") {
    if (!obj.contains("points")) throw ConfigError("config: finite needs 'points'");
    const auto& arr = obj.at("points");
    if (!arr.is_array()) throw ConfigError("config: 'points' must be an array of arrays");
    std::vector<Vec> pts;
    for (const auto& row : arr) {
      if (!row.is_array()) throw ConfigError("config: 'points' must be an array of arrays");
      Vec p;
      for (const auto& e : row) {
        if (!e.is_number()) throw ConfigError("config: 'points' must hold numbers");
        p.push_back(e.get<double>());
      }
      pts.push_back(std::move(p));
    }
    return PerturbationSet::finite_points(std::move(pts));
  }
  if (kind == "singleton") return PerturbationSet::singleton(dim);
  throw ConfigError("config: unknown perturbation kind '" + kind + "'");
}

MethodKind parse_method(const std::string& name, const std::string& where) {
  if (name == "local_poly") return MethodKind::LocalPoly;
  if (name == "aniso_kernel") return MethodKind::AnisoKernel;
  if (name == "exact") return MethodKind::Exact;
  if (name == "constant") return MethodKind::Constant;
  throw ConfigError("config: unknown method '" + name + "' in " + where);
}

}  // namespace

CliConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  try {
    check_keys(root,
               {"function", "perturbation", "estimator", "predictor", "n", "n_grid",
                "replicates", "noise_sd", "seed", "lattice_resolution", "sample_resolution",
                "q_grid", "q_scale", "q_exponent"},
               "the top level");

    CliConfig cfg;
    if (root.contains("function")) {
      cfg.f = parse_function(root.at("function"));
      cfg.has_function = true;
    }
    if (root.contains("perturbation")) {
      cfg.perturbation =
          parse_perturbation(root.at("perturbation"), cfg.has_function ? cfg.f.spec.dim() : 0);
      cfg.has_perturbation = true;
      if (cfg.has_function && cfg.perturbation.dim() != cfg.f.spec.dim())
        throw ConfigError("config: perturbation dimension " +
                          std::to_string(cfg.perturbation.dim()) +
                          " does not match function dimension " +
                          std::to_string(cfg.f.spec.dim()));
    }
    if (root.contains("estimator")) {
      const auto& est = root.at("estimator");
      check_keys(est, {"method", "c_h", "bandwidth", "value"}, "estimator");
      cfg.method = parse_method(get_string(est, "method"), "estimator");
      cfg.c_h = get_number(est, "c_h", 1.0);
      cfg.bandwidth = get_number(est, "bandwidth", 0.0);
      cfg.constant_value = get_number(est, "value", 0.0);
      cfg.has_estimator = true;
    }
    if (root.contains("predictor")) {
      const auto& pred = root.at("predictor");
      check_keys(pred, {"method", "c_h", "bandwidth", "value", "n", "noise_sd", "seed"},
                 "predictor");
      cfg.predictor.method = parse_method(get_string(pred, "method"), "predictor");
      cfg.predictor.c_h = get_number(pred, "c_h", 1.0);
      cfg.predictor.bandwidth = get_number(pred, "bandwidth", 0.0);
      cfg.predictor.value = get_number(pred, "value", 0.0);
      cfg.predictor.noise_sd = get_number(pred, "noise_sd", 0.2);
      cfg.predictor.n = static_cast<std::size_t>(get_integer(pred, "n", 256));
      cfg.predictor.seed = static_cast<std::uint64_t>(get_integer(pred, "seed", 1));
      cfg.predictor.present = true;
    }
    if (root.contains("n")) {
      const auto v = get_integer(root, "n", 0);
      if (v < 1) throw ConfigError("config: 'n' must be >= 1");
      cfg.n = static_cast<std::size_t>(v);
      cfg.has_n = true;
    }
    if (root.contains("n_grid")) {
      const auto& arr = root.at("n_grid");
      if (!arr.is_array()) throw ConfigError("config: 'n_grid' must be an array");
      for (const auto& e : arr) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 1)
          throw ConfigError("config: 'n_grid' must hold positive integers");
        cfg.n_grid.push_back(static_cast<std::size_t>(e.get<std::int64_t>()));
      }
    }
    cfg.replicates = static_cast<int>(get_integer(root, "replicates", 1));
    if (cfg.replicates < 1) throw ConfigError("config: 'replicates' must be >= 1");
    cfg.noise_sd = get_number(root, "noise_sd", 0.2);
    if (cfg.noise_sd < 0.0) throw ConfigError("config: 'noise_sd' must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(get_integer(root, "seed", 1));
    cfg.lattice_resolution = static_cast<int>(get_integer(root, "lattice_resolution", 0));
    if (cfg.lattice_resolution < 0 || cfg.lattice_resolution == 1)
      throw ConfigError("config: 'lattice_resolution' must be 0 (auto) or >= 2");
    cfg.sample_resolution = static_cast<int>(get_integer(root, "sample_resolution", 0));
    if (cfg.sample_resolution < 0)
      throw ConfigError("config: 'sample_resolution' must be >= 0");
    if (root.contains("q_grid")) cfg.q_grid = get_vec(root, "q_grid");
    cfg.q_scale = get_number(root, "q_scale", 0.0);
    cfg.q_exponent = get_number(root, "q_exponent", 0.0);
    if (cfg.q_scale < 0.0 || cfg.q_exponent < 0.0)
      throw ConfigError("config: 'q_scale' and 'q_exponent' must be >= 0");
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
}

}  // namespace advreg
