#include "gpucb/serialization.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace gpucb {

using nlohmann::json;

namespace {

KernelFamily parse_family(const std::string& name) {
  if (name == "se" || name == "squared_exponential") return KernelFamily::SquaredExponential;
  if (name == "matern") return KernelFamily::Matern;
  throw std::invalid_argument("unknown kernel family '" + name + "'");
}

const char* family_name(KernelFamily family) {
  return family == KernelFamily::SquaredExponential ? "se" : "matern";
}

KernelSpec make_kernel(KernelFamily family, double ell, double nu) {
  return family == KernelFamily::SquaredExponential ? KernelSpec::squared_exponential(ell)
                                                    : KernelSpec::matern(nu, ell);
}

json point_to_json(const Point& x) {
  json out = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out.push_back(x[i]);
  }
  return out;
}

Point point_from_json(const json& j) {
  const auto coords = j.get<std::vector<double>>();
  Point x(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = coords[i];
  }
  return x;
}

template <typename T>
void read_if(const json& j, const char* key, T& target) {
  if (const auto it = j.find(key); it != j.end()) {
    target = it->get<T>();
  }
}

}  // namespace

json to_json(const KernelSpec& spec) {
  json out{{"family", family_name(spec.family())}, {"ell", spec.lengthscale()}};
  if (spec.family() == KernelFamily::Matern) {
    out["nu"] = spec.nu();
  }
  return out;
}

KernelSpec kernel_from_json(const json& j) {
  const auto family = parse_family(j.at("family").get<std::string>());
  return make_kernel(family, j.at("ell").get<double>(), j.value("nu", 0.0));
}

json to_json(const RkhsFunction& f) {
  json centers = json::array();
  for (const auto& c : f.centers()) {
    centers.push_back(point_to_json(c));
  }
  json out{{"kernel", to_json(f.spec())},
           {"centers", std::move(centers)},
           {"coefficients", std::vector<double>(f.coefficients().begin(), f.coefficients().end())},
           {"norm", f.norm()}};
  out["seed"] = f.seed() ? json(*f.seed()) : json(nullptr);
  return out;
}

RkhsFunction objective_from_json(const json& j) {
  std::vector<Point> centers;
  for (const auto& c : j.at("centers")) {
    centers.push_back(point_from_json(c));
  }
  RkhsFunction f(kernel_from_json(j.at("kernel")), std::move(centers),
                 j.at("coefficients").get<std::vector<double>>());
  if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    f.set_seed(it->get<std::uint64_t>());
  }
  return f;
}

json to_json(const PolicyConfig& policy) {
  json out{{"name", policy_name(policy.kind)}};
  if (policy.beta_sqrt) {
    out["beta_sqrt"] = *policy.beta_sqrt;
  }
  if (policy.kind == PolicyKind::PhasedElimination) {
    out["initial_batch"] = policy.pe_initial_batch;
  }
  return out;
}

PolicyConfig policy_from_json(const json& j) {
  PolicyConfig policy;
  if (j.is_string()) {
    policy.kind = parse_policy_kind(j.get<std::string>());
  } else {
    policy.kind = parse_policy_kind(j.at("name").get<std::string>());
    if (const auto it = j.find("beta_sqrt"); it != j.end() && !it->is_null()) {
      policy.beta_sqrt = it->get<double>();
    }
    read_if(j, "initial_batch", policy.pe_initial_batch);
  }
  policy.validate();
  return policy;
}

json to_json(const ExperimentConfig& config) {
  json policies = json::array();
  for (const auto& p : config.policies) {
    policies.push_back(to_json(p));
  }
  json out{{"kernel", family_name(config.kernel.family())},
           {"ell", config.kernel.lengthscale()},
           {"nu", config.kernel.nu()},
           {"grid", config.grid_resolution},
           {"dim", config.dim},
           {"horizon", config.horizon},
           {"seeds", config.num_seeds},
           {"master_seed", config.master_seed},
           {"policies", std::move(policies)},
           {"expansion_size", config.expansion_size},
           {"beta_mode", beta_mode_name(config.beta_mode)},
           {"threads", config.threads},
           {"audit", config.audit}};
  out["norm_bound"] = config.norm_bound ? json(*config.norm_bound) : json(nullptr);
  out["out"] = config.output_dir.string();
  return out;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
  if (!j.is_object()) {
    throw std::invalid_argument("experiment config must be a JSON object");
  }
  KernelFamily family = base.kernel.family();
  double ell = base.kernel.lengthscale();
  double nu = base.kernel.nu();
  if (const auto it = j.find("kernel"); it != j.end()) {
    if (it->is_object()) {
      family = parse_family(it->at("family").get<std::string>());
      read_if(*it, "ell", ell);
      read_if(*it, "nu", nu);
    } else {
      family = parse_family(it->get<std::string>());
    }
  }
  read_if(j, "ell", ell);
  read_if(j, "nu", nu);
  if (family == KernelFamily::Matern && nu == 0.0) {
    nu = 2.5;
  }
  base.kernel = make_kernel(family, ell, nu);

  read_if(j, "grid", base.grid_resolution);
  read_if(j, "dim", base.dim);
  read_if(j, "horizon", base.horizon);
  read_if(j, "seeds", base.num_seeds);
  read_if(j, "master_seed", base.master_seed);
  read_if(j, "expansion_size", base.expansion_size);
  read_if(j, "threads", base.threads);
  read_if(j, "audit", base.audit);
  if (const auto it = j.find("policies"); it != j.end()) {
    base.policies.clear();
    for (const auto& p : *it) {
      base.policies.push_back(policy_from_json(p));
    }
  }
  if (const auto it = j.find("beta_mode"); it != j.end()) {
    base.beta_mode = parse_beta_mode(it->get<std::string>());
  }
  if (const auto it = j.find("norm_bound"); it != j.end()) {
    base.norm_bound = it->is_null() ? std::nullopt : std::optional<double>(it->get<double>());
  }
  if (const auto it = j.find("out"); it != j.end()) {
    base.output_dir = it->get<std::string>();
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config '" + path.string() + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid JSON in '" + path.string() + "': " + e.what());
  }
  return config_from_json(j, std::move(base));
}

json to_json(const EllipticalCount& count) {
  return json{{"lambda", count.lambda},
              {"count", count.count},
              {"realized_gain", count.realized_gain},
              {"bound", count.bound()},
              {"within_bound", count.within_bound()}};
}

json to_json(const LambdaCertificate& cert) {
  return json{{"horizon", cert.horizon},
              {"lambda_star", cert.lambda_star},
              {"realized_gain", cert.realized_gain},
              {"min_std", cert.min_std},
              {"feasible", cert.feasible},
              {"at_lower_bracket", cert.at_lower_bracket},
              {"iterations", cert.iterations},
              {"pass", cert.pass}};
}

json to_json(const CumulativeCertificate& cert) {
  json steps = json::array();
  for (const auto& s : cert.steps) {
    steps.push_back(json{{"t", s.horizon}, {"lambda_star", s.lambda_star}, {"realized_gain", s.realized_gain}});
  }
  return json{{"horizon", cert.horizon},
              {"first_feasible", cert.first_feasible},
              {"lhs", cert.lhs},
              {"rhs", cert.rhs},
              {"margin", cert.margin()},
              {"pass", cert.pass},
              {"steps", std::move(steps)}};
}

json to_json(const ScheduleFit& fit) {
  return json{{"family", fit.fitted.family == ScheduleFamily::SquaredExponential ? "se" : "matern"},
              {"dim", fit.fitted.dim},
              {"nu", fit.fitted.nu},
              {"constant", fit.fitted.constant},
              {"envelope_ratio", fit.envelope_ratio},
              {"residual_rms", fit.residual_rms},
              {"trend_slope", fit.trend_slope},
              {"samples", fit.samples},
              {"pass", fit.pass}};
}

}  // namespace gpucb
