#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "gpucb/harness.hpp"
#include "gpucb/kernels.hpp"
#include "gpucb/rkhs.hpp"
#include "gpucb/theory_checks.hpp"

namespace gpucb {

nlohmann::json to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);

/// {"kernel", "centers", "coefficients", "norm", "seed"}
nlohmann::json to_json(const RkhsFunction& f);
RkhsFunction objective_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PolicyConfig& policy);
PolicyConfig policy_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& config);
/// Fields present in `j` override the matching fields of `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

nlohmann::json to_json(const EllipticalCount& count);
nlohmann::json to_json(const LambdaCertificate& cert);
nlohmann::json to_json(const CumulativeCertificate& cert);
nlohmann::json to_json(const ScheduleFit& fit);

}  // namespace gpucb
