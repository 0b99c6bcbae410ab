#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "eivreg/bounds.hpp"
#include "eivreg/estimation.hpp"
#include "eivreg/metrics.hpp"
#include "eivreg/regression.hpp"
#include "eivreg/synth.hpp"

namespace eivreg {

using Json = nlohmann::json;

// Tagged variants are objects with a "kind" member naming the alternative:
//   {"kind": "Gaussian", "sd": 0.5}
//   {"kind": "LowRankEven", "r": 5, "frob_const": 1.0}
//   {"kind": "FixedRank", "k": 5}
// Unknown members are rejected with ValidationError.

/// Throws ValidationError if `j` is not an object or holds a key outside `allowed`.
void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view context);

Json to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(const Json& j);

/// Explicit covariates accept either inline "values" rows or a "path" to a dense CSV.
Json to_json(const CovariateModel& model);
CovariateModel covariate_model_from_json(const Json& j);

/// beta_star is either a JSON array or {"sparsity", "magnitude_range": [lo, hi]}.
Json to_json(const BetaSpec& beta);
BetaSpec beta_spec_from_json(const Json& j);

Json to_json(const ScenarioConfig& config);
ScenarioConfig scenario_config_from_json(const Json& j);

Json to_json(const ThresholdPolicy& policy);
ThresholdPolicy threshold_policy_from_json(const Json& j);

Json to_json(const ModelParams& params);
/// Copies of `base` with any members present in `overrides` replaced.
ModelParams apply_overrides(ModelParams base, const Json& overrides);

Json to_json(const ErrorReport& report);

/// Scalar summary of a fit; matrices are referenced by path.
Json fit_summary_json(const Fit& fit, const std::filesystem::path& a_hat_path, const std::filesystem::path& y_hat_path);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace eivreg
