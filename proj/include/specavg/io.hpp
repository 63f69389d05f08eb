#pragma once

// JSON documents for manifolds, groups, fitted models and experiment configs.
// Readers reject unknown keys.

#include <string>

#include "json.hpp"

#include "specavg/harness.hpp"
#include "specavg/kernels.hpp"
#include "specavg/spec_avg.hpp"
#include "specavg/spectra.hpp"
#include "specavg/symmetry.hpp"

namespace specavg {

using Json = nlohmann::json;

Json to_json(const ManifoldSpec& manifold);
ManifoldSpec manifold_from_json(const Json& j);

Json to_json(const GroupSpec& group);
GroupSpec group_from_json(const Json& j);

Json to_json(const EigenIndex& index);
EigenIndex eigen_index_from_json(const Json& j);

/// Model document: manifold, group, alpha, cutoff and the
/// (frequencies, pattern, value) triples in basis order.
Json to_json(const SpectralModel& model);
SpectralModel model_from_json(const Json& j);

Json to_json(const KernelSpec& kernel);
KernelSpec kernel_from_json(const Json& j);

Json to_json(const KrrModel& model);
KrrModel krr_model_from_json(const Json& j);

Json to_json(const TargetSpec& target);
TargetSpec target_from_json(const Json& j);

Json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const Json& j);

Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

ExperimentConfig load_config(const std::string& path);

}  // namespace specavg
