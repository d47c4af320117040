#pragma once

#include <nlohmann/json.hpp>

#include "fjd/evolve.hpp"
#include "fjd/kernel.hpp"
#include "fjd/kmc.hpp"
#include "fjd/moment.hpp"

namespace fjd::io {

using nlohmann::json;

// Common schema: {"order": n, "window": [...] | null, "components": [...]}.
// A grid family stores component n as an n-deep nested array of length M^d
// per level; window objects store their values indexed by subset bit mask.
// Doubles are written in shortest round-trip form, so reading back is exact.

json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j);

json family_to_json(const Family<double>& f);
Family<double> family_from_json(const json& j);

/// Component n as nested arrays.
json nest(const Eigen::VectorXd& flat, Index sites_per_level, int depth);
Eigen::VectorXd unnest(const json& j, Index sites_per_level, int depth);

json density_to_json(const WindowDensity<double>& mu);
WindowDensity<double> density_from_json(const json& j);

json correlation_to_json(const WindowCorrelation<double>& k);
WindowCorrelation<double> correlation_from_json(const json& j);

json empirical_to_json(const kmc::EmpiricalCorrelation& e);

json kernel_to_json(const JumpKernel<double>& a);

/// Trajectory record {"index", "t", "order", "tensor"}.
json snapshot_record(std::size_t index, double t, int order, const Family<double>& f);

}  // namespace fjd::io
