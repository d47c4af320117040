#include "fjd/serialize.hpp"

#include <string>

namespace fjd::io {

json grid_to_json(const GridSpec& g) {
  return {{"d", g.dimension()}, {"M", g.sites_per_axis()}, {"h", g.spacing()}};
}

GridSpec grid_from_json(const json& j) {
  return {j.at("d").get<int>(), j.at("M").get<int>(), j.at("h").get<double>()};
}

json nest(const Eigen::VectorXd& flat, Index sites_per_level, int depth) {
  if (depth == 0) return flat(0);
  // Build bottom-up: group innermost runs first.
  std::vector<json> level(static_cast<std::size_t>(flat.size()));
  for (Index i = 0; i < flat.size(); ++i) level[static_cast<std::size_t>(i)] = flat(i);
  for (int k = 0; k < depth; ++k) {
    std::vector<json> up;
    up.reserve(level.size() / static_cast<std::size_t>(sites_per_level));
    for (std::size_t i = 0; i < level.size(); i += static_cast<std::size_t>(sites_per_level)) {
      json arr = json::array();
      for (Index j = 0; j < sites_per_level; ++j)
        arr.push_back(std::move(level[i + static_cast<std::size_t>(j)]));
      up.push_back(std::move(arr));
    }
    level.swap(up);
  }
  return std::move(level.front());
}

namespace {

void flatten(const json& j, Index sites_per_level, int depth, std::vector<double>& out) {
  if (depth == 0) {
    out.push_back(j.get<double>());
    return;
  }
  if (!j.is_array() || static_cast<Index>(j.size()) != sites_per_level)
    throw InvalidInput("nested component has the wrong shape");
  for (const auto& e : j) flatten(e, sites_per_level, depth - 1, out);
}

}  // namespace

Eigen::VectorXd unnest(const json& j, Index sites_per_level, int depth) {
  std::vector<double> out;
  flatten(j, sites_per_level, depth, out);
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Index>(out.size()));
}

json family_to_json(const Family<double>& f) {
  json comps = json::array();
  for (int n = 0; n <= f.order(); ++n) comps.push_back(nest(f.component(n), f.grid().sites(), n));
  json window = nullptr;
  if (f.window()) window = *f.window();
  return {{"order", f.order()}, {"grid", grid_to_json(f.grid())}, {"window", window},
          {"components", std::move(comps)}};
}

Family<double> family_from_json(const json& j) {
  const GridSpec grid = grid_from_json(j.at("grid"));
  const int order = j.at("order").get<int>();
  const auto& comps = j.at("components");
  if (!comps.is_array() || static_cast<int>(comps.size()) != order + 1)
    throw InvalidInput("family: expected order + 1 components");
  Family<double> f(grid, order);
  for (int n = 0; n <= order; ++n)
    f.component(n) = unnest(comps.at(static_cast<std::size_t>(n)), grid.sites(), n);
  if (!j.at("window").is_null()) f.set_window(j.at("window").get<std::vector<Index>>());
  return f;
}

namespace {

json mask_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd read_vector(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

FiniteConfiguration read_window(const json& j) {
  return FiniteConfiguration(j.get<std::vector<Index>>());
}

std::vector<Index> window_sites(const FiniteConfiguration& w) {
  return {w.sites().begin(), w.sites().end()};
}

}  // namespace

json density_to_json(const WindowDensity<double>& mu) {
  return {{"kind", "window_density"},
          {"order", mu.sites()},
          {"window", window_sites(mu.window)},
          {"components", mask_vector(mu.weights)}};
}

WindowDensity<double> density_from_json(const json& j) {
  return {read_window(j.at("window")), read_vector(j.at("components"))};
}

json correlation_to_json(const WindowCorrelation<double>& k) {
  return {{"kind", "window_correlation"},
          {"order", k.order},
          {"window", window_sites(k.window)},
          {"components", mask_vector(k.values)}};
}

WindowCorrelation<double> correlation_from_json(const json& j) {
  return {read_window(j.at("window")), j.at("order").get<int>(), read_vector(j.at("components"))};
}

json empirical_to_json(const kmc::EmpiricalCorrelation& e) {
  return {{"kind", "empirical_correlation"},
          {"order", e.order},
          {"grid", grid_to_json(e.grid)},
          {"window", nullptr},
          {"t", e.time},
          {"replicas", e.replicas},
          {"components", nest(e.estimate, e.grid.sites(), e.order)},
          {"std_error", nest(e.std_error, e.grid.sites(), e.order)}};
}

json kernel_to_json(const JumpKernel<double>& a) {
  json sym = std::vector<double>(a.symbol().data(), a.symbol().data() + a.symbol().size());
  return {{"kind", "jump_kernel"},
          {"grid", grid_to_json(a.grid())},
          {"alpha", a.alpha()},
          {"width", a.width()},
          {"values", mask_vector(a.values())},
          {"multiplier_real", std::move(sym)}};
}

json snapshot_record(std::size_t index, double t, int order, const Family<double>& f) {
  return {{"index", index}, {"t", t}, {"order", order},
          {"tensor", nest(f.component(order), f.grid().sites(), order)}};
}

}  // namespace fjd::io
