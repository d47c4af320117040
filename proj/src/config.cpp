#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "fjd/harness.hpp"

namespace fjd::harness {

namespace {

/// Typed access to one config section; rejects keys it was not asked about.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (!doc.is_object()) throw ConfigError("section '" + name_ + "' must be an object");
    doc_ = &doc;
  }

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    seen_.insert(key);
    if (!doc_->contains(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!doc_->contains(key)) throw ConfigError("missing key '" + name_ + "." + key + "'");
    return convert<T>(key);
  }

  bool has(const std::string& key) const { return doc_->contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return doc_->at(key);
  }

  void finish() const {
    for (const auto& [key, _] : doc_->items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + name_ + "." + key + "'");
  }

 private:
  template <typename T>
  T convert(const std::string& key) const {
    const json& v = doc_->at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>)
          if (v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  const json* doc_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

void require_positive(double v, const std::string& key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("'" + key + "' must be positive");
}

InitialDensity parse_initial(const json& j) {
  Section s(j, "hierarchy.initial");
  InitialDensity d;
  d.type = s.get<std::string>("type", d.type);
  if (d.type == "uniform") {
    d.kappa = s.require<double>("kappa");
    if (!(d.kappa >= 0.0)) throw ConfigError("'hierarchy.initial.kappa' must be >= 0");
  } else if (d.type == "gaussian-bump") {
    d.base = s.get<double>("base", 0.0);
    d.amplitude = s.require<double>("amplitude");
    d.width = s.require<double>("width");
    d.center = s.get<std::vector<double>>("center", {});
    require_positive(d.width, "hierarchy.initial.width");
    if (d.base < 0.0 || d.amplitude < 0.0)
      throw ConfigError("gaussian-bump base and amplitude must be >= 0");
  } else {
    throw ConfigError("unknown 'hierarchy.initial.type' '" + d.type + "'");
  }
  s.finish();
  return d;
}

json initial_to_json(const InitialDensity& d) {
  if (d.type == "uniform") return {{"type", d.type}, {"kappa", d.kappa}};
  json j = {{"type", d.type}, {"base", d.base}, {"amplitude", d.amplitude}, {"width", d.width}};
  if (!d.center.empty()) j["center"] = d.center;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config document must be an object");
  static const std::set<std::string> sections{"grid", "kernel", "hierarchy", "time",
                                              "sim",  "checks", "output"};
  for (const auto& [key, _] : doc.items())
    if (!sections.count(key)) throw ConfigError("unknown section '" + key + "'");

  ExperimentConfig c;
  if (doc.contains("grid")) {
    Section s(doc.at("grid"), "grid");
    const int d = s.require<int>("d");
    const int m = s.require<int>("M");
    const double h = s.require<double>("h");
    s.finish();
    try {
      c.grid = GridSpec(d, m, h);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  }
  if (doc.contains("kernel")) {
    Section s(doc.at("kernel"), "kernel");
    KernelConfig k;
    k.shape = s.require<std::string>("shape");
    k.alpha = s.require<double>("alpha");
    require_positive(k.alpha, "kernel.alpha");
    if (k.shape == "gaussian") {
      k.sigma = s.require<double>("sigma");
      require_positive(k.sigma, "kernel.sigma");
    } else if (k.shape == "uniform-ball") {
      k.radius = s.require<double>("radius");
      require_positive(k.radius, "kernel.radius");
    } else if (k.shape == "table") {
      k.table = s.require<std::vector<double>>("table");
    } else {
      throw ConfigError("unknown 'kernel.shape' '" + k.shape + "'");
    }
    s.finish();
    c.kernel = k;
  }
  if (doc.contains("hierarchy")) {
    Section s(doc.at("hierarchy"), "hierarchy");
    HierarchyConfig h;
    h.order = s.require<int>("N");
    if (h.order < 0) throw ConfigError("'hierarchy.N' must be >= 0");
    h.theta = s.get<double>("theta", 0.0);
    h.initial = parse_initial(s.raw("initial"));
    s.finish();
    c.hierarchy = h;
  }
  if (doc.contains("time")) {
    Section s(doc.at("time"), "time");
    TimeConfig t;
    t.horizon = s.require<double>("T");
    t.dt = s.require<double>("dt");
    t.snapshot_every = s.get<std::size_t>("snapshot_every", 0);
    t.max_dt_alpha = s.get<double>("max_dt_alpha", t.max_dt_alpha);
    if (!(t.horizon >= 0.0)) throw ConfigError("'time.T' must be >= 0");
    require_positive(t.dt, "time.dt");
    s.finish();
    c.time = t;
  }
  if (doc.contains("sim")) {
    Section s(doc.at("sim"), "sim");
    SimConfig m;
    const auto replicas = s.require<std::int64_t>("replicas");
    if (replicas < 1) throw ConfigError("'sim.replicas' must be >= 1");
    m.replicas = static_cast<std::size_t>(replicas);
    m.seed = s.get<std::uint64_t>("seed", 0);
    m.horizon = s.require<double>("T");
    if (!(m.horizon >= 0.0)) throw ConfigError("'sim.T' must be >= 0");
    m.orders = s.get<std::vector<int>>("orders", m.orders);
    for (int o : m.orders)
      if (o != 1 && o != 2) throw ConfigError("'sim.orders' entries must be 1 or 2");
    m.compare = s.get<std::string>("compare", m.compare);
    if (m.compare != "exact" && m.compare != "self" && m.compare != "none")
      throw ConfigError("'sim.compare' must be exact, self or none");
    m.write_replicas = s.get<bool>("write_replicas", false);
    s.finish();
    c.sim = m;
  }
  if (doc.contains("checks")) {
    Section s(doc.at("checks"), "checks");
    ChecksConfig k;
    k.seed = s.get<std::uint64_t>("seed", 0);
    k.trials = s.get<int>("trials", k.trials);
    if (k.trials < 0) throw ConfigError("'checks.trials' must be >= 0");
    k.battery = s.get<std::vector<std::string>>("battery", k.battery);
    static const std::set<std::string> known{"conservation", "domination", "power_bound",
                                             "moment"};
    for (const auto& b : k.battery)
      if (!known.count(b)) throw ConfigError("unknown check '" + b + "' in 'checks.battery'");
    if (s.has("moment_fixtures")) {
      for (const auto& f : s.raw("moment_fixtures")) {
        Section fs(f, "checks.moment_fixtures[]");
        MomentFixture m;
        m.name = fs.require<std::string>("name");
        m.window = fs.require<std::vector<Index>>("window");
        m.values = fs.require<std::vector<double>>("values");
        fs.finish();
        if (m.window.size() > 20 || m.values.size() != (std::size_t{1} << m.window.size()))
          throw ConfigError("moment fixture '" + m.name + "' needs 2^|window| values");
        k.moment_fixtures.push_back(std::move(m));
      }
    }
    s.finish();
    c.checks = k;
  }
  if (doc.contains("output")) {
    Section s(doc.at("output"), "output");
    c.output_path = s.get<std::string>("path", c.output_path);
    s.finish();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc);
}

json ExperimentConfig::resolved() const {
  json j = json::object();
  if (grid)
    j["grid"] = {{"d", grid->dimension()}, {"M", grid->sites_per_axis()}, {"h", grid->spacing()}};
  if (kernel) {
    json k = {{"shape", kernel->shape}, {"alpha", kernel->alpha}};
    if (kernel->shape == "gaussian") k["sigma"] = kernel->sigma;
    if (kernel->shape == "uniform-ball") k["radius"] = kernel->radius;
    if (kernel->shape == "table") k["table"] = kernel->table;
    j["kernel"] = k;
  }
  if (hierarchy)
    j["hierarchy"] = {{"N", hierarchy->order},
                      {"theta", hierarchy->theta},
                      {"initial", initial_to_json(hierarchy->initial)}};
  if (time)
    j["time"] = {{"T", time->horizon},
                 {"dt", time->dt},
                 {"snapshot_every", time->snapshot_every},
                 {"max_dt_alpha", time->max_dt_alpha}};
  if (sim)
    j["sim"] = {{"replicas", sim->replicas}, {"seed", sim->seed},     {"T", sim->horizon},
                {"orders", sim->orders},     {"compare", sim->compare},
                {"write_replicas", sim->write_replicas}};
  if (checks) {
    json fixtures = json::array();
    for (const auto& f : checks->moment_fixtures)
      fixtures.push_back({{"name", f.name}, {"window", f.window}, {"values", f.values}});
    j["checks"] = {{"seed", checks->seed},
                   {"trials", checks->trials},
                   {"battery", checks->battery},
                   {"moment_fixtures", fixtures}};
  }
  j["output"] = {{"path", output_path}};
  return j;
}

KernelShape kernel_shape(const KernelConfig& k) {
  if (k.shape == "gaussian") return GaussianShape{k.sigma};
  if (k.shape == "uniform-ball") return BallShape{k.radius};
  return TableShape{k.table};
}

Eigen::VectorXd build_density(const InitialDensity& init, const GridSpec& grid) {
  Eigen::VectorXd rho(grid.sites());
  if (init.type == "uniform") {
    rho.setConstant(init.kappa);
    return rho;
  }
  std::vector<double> center = init.center;
  if (center.empty()) center.assign(static_cast<std::size_t>(grid.dimension()), grid.extent() / 2);
  if (static_cast<int>(center.size()) != grid.dimension())
    throw ConfigError("'hierarchy.initial.center' must have d entries");
  const double L = grid.extent();
  for (Index s = 0; s < grid.sites(); ++s) {
    const auto c = grid.coords(s);
    double r2 = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      double dx = (c[j] + 0.5) * grid.spacing() - center[j];
      dx -= L * std::round(dx / L);
      r2 += dx * dx;
    }
    rho(s) = init.base + init.amplitude * std::exp(-r2 / (2.0 * init.width * init.width));
  }
  return rho;
}

std::string fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fjd::harness
