#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "fjd/diagnostics.hpp"
#include "fjd/evolve.hpp"
#include "fjd/harness.hpp"
#include "fjd/kmc.hpp"
#include "fjd/moment.hpp"
#include "fjd/serialize.hpp"

namespace fjd::harness {

namespace fs = std::filesystem;

namespace {

/// Timings, outputs and status of one invocation; written even on failure.
class Manifest {
 public:
  Manifest(std::string command, std::string config_hash)
      : command_(std::move(command)), hash_(std::move(config_hash)) {}

  template <typename F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record {
      Manifest* m;
      std::string name;
      std::chrono::steady_clock::time_point t0;
      ~Record() {
        m->timings_.push_back(
            {name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
      }
    } rec{this, name, t0};
    return f();
  }

  void output(const fs::path& p) { outputs_.push_back(p.filename().string()); }

  void finish(int code, const std::string& error, const fs::path& dir) const {
    json timings = json::object();
    for (const auto& [k, v] : timings_) timings[k] = v;
    json j = {{"command", command_},
              {"artifact_version", kVersion},
              {"config_hash", hash_},
              {"exit_code", code},
              {"status", code == kExitOk ? "ok" : "error"},
              {"error", error.empty() ? json(nullptr) : json(error)},
              {"timings_seconds", timings},
              {"outputs", outputs_}};
    std::ofstream(dir / "manifest.json") << j.dump(2) << '\n';
  }

 private:
  std::string command_, hash_;
  std::vector<std::pair<std::string, double>> timings_;
  std::vector<std::string> outputs_;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_json(Manifest& m, const fs::path& p, const json& j) {
  std::ofstream(p) << j.dump() << '\n';
  m.output(p);
}

class Csv {
 public:
  Csv(Manifest& m, const fs::path& p, const std::string& header) : out_(p) {
    out_ << header << '\n';
    m.output(p);
  }
  template <typename... T>
  void row(const T&... cells) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(cells)), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <typename I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    return std::to_string(v);
  }
  std::ofstream out_;
};

template <typename T>
const T& need(const std::optional<T>& section, const char* name) {
  if (!section) throw ConfigError("missing section '" + std::string(name) + "'");
  return *section;
}

JumpKernel<double> build_kernel(const ExperimentConfig& c) {
  const auto& grid = need(c.grid, "grid");
  const auto& k = need(c.kernel, "kernel");
  try {
    return make_kernel<double>(kernel_shape(k), k.alpha, grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
}

void log(const RunOptions& o, const std::string& msg) {
  if (!o.quiet) std::cerr << "fjd: " << msg << '\n';
}

// ----------------------------------------------------------------------------

int cmd_evolve(const ExperimentConfig& c, const RunOptions& opts, const fs::path& out,
               Manifest& m) {
  const auto& grid = need(c.grid, "grid");
  const auto& hier = need(c.hierarchy, "hierarchy");
  const auto kernel = build_kernel(c);
  const auto& time = need(c.time, "time");

  HierarchyState<double> k0;
  k0.theta = hier.theta;
  k0.family = poisson_family<double>(grid, build_density(hier.initial, grid), hier.order);

  std::vector<HierarchyState<double>> rk4{k0};
  Rk4Options ro;
  ro.max_dt_alpha = time.max_dt_alpha;
  ro.observe_every = time.snapshot_every;
  ro.observer = [&](const HierarchyState<double>& s, std::size_t) { rk4.push_back(s); };
  m.stage("evolve_rk4", [&] { evolve_rk4(k0, kernel, time.horizon, time.dt, ro); });

  std::vector<HierarchyState<double>> exact;
  m.stage("exact_propagate", [&] {
    for (const auto& s : rk4) exact.push_back(exact_propagate(k0, kernel, s.time - k0.time));
  });
  log(opts, "evolved " + std::to_string(rk4.size() - 1) + " snapshot(s) to t = " +
                num(rk4.back().time));

  json traj_rk4 = json::array(), traj_exact = json::array();
  Csv div(m, out / "divergence.csv", "t,order,sup_error");
  Csv rep(m, out / "report.csv",
          "t,source,theta,norm_sup,norm_l1,phi,phi_beta,sub_poissonian_constant");
  m.stage("write", [&] {
    for (std::size_t i = 0; i < rk4.size(); ++i) {
      for (int n = 0; n <= hier.order; ++n) {
        traj_rk4.push_back(io::snapshot_record(i, rk4[i].time, n, rk4[i].family));
        traj_exact.push_back(io::snapshot_record(i, exact[i].time, n, exact[i].family));
        const double err =
            (rk4[i].family.component(n) - exact[i].family.component(n)).cwiseAbs().maxCoeff();
        div.row(rk4[i].time, n, err);
      }
      for (const auto* src : {&rk4[i], &exact[i]}) {
        const auto mf = mass_functionals(src->family, hier.theta);
        const double spc = hier.order >= 1 ? sub_poissonian_constant(src->family) : 0.0;
        rep.row(src->time, src == &rk4[i] ? "rk4" : "exact", hier.theta,
                norm_sup(src->family, hier.theta), norm_l1(src->family, hier.theta), mf.phi,
                mf.phi_beta, spc);
      }
    }
    write_json(m, out / "trajectory_rk4.json", {{"schema", "fjd.trajectory"}, {"records", traj_rk4}});
    write_json(m, out / "trajectory_exact.json",
               {{"schema", "fjd.trajectory"}, {"records", traj_exact}});
  });
  return kExitOk;
}

// ----------------------------------------------------------------------------

int cmd_simulate(const ExperimentConfig& c, const RunOptions& opts, const fs::path& out,
                 Manifest& m) {
  const auto& grid = need(c.grid, "grid");
  const auto& hier = need(c.hierarchy, "hierarchy");
  const auto kernel = build_kernel(c);
  const auto& sim = need(c.sim, "sim");
  if (grid.extent() < 10.0 * kernel.width())
    throw ConfigError("box extent must be at least 10x the kernel width");

  kmc::EnsembleSpec spec;
  spec.replicas = sim.replicas;
  spec.base_seed = opts.seed.value_or(sim.seed);
  spec.initial_density = build_density(hier.initial, grid);
  spec.kernel = kernel;
  spec.horizon = sim.horizon;
  const auto ens = m.stage("ensemble", [&] { return kmc::run_ensemble(spec, opts.threads); });
  log(opts, "simulated " + std::to_string(sim.replicas) + " replica(s)");

  if (sim.write_replicas) {
    Csv r(m, out / "replicas.csv", "replica,seed,particles,jumps");
    for (std::size_t i = 0; i < ens.replicas(); ++i)
      r.row(i, kmc::mix_seed(spec.base_seed, i), ens.particles[i], ens.jump_totals[i]);
  }

  std::optional<HierarchyState<double>> reference;
  if (sim.compare == "exact") {
    HierarchyState<double> k0;
    const int order = *std::max_element(sim.orders.begin(), sim.orders.end());
    k0.family = poisson_family<double>(grid, spec.initial_density, order);
    reference = exact_propagate(k0, kernel, sim.horizon);
  }

  bool all_pass = true;
  json comparisons = json::array();
  for (int order : sim.orders) {
    const auto emp = m.stage("estimate_k" + std::to_string(order),
                             [&] { return kmc::estimate_correlations(ens, order); });
    write_json(m, out / ("empirical_k" + std::to_string(order) + ".json"),
               io::empirical_to_json(emp));
    if (sim.compare == "none") continue;
    const auto ref = sim.compare == "self" ? kmc::as_state(emp) : *reference;
    const auto rep = kmc::compare_with_hierarchy(emp, ref);
    all_pass = all_pass && rep.pass;
    comparisons.push_back({{"order", order},
                           {"bins", rep.bins},
                           {"max_abs_z", rep.max_abs_z},
                           {"fraction_within_2", rep.fraction_within_2},
                           {"fraction_within_4", rep.fraction_within_4},
                           {"verdict", rep.pass ? "pass" : "fail"}});
    Csv z(m, out / ("zscores_k" + std::to_string(order) + ".csv"),
          "bin,estimate,reference,std_error,z");
    const auto& refc = ref.family.component(order);
    for (Index i = 0; i < refc.size(); ++i)
      z.row(i, emp.estimate(i), refc(i), emp.std_error(i), rep.z(i));
    log(opts, "order " + std::to_string(order) + ": " + num(100 * rep.fraction_within_4) +
                  "% of bins within 4 sigma -> " + (rep.pass ? "pass" : "fail"));
  }
  if (sim.compare != "none")
    write_json(m, out / "comparison.json",
               {{"reference", sim.compare},
                {"t", sim.horizon},
                {"replicas", sim.replicas},
                {"seed", spec.base_seed},
                {"verdict", all_pass ? "pass" : "fail"},
                {"orders", comparisons}});
  return all_pass ? kExitOk : kExitComparison;
}

// ----------------------------------------------------------------------------

Family<double> random_family(const GridSpec& grid, int order, std::mt19937_64& rng, bool nonneg) {
  std::uniform_real_distribution<double> u(nonneg ? 0.0 : -1.0, 1.0);
  Family<double> f(grid, order);
  for (int n = 0; n <= order; ++n)
    for (Index i = 0; i < f.component(n).size(); ++i) f.component(n)(i) = u(rng);
  symmetrize(f);
  return f;
}

int cmd_checks(const ExperimentConfig& c, const RunOptions& opts, const fs::path& out,
               Manifest& m) {
  const auto& checks = need(c.checks, "checks");
  Csv csv(m, out / "checks.csv", "name,lhs,rhs,ok");
  std::mt19937_64 rng(opts.seed.value_or(checks.seed));
  bool all_ok = true;
  auto emit = [&](const std::string& name, double lhs, double rhs, bool ok) {
    csv.row(name, lhs, rhs, ok ? "true" : "false");
    all_ok = all_ok && ok;
    if (!ok) log(opts, "check failed: " + name);
  };
  auto needs_generator = [&] {
    for (const auto& b : checks.battery)
      if (b != "moment") return true;
    return false;
  };
  std::optional<JumpKernel<double>> kernel;
  int order = 3;
  if (needs_generator()) {
    kernel = build_kernel(c);
    if (c.hierarchy) order = c.hierarchy->order;
  }
  std::uniform_int_distribution<int> pick_n(1, 5);

  for (const auto& check : checks.battery) {
    m.stage(check, [&] {
      if (check == "conservation") {
        for (int t = 0; t < checks.trials; ++t)
          for (double theta : {-1.0, 0.0, 1.0}) {
            const auto k = random_family(kernel->grid(), order, rng, false);
            const auto lk = apply_generator(k, *kernel);
            const auto mf = mass_functionals(lk, theta);
            const double bound = 1e-12 * norm_l1(generator_a_part(k, *kernel), theta);
            const std::string tag = "[trial=" + std::to_string(t) + ",theta=" + num(theta) + "]";
            emit("conservation.phi" + tag, std::abs(mf.phi), bound, std::abs(mf.phi) <= bound);
            emit("conservation.phi_beta" + tag, std::abs(mf.phi_beta), bound,
                 std::abs(mf.phi_beta) <= bound);
          }
      } else if (check == "domination") {
        for (int t = 0; t < checks.trials; ++t) {
          const std::string tag = "[trial=" + std::to_string(t) + "]";
          const auto mixed = random_family(kernel->grid(), order, rng, false);
          const auto r1 = b_dominated_by_a_check(mixed, *kernel, 0.5 * (t % 3 - 1));
          emit("domination" + tag, r1.lhs, r1.rhs, r1.ok);
          const auto pos = random_family(kernel->grid(), order, rng, true);
          const auto r2 = b_dominated_by_a_check(pos, *kernel, 0.5 * (t % 3 - 1));
          const double gap = std::abs(r2.lhs - r2.rhs);
          emit("domination.equality" + tag, gap, 1e-12 * r2.rhs, gap <= 1e-12 * r2.rhs);
        }
      } else if (check == "power_bound") {
        for (int t = 0; t < checks.trials; ++t) {
          const auto v = random_family(kernel->grid(), std::min(order, 3), rng, false);
          const int n = pick_n(rng);
          const double gap = t % 2 == 0 ? 0.5 : 1.0;
          const auto r = power_bound_check(v, *kernel, n, 0.0, gap);
          emit("power_bound[trial=" + std::to_string(t) + ",n=" + std::to_string(n) +
                   ",gap=" + num(gap) + "]",
               r.lhs, r.rhs, r.ok);
        }
      } else if (check == "moment") {
        for (int ki = 1; ki <= 9; ++ki) {
          const double kappa = ki / 10.0;
          std::vector<Index> sites(8);
          std::iota(sites.begin(), sites.end(), 0);
          const FiniteConfiguration w(sites);
          Eigen::VectorXd kv(Index{1} << w.size());
          for (Index s = 0; s < kv.size(); ++s)
            kv(s) = std::pow(kappa, popcount(static_cast<SubsetMask>(s)));
          const auto rep = density_from_correlation(
              WindowCorrelation<double>(w, static_cast<int>(w.size()), kv));
          emit("moment.product[kappa=" + num(kappa) + ",m=8]", rep.density.weights.minCoeff(),
               -rep.tolerance, rep.certified);
        }
        for (const auto& f : checks.moment_fixtures) {
          const FiniteConfiguration w(f.window);
          const Eigen::VectorXd kv =
              Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Index>(f.values.size()));
          const auto rep = density_from_correlation(
              WindowCorrelation<double>(w, static_cast<int>(w.size()), kv));
          std::string name = "moment.fixture[" + f.name + "]";
          if (!rep.certified) {
            name += " violations=";
            for (std::size_t i = 0; i < rep.violations.size(); ++i) {
              name += i ? ";{" : "{";
              const auto sub = rep.violations[i].subset.sites();
              for (std::size_t j = 0; j < sub.size(); ++j) name += (j ? " " : "") + std::to_string(sub[j]);
              name += "}";
            }
          }
          emit(name, rep.density.weights.minCoeff(), -rep.tolerance, rep.certified);
        }
      }
    });
  }
  return all_ok ? kExitOk : kExitChecks;
}

// ----------------------------------------------------------------------------

int cmd_kernel_make(const ExperimentConfig& c, const RunOptions& opts, const fs::path& out,
                    Manifest& m) {
  const auto kernel = build_kernel(c);
  write_json(m, out / "kernel.json", io::kernel_to_json(kernel));
  Csv csv(m, out / "kernel.csv", "cell,displacement,value,symbol");
  for (Index i = 0; i < kernel.values().size(); ++i) {
    std::string disp;
    for (double v : kernel.grid().min_image(i)) disp += (disp.empty() ? "" : " ") + num(v);
    csv.row(i, disp, kernel.values()(i), kernel.symbol()(i));
  }
  log(opts, "kernel alpha = " + num(kernel.alpha()));
  return kExitOk;
}

}  // namespace

int run(const std::string& command, const json& doc, const RunOptions& opts) {
  using Command = int (*)(const ExperimentConfig&, const RunOptions&, const fs::path&, Manifest&);
  Command fn = nullptr;
  if (command == "evolve") fn = cmd_evolve;
  if (command == "simulate") fn = cmd_simulate;
  if (command == "checks") fn = cmd_checks;
  if (command == "kernel-make") fn = cmd_kernel_make;
  if (!fn) {
    std::cerr << "fjd: unknown command '" << command << "'\n";
    return kExitConfig;
  }

  fs::path out = opts.out_dir;
  std::optional<ExperimentConfig> cfg;
  std::string config_error;
  try {
    cfg = parse_config(doc);
    if (out.empty()) out = cfg->output_path;
  } catch (const ConfigError& e) {
    config_error = e.what();
  }
  if (out.empty()) out = ".";
  fs::create_directories(out);

  const std::string resolved = cfg ? cfg->resolved().dump(2) : doc.dump(2);
  Manifest manifest(command, fingerprint(resolved));
  if (!cfg) {
    std::cerr << "fjd: config error: " << config_error << '\n';
    manifest.finish(kExitConfig, config_error, out);
    return kExitConfig;
  }
  std::ofstream(out / "config.resolved.json") << resolved << '\n';
  manifest.output(out / "config.resolved.json");

  int code = kExitFailure;
  std::string error;
  try {
    code = fn(*cfg, opts, out, manifest);
  } catch (const ConfigError& e) {
    code = kExitConfig;
    error = std::string("config error: ") + e.what();
  } catch (const DivergenceError& e) {
    code = kExitDivergence;
    error = std::string("numerical divergence: ") + e.what();
  } catch (const std::exception& e) {
    code = kExitFailure;
    error = e.what();
  }
  if (!error.empty()) std::cerr << "fjd: " << error << '\n';
  manifest.finish(code, error, out);
  return code;
}

namespace {

// No config to read an output path from: the manifest goes to --out if given.
int unreadable_config(const std::string& command, const RunOptions& opts, const std::string& why) {
  std::cerr << "fjd: " << why << '\n';
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    Manifest(command, fingerprint("")).finish(kExitConfig, why, opts.out_dir);
  }
  return kExitConfig;
}

}  // namespace

int run(const std::string& command, const fs::path& config_path, const RunOptions& opts) {
  json doc;
  {
    std::ifstream in(config_path);
    if (!in) return unreadable_config(command, opts, "cannot open config '" + config_path.string() + "'");
    try {
      doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      return unreadable_config(command, opts, std::string("config parse error: ") + e.what());
    }
  }
  return run(command, doc, opts);
}

}  // namespace fjd::harness
