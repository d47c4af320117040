#include "fjd/kmc.hpp"

#include <algorithm>
#include <cmath>

#include "fjd/parallel.hpp"

namespace fjd::kmc {

std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t replica) {
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (replica + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

double wrap_coord(double x, double extent) {
  x = std::fmod(x, extent);
  if (x < 0.0) x += extent;
  if (x >= extent) x = 0.0;
  return x;
}

}  // namespace

Eigen::VectorXd ParticleSystem::position(std::size_t i) const {
  const auto d = static_cast<std::size_t>(grid_.dimension());
  Eigen::VectorXd x(grid_.dimension());
  for (std::size_t j = 0; j < d; ++j) x(static_cast<Index>(j)) = coords_[i * d + j];
  return x;
}

void ParticleSystem::set_position(std::size_t i, const Eigen::VectorXd& x) {
  const auto d = static_cast<std::size_t>(grid_.dimension());
  if (x.size() != grid_.dimension()) throw InvalidInput("position has wrong dimension");
  for (std::size_t j = 0; j < d; ++j)
    coords_[i * d + j] = wrap_coord(x(static_cast<Index>(j)), grid_.extent());
}

void ParticleSystem::add(const Eigen::VectorXd& x) {
  coords_.resize(coords_.size() + static_cast<std::size_t>(grid_.dimension()));
  jumps_.push_back(0);
  set_position(jumps_.size() - 1, x);
}

Index ParticleSystem::cell_of(std::size_t i) const {
  const auto d = static_cast<std::size_t>(grid_.dimension());
  const int m = grid_.sites_per_axis();
  Index s = 0;
  for (std::size_t j = 0; j < d; ++j) {
    int c = static_cast<int>(std::floor(coords_[i * d + j] / grid_.spacing()));
    s = s * m + std::clamp(c, 0, m - 1);
  }
  return s;
}

std::vector<std::int32_t> ParticleSystem::cell_counts() const {
  std::vector<std::int32_t> counts(static_cast<std::size_t>(grid_.sites()), 0);
  for (std::size_t i = 0; i < size(); ++i) ++counts[static_cast<std::size_t>(cell_of(i))];
  return counts;
}

JumpSampler::JumpSampler(const JumpKernel<double>& kernel)
    : grid_(kernel.grid()), alpha_(kernel.alpha()) {
  cdf_.resize(static_cast<std::size_t>(kernel.values().size()));
  double acc = 0.0;
  for (Index i = 0; i < kernel.values().size(); ++i) {
    acc += kernel.values()(i);
    cdf_[static_cast<std::size_t>(i)] = acc;
  }
}

Index JumpSampler::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, cdf_.back());
  for (;;) {
    const double r = u(rng);
    // upper_bound never lands on a zero-weight cell: its predecessor has the same CDF value.
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), r);
    if (it != cdf_.end()) return static_cast<Index>(it - cdf_.begin());
  }
}

ParticleSystem sample_initial_poisson(const Eigen::VectorXd& rho0, const GridSpec& grid,
                                      std::uint64_t seed) {
  if (rho0.size() != grid.sites()) throw InvalidInput("initial density size != site count");
  if (!rho0.allFinite() || (rho0.array() < 0.0).any())
    throw InvalidInput("initial density must be finite and nonnegative");
  ParticleSystem sys(grid, seed);
  const double mean = grid.cell_volume() * rho0.sum();
  if (!(mean > 0.0)) return sys;
  auto& rng = sys.rng();
  const auto count = std::poisson_distribution<std::int64_t>(mean)(rng);
  std::discrete_distribution<Index> cell(rho0.data(), rho0.data() + rho0.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(grid.dimension());
  for (std::int64_t p = 0; p < count; ++p) {
    const auto c = grid.coords(cell(rng));
    for (int j = 0; j < grid.dimension(); ++j)
      x(j) = (c[static_cast<std::size_t>(j)] + u(rng)) * grid.spacing();
    sys.add(x);
  }
  return sys;
}

ParticleSystem simulate(ParticleSystem sys, const JumpSampler& sampler, double horizon) {
  if (!(horizon >= sys.clock())) throw InvalidInput("simulate: T must be >= the current clock");
  require_same_grid(sys.grid(), sampler.grid(), "simulate");
  const GridSpec& grid = sys.grid();
  const std::size_t n = sys.size();
  if (n == 0) {
    sys.set_clock(horizon);
    return sys;
  }
  auto& rng = sys.rng();
  std::exponential_distribution<double> wait(static_cast<double>(n) * sampler.alpha());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(grid.dimension());
  double t = sys.clock();
  for (;;) {
    t += wait(rng);
    if (t > horizon) break;
    const std::size_t i = pick(rng);
    const auto from = grid.coords(sys.cell_of(i));
    const auto delta = grid.coords(sampler.sample(rng));
    for (int j = 0; j < grid.dimension(); ++j) {
      const auto ju = static_cast<std::size_t>(j);
      x(j) = (grid.wrap(from[ju] + delta[ju]) + u(rng)) * grid.spacing();
    }
    sys.set_position(i, x);
    sys.record_jump(i);
  }
  sys.set_clock(horizon);
  return sys;
}

namespace {

void store(EnsembleResult& r, std::size_t col, const ParticleSystem& sys) {
  const auto counts = sys.cell_counts();
  for (std::size_t c = 0; c < counts.size(); ++c)
    r.counts(static_cast<Index>(c), static_cast<Index>(col)) = counts[c];
  std::uint64_t jumps = 0;
  for (std::size_t i = 0; i < sys.size(); ++i) jumps += sys.jumps(i);
  r.jump_totals[col] = jumps;
  r.particles[col] = sys.size();
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec, unsigned threads) {
  if (spec.replicas < 1) throw InvalidInput("ensemble needs at least one replica");
  if (!(spec.horizon >= 0.0)) throw InvalidInput("ensemble horizon must be >= 0");
  const GridSpec& grid = spec.kernel.grid();
  EnsembleResult r;
  r.grid = grid;
  r.time = spec.horizon;
  r.counts.resize(grid.sites(), static_cast<Index>(spec.replicas));
  r.jump_totals.resize(spec.replicas);
  r.particles.resize(spec.replicas);
  const JumpSampler sampler(spec.kernel);
  parallel_for(spec.replicas, threads, [&](std::size_t i) {
    auto sys = sample_initial_poisson(spec.initial_density, grid, mix_seed(spec.base_seed, i));
    sys = simulate(std::move(sys), sampler, spec.horizon);
    store(r, i, sys);
  });
  return r;
}

EnsembleResult collect(const std::vector<ParticleSystem>& systems) {
  if (systems.empty()) throw InvalidInput("collect: no systems");
  EnsembleResult r;
  r.grid = systems.front().grid();
  r.time = systems.front().clock();
  r.counts.resize(r.grid.sites(), static_cast<Index>(systems.size()));
  r.jump_totals.resize(systems.size());
  r.particles.resize(systems.size());
  for (std::size_t i = 0; i < systems.size(); ++i) {
    require_same_grid(r.grid, systems[i].grid(), "collect");
    store(r, i, systems[i]);
  }
  return r;
}

EmpiricalCorrelation estimate_correlations(const EnsembleResult& ens, int order) {
  if (order != 1 && order != 2)
    throw Unsupported("estimate_correlations: only orders 1 and 2 are supported");
  const Index cells = ens.grid.sites();
  const Index size = order == 1 ? cells : cells * cells;
  const auto reps = static_cast<Index>(ens.replicas());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(size), sq = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd sample(size);
  for (Index r = 0; r < reps; ++r) {
    const Eigen::VectorXd n = ens.counts.col(r).cast<double>();
    if (order == 1) {
      sample = n;
    } else {
      for (Index a = 0; a < cells; ++a) sample.segment(a * cells, cells) = n(a) * n;
      for (Index a = 0; a < cells; ++a) sample(a * cells + a) -= n(a);
    }
    sum += sample;
    sq += sample.cwiseProduct(sample);
  }
  const double vol = std::pow(ens.grid.cell_volume(), order);
  EmpiricalCorrelation e;
  e.order = order;
  e.grid = ens.grid;
  e.time = ens.time;
  e.replicas = static_cast<std::size_t>(reps);
  const Eigen::VectorXd mean = sum / static_cast<double>(reps);
  e.estimate = mean / vol;
  if (reps >= 2) {
    const Eigen::VectorXd var =
        ((sq - static_cast<double>(reps) * mean.cwiseProduct(mean)) / static_cast<double>(reps - 1))
            .cwiseMax(0.0);
    e.std_error = var.cwiseSqrt() / std::sqrt(static_cast<double>(reps)) / vol;
  } else {
    e.std_error = Eigen::VectorXd::Zero(size);
  }
  return e;
}

ComparisonReport compare_with_hierarchy(const EmpiricalCorrelation& emp,
                                        const HierarchyState<double>& k) {
  require_same_grid(emp.grid, k.family.grid(), "compare_with_hierarchy");
  if (std::abs(emp.time - k.time) > 1e-9 * std::max(1.0, std::abs(k.time)))
    throw InvalidInput("compare_with_hierarchy: time mismatch");
  if (k.family.order() < emp.order)
    throw InvalidInput("compare_with_hierarchy: hierarchy truncated below the estimator order");
  const auto& ref = k.family.component(emp.order);
  ComparisonReport rep;
  rep.order = emp.order;
  rep.bins = static_cast<std::size_t>(ref.size());
  rep.z.resize(ref.size());
  std::size_t within2 = 0, within4 = 0;
  for (Index i = 0; i < ref.size(); ++i) {
    const double diff = emp.estimate(i) - ref(i);
    double z = 0.0;
    if (emp.std_error(i) > 0.0)
      z = diff / emp.std_error(i);
    else if (diff != 0.0)
      z = std::copysign(std::numeric_limits<double>::infinity(), diff);
    rep.z(i) = z;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
    within2 += std::abs(z) <= 2.0;
    within4 += std::abs(z) <= 4.0;
  }
  rep.fraction_within_2 = static_cast<double>(within2) / static_cast<double>(rep.bins);
  rep.fraction_within_4 = static_cast<double>(within4) / static_cast<double>(rep.bins);
  rep.pass = rep.fraction_within_4 >= 0.95;
  return rep;
}

HierarchyState<double> as_state(const EmpiricalCorrelation& emp) {
  HierarchyState<double> s;
  s.time = emp.time;
  s.family = Family<double>(emp.grid, emp.order);
  s.family.scalar() = 1.0;
  s.family.component(emp.order) = emp.estimate;
  return s;
}

}  // namespace fjd::kmc
