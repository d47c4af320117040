#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

#include "fjd/evolve.hpp"
#include "fjd/kernel.hpp"

namespace fjd::kmc {

using Rng = std::mt19937_64;

/// Replica seed derived from a base seed (splitmix64 finalizer of base + i).
std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t replica);

/// Finite set of continuum points in the periodic box [0, L)^d with a clock.
/// Coincident positions are allowed. Not safe for concurrent mutation.
class ParticleSystem {
 public:
  ParticleSystem(GridSpec grid, std::uint64_t seed) : grid_(grid), rng_(seed) {}

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return jumps_.size(); }
  double clock() const noexcept { return clock_; }
  void set_clock(double t) { clock_ = t; }
  Rng& rng() noexcept { return rng_; }

  /// Coordinates of particle i, wrapped into [0, L).
  Eigen::VectorXd position(std::size_t i) const;
  void set_position(std::size_t i, const Eigen::VectorXd& x);
  void add(const Eigen::VectorXd& x);

  Index cell_of(std::size_t i) const;
  std::uint64_t jumps(std::size_t i) const { return jumps_[i]; }
  void record_jump(std::size_t i) { ++jumps_[i]; }

  /// Number of particles per grid cell.
  std::vector<std::int32_t> cell_counts() const;

 private:
  GridSpec grid_;
  std::vector<double> coords_;  // particle-major, d entries per particle
  std::vector<std::uint64_t> jumps_;
  double clock_ = 0.0;
  Rng rng_;
};

/// Draws displacement cells with probability a(Delta) / sum a.
class JumpSampler {
 public:
  explicit JumpSampler(const JumpKernel<double>& kernel);

  double alpha() const noexcept { return alpha_; }
  const GridSpec& grid() const noexcept { return grid_; }
  /// CDF inversion over the displacement table.
  Index sample(Rng& rng) const;

 private:
  GridSpec grid_;
  double alpha_;
  std::vector<double> cdf_;
};

/// Poisson point sample: count ~ Poisson(h^d sum rho0), cells drawn
/// proportionally to rho0, positions uniform within the cell.
ParticleSystem sample_initial_poisson(const Eigen::VectorXd& rho0, const GridSpec& grid,
                                      std::uint64_t seed);

/// Exact (Gillespie) simulation of free jumps up to absolute time T.
ParticleSystem simulate(ParticleSystem sys, const JumpSampler& sampler, double horizon);

struct EnsembleSpec {
  std::size_t replicas = 1;
  std::uint64_t base_seed = 0;
  Eigen::VectorXd initial_density;
  JumpKernel<double> kernel;
  double horizon = 0.0;
};

/// Per-replica cell counts at the horizon (cells x replicas) plus jump totals.
struct EnsembleResult {
  GridSpec grid;
  double time = 0.0;
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::vector<std::uint64_t> jump_totals;
  std::vector<std::size_t> particles;

  std::size_t replicas() const { return static_cast<std::size_t>(counts.cols()); }
};

/// Runs independent replicas (in parallel when threads > 1); the result does not
/// depend on the thread count.
EnsembleResult run_ensemble(const EnsembleSpec& spec, unsigned threads = 1);

/// Builds an ensemble result from explicit configurations (one system per replica).
EnsembleResult collect(const std::vector<ParticleSystem>& systems);

struct EmpiricalCorrelation {
  int order = 1;
  GridSpec grid;
  double time = 0.0;
  std::size_t replicas = 0;
  Eigen::VectorXd estimate;   ///< flat like Family component `order`
  Eigen::VectorXd std_error;  ///< zero when fewer than two replicas
};

/// k^(1)(c) = E[N_c] / h^d; k^(2)(a, b) = E[N_a N_b - delta_ab N_a] / h^{2d}.
EmpiricalCorrelation estimate_correlations(const EnsembleResult& ensemble, int order);

struct ComparisonReport {
  int order = 1;
  std::size_t bins = 0;
  double max_abs_z = 0.0;
  double fraction_within_2 = 0.0;
  double fraction_within_4 = 0.0;
  bool pass = false;
  Eigen::VectorXd z;
};

/// Per-bin z-scores (estimate - k) / stderr; passes iff >= 95% of bins have |z| <= 4.
ComparisonReport compare_with_hierarchy(const EmpiricalCorrelation& emp,
                                        const HierarchyState<double>& k);

/// Hierarchy state whose component `emp.order` is the empirical estimate.
HierarchyState<double> as_state(const EmpiricalCorrelation& emp);

}  // namespace fjd::kmc
