#pragma once

#include <optional>
#include <vector>

#include "fjd/configuration.hpp"
#include "fjd/family.hpp"

namespace fjd {

/// Real values attached to the subsets of a base configuration, indexed by
/// bit mask over the base sites. Entries may be missing.
template <typename Scalar>
class SubsetTable {
 public:
  explicit SubsetTable(FiniteConfiguration base) : base_(std::move(base)) {
    require_enumerable(base_.size(), "SubsetTable");
    values_.assign(std::size_t{1} << base_.size(), std::nullopt);
  }

  const FiniteConfiguration& base() const noexcept { return base_; }
  std::size_t subset_count() const noexcept { return values_.size(); }

  void set(SubsetMask mask, Scalar v) { values_.at(mask) = v; }
  const std::optional<Scalar>& get(SubsetMask mask) const { return values_.at(mask); }

  void set(const FiniteConfiguration& sub, Scalar v) { set(mask_of(sub), v); }

  SubsetMask mask_of(const FiniteConfiguration& sub) const {
    SubsetMask m = 0;
    for (Index s : sub.sites()) {
      auto it = std::lower_bound(base_.sites().begin(), base_.sites().end(), s);
      if (it == base_.sites().end() || *it != s)
        throw InvalidInput("SubsetTable: configuration is not a subset of the base");
      m |= SubsetMask{1} << (it - base_.sites().begin());
    }
    return m;
  }

  bool complete() const {
    return std::all_of(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); });
  }

 private:
  FiniteConfiguration base_;
  std::vector<std::optional<Scalar>> values_;
};

namespace detail {

// Visits every subset of `gamma` with at most `max_size` points (as a site list).
template <typename F>
void for_each_small_subset(std::span<const Index> gamma, std::size_t max_size,
                           std::vector<Index>& chosen, std::size_t start, F& f) {
  f(std::span<const Index>(chosen));
  if (chosen.size() == max_size) return;
  for (std::size_t i = start; i < gamma.size(); ++i) {
    chosen.push_back(gamma[i]);
    for_each_small_subset(gamma, max_size, chosen, i + 1, f);
    chosen.pop_back();
  }
}

}  // namespace detail

/// (KG)(gamma) = sum of G(eta) over sub-configurations eta of gamma.
template <typename Scalar>
Scalar k_transform(const Family<Scalar>& g, const FiniteConfiguration& gamma) {
  Scalar sum(0);
  std::vector<Index> chosen;
  auto visit = [&](std::span<const Index> eta) { sum += g.at(eta); };
  detail::for_each_small_subset(gamma.sites(), static_cast<std::size_t>(g.order()), chosen, 0,
                                visit);
  return sum;
}

/// KG evaluated on every subset of eta.
template <typename Scalar>
SubsetTable<Scalar> k_transform_table(const Family<Scalar>& g, const FiniteConfiguration& eta) {
  SubsetTable<Scalar> table(eta);
  for (SubsetMask m = 0; m < table.subset_count(); ++m) table.set(m, k_transform(g, eta.subset(m)));
  return table;
}

/// (K^{-1}F)(eta) = sum over xi subset of eta of (-1)^{|eta \ xi|} F(xi), eta = F.base().
template <typename Scalar>
Scalar k_inverse(const SubsetTable<Scalar>& f) {
  const int m = static_cast<int>(f.base().size());
  Scalar sum(0);
  for (SubsetMask xi = 0; xi < f.subset_count(); ++xi) {
    const auto& v = f.get(xi);
    if (!v) throw InvalidInput("k_inverse: missing value for a subset");
    sum += ((m - popcount(xi)) % 2 == 0) ? *v : -*v;
  }
  return sum;
}

}  // namespace fjd
