#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fjd/errors.hpp"
#include "fjd/grid.hpp"

namespace fjd {

using SubsetMask = std::uint32_t;

/// Finite set of distinct grid sites kept in increasing order.
class FiniteConfiguration {
 public:
  FiniteConfiguration() = default;
  explicit FiniteConfiguration(std::vector<Index> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end())
      throw InvalidInput("configuration contains a repeated site");
  }
  FiniteConfiguration(std::initializer_list<Index> sites)
      : FiniteConfiguration(std::vector<Index>(sites)) {}

  std::size_t size() const noexcept { return sites_.size(); }
  bool empty() const noexcept { return sites_.empty(); }
  std::span<const Index> sites() const noexcept { return sites_; }
  Index operator[](std::size_t i) const { return sites_[i]; }

  /// Sub-configuration selected by the bits of `mask` (bit i picks sites()[i]).
  FiniteConfiguration subset(SubsetMask mask) const {
    FiniteConfiguration out;
    for (std::size_t i = 0; i < sites_.size(); ++i)
      if (mask & (SubsetMask{1} << i)) out.sites_.push_back(sites_[i]);
    return out;
  }

  bool contains(Index site) const {
    return std::binary_search(sites_.begin(), sites_.end(), site);
  }

  friend bool operator==(const FiniteConfiguration&, const FiniteConfiguration&) = default;
  friend auto operator<=>(const FiniteConfiguration&, const FiniteConfiguration&) = default;

 private:
  std::vector<Index> sites_;
};

inline int popcount(SubsetMask m) { return __builtin_popcount(m); }

/// Largest configuration for which subset tables are enumerated exhaustively.
inline constexpr std::size_t kMaxEnumerationSites = 20;

inline void require_enumerable(std::size_t m, const char* where) {
  if (m > kMaxEnumerationSites)
    throw CapacityError(std::string(where) + ": " + std::to_string(m) +
                        " sites exceed the exhaustive enumeration limit of " +
                        std::to_string(kMaxEnumerationSites));
}

}  // namespace fjd
