#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace glmshap {

/// Inclusion indicator over players: bit i set iff player i is in the
/// coalition. Holds up to 64 players; exact enumeration is limited further
/// (see kMaxExactPlayers).
struct SubsetKey {
  std::uint64_t bits = 0;

  static constexpr std::size_t kCapacity = 64;

  static constexpr SubsetKey empty() { return {}; }
  static constexpr SubsetKey full(std::size_t p) {
    return {p >= kCapacity ? ~std::uint64_t{0}
                           : (std::uint64_t{1} << p) - 1};
  }
  static constexpr SubsetKey single(std::size_t i) {
    return {std::uint64_t{1} << i};
  }

  constexpr bool contains(std::size_t i) const {
    return (bits >> i) & std::uint64_t{1};
  }
  constexpr SubsetKey with(std::size_t i) const {
    return {bits | (std::uint64_t{1} << i)};
  }
  constexpr SubsetKey without(std::size_t i) const {
    return {bits & ~(std::uint64_t{1} << i)};
  }
  constexpr bool is_subset_of(SubsetKey other) const {
    return (bits & ~other.bits) == 0;
  }
  constexpr int size() const { return std::popcount(bits); }
  constexpr bool is_empty() const { return bits == 0; }

  friend constexpr bool operator==(SubsetKey, SubsetKey) = default;
  friend constexpr auto operator<=>(SubsetKey, SubsetKey) = default;
};

/// Exact enumeration is refused above this many players.
inline constexpr std::size_t kMaxExactPlayers = 25;
/// Exact enumeration above this many players runs with a warning.
inline constexpr std::size_t kExactWarnPlayers = 15;

}  // namespace glmshap

template <>
struct std::hash<glmshap::SubsetKey> {
  std::size_t operator()(glmshap::SubsetKey key) const noexcept {
    return std::hash<std::uint64_t>{}(key.bits);
  }
};
