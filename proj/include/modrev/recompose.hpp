#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modrev/mlts.hpp"

namespace modrev {

/// Module ordering of a revision: order[i] is the original index of the
/// module placed at position i.
struct Permutation {
  std::vector<std::size_t> order;

  static Permutation identity(std::size_t n);

  std::size_t size() const noexcept { return order.size(); }
  bool is_identity() const;

  /// Comma-separated 1-based positions, e.g. `3,1,2`.
  std::string to_string() const;
  static Permutation parse(std::string_view text);

  /// Dense key for hashing (base-n digits); collision-free for n <= 15.
  std::uint64_t key() const;

  friend auto operator<=>(const Permutation&, const Permutation&) = default;
};

/// Throws std::invalid_argument unless p is a bijection on 0..n-1.
void validate(const Permutation& p, std::size_t n);

/// r with r.order[i] = p.order[q.order[i]], so that
/// apply(apply(base, p), q) == apply(base, compose(q, p)).
Permutation compose(const Permutation& q, const Permutation& p);

/// n! for 1 <= n <= 20; throws std::overflow_error/std::invalid_argument outside.
std::uint64_t revision_count(std::size_t n);

enum class EnumerationOrder { lexicographic, shuffled };

/// Streaming enumeration of all n! module orderings.
///
/// Lexicographic order is next_permutation order from the identity.
/// Shuffled order materializes the lexicographic list (n <= 9) and applies
/// seeded_shuffle with the given seed.
class PermutationStream {
 public:
  PermutationStream(std::size_t n, EnumerationOrder order = EnumerationOrder::lexicographic,
                    std::uint64_t seed = 0);

  std::optional<Permutation> next();
  std::uint64_t size() const noexcept { return total_; }

  static constexpr std::size_t kMaxShuffled = 9;

 private:
  EnumerationOrder order_;
  std::uint64_t total_;
  std::uint64_t emitted_ = 0;
  Permutation current_;
  std::vector<Permutation> shuffled_;
};

/// Materialized enumeration.
std::vector<Permutation> enumerate(std::size_t n,
                                   EnumerationOrder order = EnumerationOrder::lexicographic,
                                   std::uint64_t seed = 0);

/// Reorders base's modules by p. Targets are untouched: state targets are
/// positional and module targets follow their module.
Mlts apply(const Mlts& base, const Permutation& p);

}  // namespace modrev
