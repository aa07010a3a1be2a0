#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modrev/recompose.hpp"
#include "modrev/requirement.hpp"
#include "modrev/weaken.hpp"

// Abstraction-based revision coverage: every revision is an order-preserving
// merge of a module subset L with its complement.
namespace modrev::oasis {

/// All C(|left|+|right|, |left|) order-preserving merges, taking from `left`
/// before `right` at each step. Throws std::invalid_argument unless the two
/// lists are ascending and partition 0..n-1.
std::vector<Permutation> interleavings(std::span<const std::size_t> left,
                                       std::span<const std::size_t> right);

/// Subsets of {0..n-1} by ascending size 1..floor(n/2), then lexicographic.
/// At size n/2 (n even) only subsets containing module 0 are visited, since
/// the complement pairs generate the same merges.
class SubsetCursor {
 public:
  explicit SubsetCursor(std::size_t n_modules);

  std::optional<std::vector<std::size_t>> next();

 private:
  bool advance();

  std::size_t n_;
  std::size_t size_ = 1;
  std::vector<std::size_t> current_;
  bool started_ = false;
  bool done_ = false;
};

struct Emission {
  Permutation permutation;
  bool first_appearance = false;
  std::size_t subset_size = 0;
  std::size_t position = 0;  // 1-based over all emissions
};

/// Cursor order, merges of (L, complement) per subset, with first
/// appearances tracked over the whole stream.
class CoverageStream {
 public:
  explicit CoverageStream(std::size_t n_modules);

  std::optional<Emission> next();

 private:
  std::size_t n_;
  SubsetCursor cursor_;
  std::vector<Permutation> pending_;
  std::size_t pending_pos_ = 0;
  std::size_t subset_size_ = 0;
  std::size_t position_ = 0;
  std::vector<bool> seen_;  // indexed by Permutation::key()
};

std::vector<Emission> oasis_stream(std::size_t n_modules);

/// First-appearance permutations in stream order: the non-redundant
/// coverage shared by both search strategies in the benchmark.
std::vector<Permutation> common_coverage(std::size_t n_modules);

struct Cell {
  std::size_t generated = 0;
  std::size_t non_redundant = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
};

struct CoverageStats {
  std::size_t n_modules = 0;
  std::vector<Cell> cells;  // cells[k-1] for |L| = k
  Cell total;
  std::vector<std::size_t> first_positions;  // 1-based emission positions
  std::size_t median_first_position = 0;     // ceil(m/2)-th first appearance
  std::size_t last_first_position = 0;
  double mean_first_position = 0;
  std::size_t bin_width = 1;
  std::vector<std::size_t> bin_counts;  // first appearances per complete bin
  LinearFit fit;                        // OLS of bin_counts over bin index
};

/// Bin width is 10^max(0, floor(log10(emissions)) - 2): 100 at n = 9.
CoverageStats coverage_stats(std::size_t n_modules);

std::vector<CoverageStats> table1(std::size_t n_min, std::size_t n_max);

/// Published distribution for 4..9 modules.
struct ReferenceRow {
  std::size_t n_modules;
  std::vector<Cell> cells;
  Cell total;
};
const std::vector<ReferenceRow>& reference_table();

/// Human-readable mismatches against reference_table(); empty on agreement.
/// Rows without a reference are skipped.
std::vector<std::string> compare_with_reference(const std::vector<CoverageStats>& rows);

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y);

struct SearchResult {
  std::optional<Permutation> found;
  std::size_t position = 0;         // 1-based emission position of `found`
  std::size_t checks_performed = 0; // emissions checked
  std::size_t requirement_checks = 0;
  double elapsed_ms = 0;
};

/// Sequential search in stream order, redundant emissions included. Each
/// emission is checked against every requirement (short-circuiting).
SearchResult oasis_search(const Mlts& base, const std::vector<Requirement>& reqs,
                          const OccupancyAutomaton& occupancy,
                          const RequirementCheckOptions& options = {});

}  // namespace modrev::oasis
