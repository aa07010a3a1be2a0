#include "modrev/oasis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace modrev::oasis {

namespace {

void merge(std::span<const std::size_t> left, std::span<const std::size_t> right,
           std::vector<std::size_t>& prefix, std::vector<Permutation>& out) {
  if (left.empty() && right.empty()) {
    out.push_back(Permutation{prefix});
    return;
  }
  if (!left.empty()) {
    prefix.push_back(left.front());
    merge(left.subspan(1), right, prefix, out);
    prefix.pop_back();
  }
  if (!right.empty()) {
    prefix.push_back(right.front());
    merge(left, right.subspan(1), prefix, out);
    prefix.pop_back();
  }
}

// Lexicographic rank in 0..n!-1.
std::size_t lehmer_rank(const Permutation& p) {
  const std::size_t n = p.size();
  std::size_t rank = 0;
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t v = 0; v < p.order[i]; ++v) {
      if (!used[v]) ++smaller;
    }
    used[p.order[i]] = true;
    rank = rank * (n - i) + smaller;
  }
  return rank;
}

}  // namespace

std::vector<Permutation> interleavings(std::span<const std::size_t> left,
                                       std::span<const std::size_t> right) {
  const std::size_t n = left.size() + right.size();
  std::vector<bool> seen(n, false);
  for (auto part : {left, right}) {
    for (std::size_t i = 0; i < part.size(); ++i) {
      if (part[i] >= n || seen[part[i]] || (i > 0 && part[i] <= part[i - 1])) {
        throw std::invalid_argument("interleavings: inputs must be ascending and partition 0..n-1");
      }
      seen[part[i]] = true;
    }
  }
  std::vector<Permutation> out;
  std::vector<std::size_t> prefix;
  prefix.reserve(n);
  merge(left, right, prefix, out);
  return out;
}

SubsetCursor::SubsetCursor(std::size_t n_modules) : n_(n_modules) {
  if (n_ == 0) throw std::invalid_argument("SubsetCursor: need at least one module");
  done_ = n_ < 2;
}

bool SubsetCursor::advance() {
  // Next combination of the same size in lexicographic order.
  std::size_t k = current_.size();
  for (std::size_t i = k; i-- > 0;) {
    if (current_[i] < n_ - k + i) {
      ++current_[i];
      for (std::size_t j = i + 1; j < k; ++j) current_[j] = current_[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::optional<std::vector<std::size_t>> SubsetCursor::next() {
  while (!done_) {
    if (!started_) {
      current_.resize(size_);
      std::iota(current_.begin(), current_.end(), std::size_t{0});
      started_ = true;
    } else if (!advance()) {
      ++size_;
      started_ = false;
      if (size_ > n_ / 2) done_ = true;
      continue;
    }
    if (2 * size_ == n_ && current_.front() != 0) {
      // Remaining subsets of this size all omit module 0.
      ++size_;
      started_ = false;
      if (size_ > n_ / 2) done_ = true;
      continue;
    }
    return current_;
  }
  return std::nullopt;
}

CoverageStream::CoverageStream(std::size_t n_modules)
    : n_(n_modules), cursor_(n_modules), seen_(revision_count(n_modules), false) {}

std::optional<Emission> CoverageStream::next() {
  while (pending_pos_ >= pending_.size()) {
    auto subset = cursor_.next();
    if (!subset) return std::nullopt;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0, j = 0; i < n_; ++i) {
      if (j < subset->size() && (*subset)[j] == i) {
        ++j;
      } else {
        rest.push_back(i);
      }
    }
    pending_ = interleavings(*subset, rest);
    pending_pos_ = 0;
    subset_size_ = subset->size();
  }
  Emission e;
  e.permutation = std::move(pending_[pending_pos_++]);
  e.subset_size = subset_size_;
  e.position = ++position_;
  auto rank = lehmer_rank(e.permutation);
  e.first_appearance = !seen_[rank];
  seen_[rank] = true;
  return e;
}

std::vector<Emission> oasis_stream(std::size_t n_modules) {
  CoverageStream stream(n_modules);
  std::vector<Emission> out;
  while (auto e = stream.next()) out.push_back(std::move(*e));
  return out;
}

std::vector<Permutation> common_coverage(std::size_t n_modules) {
  if (n_modules == 1) return {Permutation::identity(1)};
  std::vector<Permutation> out;
  CoverageStream stream(n_modules);
  while (auto e = stream.next()) {
    if (e->first_appearance) out.push_back(std::move(e->permutation));
  }
  return out;
}

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("ordinary_least_squares: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0) throw std::invalid_argument("ordinary_least_squares: constant abscissa");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

CoverageStats coverage_stats(std::size_t n_modules) {
  CoverageStats s;
  s.n_modules = n_modules;
  s.cells.assign(n_modules / 2, Cell{});
  CoverageStream stream(n_modules);
  while (auto e = stream.next()) {
    auto& cell = s.cells[e->subset_size - 1];
    ++cell.generated;
    ++s.total.generated;
    if (e->first_appearance) {
      ++cell.non_redundant;
      ++s.total.non_redundant;
      s.first_positions.push_back(e->position);
    }
  }
  if (!s.first_positions.empty()) {
    const auto m = s.first_positions.size();
    s.median_first_position = s.first_positions[(m + 1) / 2 - 1];
    s.last_first_position = s.first_positions.back();
    s.mean_first_position =
        std::accumulate(s.first_positions.begin(), s.first_positions.end(), 0.0) /
        static_cast<double>(m);
  }
  if (s.total.generated > 0) {
    int exponent = static_cast<int>(std::floor(std::log10(static_cast<double>(s.total.generated))));
    s.bin_width = static_cast<std::size_t>(std::llround(std::pow(10.0, std::max(0, exponent - 2))));
    const std::size_t bins = s.total.generated / s.bin_width;
    s.bin_counts.assign(bins, 0);
    for (auto pos : s.first_positions) {
      const std::size_t bin = (pos - 1) / s.bin_width;
      if (bin < bins) ++s.bin_counts[bin];
    }
    if (bins >= 2) {
      std::vector<double> xs(bins), ys(bins);
      for (std::size_t i = 0; i < bins; ++i) {
        xs[i] = static_cast<double>(i);
        ys[i] = static_cast<double>(s.bin_counts[i]);
      }
      s.fit = ordinary_least_squares(xs, ys);
    }
  }
  return s;
}

std::vector<CoverageStats> table1(std::size_t n_min, std::size_t n_max) {
  if (n_min == 0 || n_min > n_max) throw std::invalid_argument("table1: empty module range");
  std::vector<CoverageStats> rows;
  for (std::size_t n = n_min; n <= n_max; ++n) rows.push_back(coverage_stats(n));
  return rows;
}

const std::vector<ReferenceRow>& reference_table() {
  static const std::vector<ReferenceRow> rows = {
      {4, {{16, 10}, {18, 4}}, {34, 14}},
      {5, {{25, 17}, {100, 25}}, {125, 42}},
      {6, {{36, 26}, {225, 79}, {200, 27}}, {461, 132}},
      {7, {{49, 37}, {441, 188}, {1225, 204}}, {1715, 429}},
      {8, {{64, 50}, {784, 380}, {3136, 766}, {2450, 234}}, {6434, 1430}},
      {9, {{81, 65}, {1296, 689}, {7056, 2158}, {15876, 1950}}, {24309, 4862}},
  };
  return rows;
}

std::vector<std::string> compare_with_reference(const std::vector<CoverageStats>& rows) {
  std::vector<std::string> out;
  auto describe = [](const Cell& c) {
    return std::to_string(c.non_redundant) + "/" + std::to_string(c.generated);
  };
  for (const auto& row : rows) {
    const auto& refs = reference_table();
    auto it = std::find_if(refs.begin(), refs.end(),
                           [&](const ReferenceRow& r) { return r.n_modules == row.n_modules; });
    if (it == refs.end()) continue;
    const std::string n = std::to_string(row.n_modules);
    if (row.cells.size() != it->cells.size()) {
      out.push_back("n=" + n + ": " + std::to_string(row.cells.size()) + " columns, expected " +
                    std::to_string(it->cells.size()));
      continue;
    }
    for (std::size_t k = 0; k < row.cells.size(); ++k) {
      if (row.cells[k] != it->cells[k]) {
        out.push_back("n=" + n + " |L|=" + std::to_string(k + 1) + ": got " +
                      describe(row.cells[k]) + ", expected " + describe(it->cells[k]));
      }
    }
    if (row.total != it->total) {
      out.push_back("n=" + n + " sum: got " + describe(row.total) + ", expected " +
                    describe(it->total));
    }
  }
  return out;
}

SearchResult oasis_search(const Mlts& base, const std::vector<Requirement>& reqs,
                          const OccupancyAutomaton& occupancy,
                          const RequirementCheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SearchResult result;
  RequirementChecker checker(reqs, occupancy, options);

  auto try_one = [&](const Permutation& p, std::size_t position) {
    ++result.checks_performed;
    Mlts revision = apply(base, p);
    bool ok = true;
    for (std::size_t i = 0; i < reqs.size() && ok; ++i) {
      ++result.requirement_checks;
      ok = checker.check(revision, i).satisfied;
    }
    if (ok) {
      result.found = p;
      result.position = position;
    }
    return ok;
  };

  if (base.size() == 1) {
    try_one(Permutation::identity(1), 1);
  } else {
    CoverageStream stream(base.size());
    while (auto e = stream.next()) {
      if (try_one(e->permutation, e->position)) break;
    }
  }
  result.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace modrev::oasis
