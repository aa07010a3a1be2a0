#include "modrev/recompose.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>

#include "modrev/rng.hpp"

namespace modrev {

Permutation Permutation::identity(std::size_t n) {
  Permutation p;
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), std::size_t{0});
  return p;
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] != i) return false;
  }
  return true;
}

std::string Permutation::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(order[i] + 1);
  }
  return out;
}

Permutation Permutation::parse(std::string_view text) {
  Permutation p;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto field = text.substr(pos, comma - pos);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || v == 0) {
      throw std::invalid_argument("malformed permutation '" + std::string(text) + "'");
    }
    p.order.push_back(v - 1);
    if (comma == text.size()) break;
    pos = comma + 1;
  }
  validate(p, p.order.size());
  return p;
}

std::uint64_t Permutation::key() const {
  std::uint64_t k = 0;
  for (auto v : order) k = k * order.size() + v;
  return k;
}

void validate(const Permutation& p, std::size_t n) {
  if (p.order.size() != n) {
    throw std::invalid_argument("permutation has length " + std::to_string(p.order.size()) +
                                ", expected " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (auto v : p.order) {
    if (v >= n || seen[v]) throw std::invalid_argument("not a permutation: " + p.to_string());
    seen[v] = true;
  }
}

Permutation compose(const Permutation& q, const Permutation& p) {
  if (p.size() != q.size()) throw std::invalid_argument("compose: size mismatch");
  Permutation r;
  r.order.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) r.order[i] = p.order[q.order[i]];
  return r;
}

std::uint64_t revision_count(std::size_t n) {
  if (n == 0) throw std::invalid_argument("revision_count: need at least one module");
  if (n > 20) throw std::overflow_error("revision_count: n! overflows 64 bits for n > 20");
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

PermutationStream::PermutationStream(std::size_t n, EnumerationOrder order, std::uint64_t seed)
    : order_(order), total_(revision_count(n)), current_(Permutation::identity(n)) {
  if (order_ == EnumerationOrder::shuffled) {
    if (n > kMaxShuffled) {
      throw std::invalid_argument("shuffled enumeration supports at most " +
                                  std::to_string(kMaxShuffled) + " modules");
    }
    shuffled_.reserve(total_);
    Permutation p = Permutation::identity(n);
    do {
      shuffled_.push_back(p);
    } while (std::next_permutation(p.order.begin(), p.order.end()));
    seeded_shuffle(shuffled_, seed);
  }
}

std::optional<Permutation> PermutationStream::next() {
  if (emitted_ >= total_) return std::nullopt;
  if (order_ == EnumerationOrder::shuffled) return shuffled_[emitted_++];
  Permutation out = current_;
  ++emitted_;
  std::next_permutation(current_.order.begin(), current_.order.end());
  return out;
}

std::vector<Permutation> enumerate(std::size_t n, EnumerationOrder order, std::uint64_t seed) {
  PermutationStream stream(n, order, seed);
  std::vector<Permutation> out;
  out.reserve(stream.size());
  while (auto p = stream.next()) out.push_back(std::move(*p));
  return out;
}

Mlts apply(const Mlts& base, const Permutation& p) {
  validate(p, base.size());
  std::vector<Module> modules;
  modules.reserve(base.size());
  for (auto idx : p.order) modules.push_back(base.modules()[idx]);
  return Mlts(base.name(), std::move(modules), base.agents());
}

}  // namespace modrev
