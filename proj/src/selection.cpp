#include "modrev/selection.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace modrev {

namespace {

void check_alignment(const RevisionVerdicts& verdicts, const std::vector<Requirement>& reqs) {
  if (verdicts.requirement_ids.size() != reqs.size()) {
    throw std::invalid_argument("verdict table has " +
                                std::to_string(verdicts.requirement_ids.size()) +
                                " requirements, requirement set has " +
                                std::to_string(reqs.size()));
  }
  for (std::size_t r = 0; r < reqs.size(); ++r) {
    if (verdicts.requirement_ids[r] != reqs[r].id) {
      throw std::invalid_argument("verdict column " + std::to_string(r + 1) + " is '" +
                                  verdicts.requirement_ids[r] + "', expected '" + reqs[r].id +
                                  "'");
    }
  }
}

std::vector<bool> waivable_mask(const std::vector<Requirement>& reqs, const DegradationQuery& q) {
  int total = total_weight(reqs);
  if (q.payoff_threshold < 0 || q.payoff_threshold > total) {
    throw std::invalid_argument("payoff threshold must lie in 0.." + std::to_string(total));
  }
  std::vector<bool> mask(reqs.size(), !q.waivable.has_value());
  if (q.waivable) {
    for (const auto& id : *q.waivable) {
      auto it = std::find_if(reqs.begin(), reqs.end(), [&](const auto& r) { return r.id == id; });
      if (it == reqs.end()) throw std::invalid_argument("unknown waivable requirement '" + id + "'");
      mask[static_cast<std::size_t>(it - reqs.begin())] = true;
    }
  }
  return mask;
}

// Qualifies under q when predicted-true entries are counted as true.
bool qualifies(const std::vector<Tag>& row, const std::vector<Requirement>& reqs,
               const std::vector<bool>& waivable, const DegradationQuery& q, int& payoff,
               std::size_t& waived) {
  payoff = 0;
  waived = 0;
  for (std::size_t r = 0; r < reqs.size(); ++r) {
    if (is_true(row[r])) {
      payoff += reqs[r].weight;
    } else {
      if (!waivable[r]) return false;
      ++waived;
    }
  }
  if (q.max_waived && waived > *q.max_waived) return false;
  return payoff >= q.payoff_threshold;
}

std::size_t position_of(const Mlts& m, std::string_view action) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (const auto& a : m.modules()[i].actions) {
      if (a.name == action) return i;
    }
  }
  return m.size();
}

}  // namespace

std::vector<std::size_t> relied_upon_predictions(const RevisionVerdicts& verdicts,
                                                 const std::vector<Requirement>& reqs,
                                                 const DegradationQuery& q) {
  check_alignment(verdicts, reqs);
  auto mask = waivable_mask(reqs, q);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& row = verdicts.tags[i];
    if (std::none_of(row.begin(), row.end(), [](Tag t) { return t == Tag::predicted_true; })) {
      continue;
    }
    int payoff;
    std::size_t waived;
    if (qualifies(row, reqs, mask, q, payoff, waived)) out.push_back(i);
  }
  return out;
}

std::vector<Selected> degrade(const RevisionVerdicts& verdicts,
                              const std::vector<Requirement>& reqs, const DegradationQuery& q,
                              bool allow_predicted) {
  check_alignment(verdicts, reqs);
  auto mask = waivable_mask(reqs, q);
  std::vector<Selected> out;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& row = verdicts.tags[i];
    int payoff;
    std::size_t waived;
    if (!qualifies(row, reqs, mask, q, payoff, waived)) continue;
    bool predicted = std::any_of(row.begin(), row.end(),
                                 [](Tag t) { return t == Tag::predicted_true; });
    if (predicted && !allow_predicted) {
      throw UnverifiedPrediction("revision " + verdicts.revisions[i].to_string() +
                                 " relies on unverified predictions");
    }
    Selected s;
    s.revision = i;
    s.permutation = verdicts.revisions[i];
    s.payoff = payoff;
    for (std::size_t r = 0; r < reqs.size(); ++r) {
      (is_true(row[r]) ? s.satisfied : s.waived).push_back(reqs[r].id);
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const Selected& a, const Selected& b) {
    if (a.payoff != b.payoff) return a.payoff > b.payoff;
    if (a.waived.size() != b.waived.size()) return a.waived.size() < b.waived.size();
    return a.revision < b.revision;
  });
  return out;
}

std::vector<std::size_t> eligible(const RevisionVerdicts& verdicts,
                                  const std::vector<Requirement>& reqs, bool allow_predicted) {
  DegradationQuery q;
  q.payoff_threshold = total_weight(reqs);
  q.waivable = std::vector<std::string>{};
  std::vector<std::size_t> out;
  for (const auto& s : degrade(verdicts, reqs, q, allow_predicted)) out.push_back(s.revision);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<OrderingLint> parse_lints(std::string_view source) {
  std::vector<OrderingLint> out;
  std::set<std::string> names;
  for (const auto& line : detail::split_lines(source)) {
    const auto& t = line.tokens;
    if (t.size() != 5 || t[0].text != "lint" || t[1].text.size() < 2 ||
        t[1].text.back() != ':') {
      throw ParseError("expected 'lint <name>: <action> after|before <action>'", line.number,
                       t[0].column);
    }
    OrderingLint l;
    l.name = std::string(t[1].text.substr(0, t[1].text.size() - 1));
    if (!names.insert(l.name).second) {
      throw ParseError("duplicate lint '" + l.name + "'", line.number, t[1].column);
    }
    l.action = std::string(t[2].text);
    l.other = std::string(t[4].text);
    if (t[3].text == "after") {
      l.after = true;
    } else if (t[3].text == "before") {
      l.after = false;
    } else {
      throw ParseError("expected 'after' or 'before'", line.number, t[3].column);
    }
    for (std::size_t k : {2u, 4u}) {
      if (!is_valid_action_name(t[k].text)) {
        throw ParseError("invalid action name '" + std::string(t[k].text) + "'", line.number,
                         t[k].column);
      }
    }
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<std::string> lint_revision(const Mlts& revision,
                                       const std::vector<OrderingLint>& lints) {
  std::vector<std::string> out;
  if (revision.has_backward_self_loop()) out.push_back("backward-self-loop");
  for (const auto& l : lints) {
    auto a = position_of(revision, l.action);
    auto b = position_of(revision, l.other);
    if (a == revision.size() || b == revision.size()) continue;
    if (l.after ? a > b : a < b) out.push_back(l.name);
  }
  return out;
}

namespace {

const char* kPayoffNote =
    "payoff = sum of weights of satisfied requirements; a revision is kept when its payoff "
    "reaches the threshold and every unsatisfied requirement is waivable";

}  // namespace

nlohmann::json report_json(const std::vector<Selected>& selected, const Mlts& base,
                           const std::vector<OrderingLint>& lints, const DegradationQuery& q) {
  nlohmann::json doc;
  doc["payoff_semantics"] = kPayoffNote;
  doc["threshold"] = q.payoff_threshold;
  doc["waivable"] = q.waivable ? nlohmann::json(*q.waivable) : nlohmann::json("all");
  doc["max_waived"] = q.max_waived ? nlohmann::json(*q.max_waived) : nlohmann::json(nullptr);
  auto& rows = doc["revisions"] = nlohmann::json::array();
  for (const auto& s : selected) {
    rows.push_back({{"permutation", s.permutation.to_string()},
                    {"payoff", s.payoff},
                    {"satisfied", s.satisfied},
                    {"waived", s.waived},
                    {"lints", lint_revision(apply(base, s.permutation), lints)}});
  }
  return doc;
}

std::string report_text(const std::vector<Selected>& selected, const Mlts& base,
                        const std::vector<OrderingLint>& lints, const DegradationQuery& q) {
  std::ostringstream os;
  os << "# " << kPayoffNote << "\n# threshold " << q.payoff_threshold << ", " << selected.size()
     << " revision(s)\n";
  for (const auto& s : selected) {
    Mlts rev = apply(base, s.permutation);
    os << "\n## revision " << s.permutation.to_string() << "  payoff " << s.payoff;
    if (!s.waived.empty()) {
      os << "  waived";
      for (const auto& id : s.waived) os << ' ' << id;
    }
    os << '\n';
    auto fired = lint_revision(rev, lints);
    if (!fired.empty()) {
      os << "lints:";
      for (const auto& l : fired) os << ' ' << l;
      os << '\n';
    }
    os << render_mlts(rev) << render_lts(to_lts(rev));
  }
  return os.str();
}

}  // namespace modrev
