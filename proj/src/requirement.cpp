#include "modrev/requirement.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace modrev {

std::string_view to_string(RequirementKind k) {
  return k == RequirementKind::security ? "security" : "functional";
}

std::vector<Requirement> parse_requirements(std::string_view source) {
  std::vector<Requirement> out;
  std::set<std::string> ids;
  for (const auto& line : detail::split_lines(source)) {
    const auto& toks = line.tokens;
    auto colon = line.text.find(':');
    if (toks[0].text != "req") {
      throw ParseError("expected 'req', got '" + std::string(toks[0].text) + "'", line.number,
                       toks[0].column);
    }
    if (colon == std::string_view::npos) {
      throw ParseError("expected ':' before the formula", line.number, line.text.size());
    }
    auto header = detail::tokenize(line.text.substr(0, colon));
    if (header.size() != 4) {
      throw ParseError("expected 'req <id> kind=<k> weight=<w>: <LTL>'", line.number, 1);
    }
    Requirement r;
    r.id = std::string(header[1].text);
    if (!is_valid_action_name(r.id) || r.id.find('.') != std::string::npos) {
      throw ParseError("invalid requirement id '" + r.id + "'", line.number, header[1].column);
    }
    if (!ids.insert(r.id).second) {
      throw ParseError("duplicate requirement id '" + r.id + "'", line.number, header[1].column);
    }
    for (std::size_t i = 2; i < 4; ++i) {
      auto kv = header[i].text;
      auto eq = kv.find('=');
      auto key = kv.substr(0, eq);
      auto value = eq == std::string_view::npos ? std::string_view{} : kv.substr(eq + 1);
      if (key == "kind") {
        if (value == "security") {
          r.kind = RequirementKind::security;
        } else if (value == "functional") {
          r.kind = RequirementKind::functional;
        } else {
          throw ParseError("kind must be security or functional", line.number, header[i].column);
        }
      } else if (key == "weight") {
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), r.weight);
        if (ec != std::errc{} || ptr != value.data() + value.size() || r.weight <= 0) {
          throw ParseError("weight must be a positive integer", line.number, header[i].column);
        }
      } else {
        throw ParseError("unknown attribute '" + std::string(key) + "'", line.number,
                         header[i].column);
      }
    }
    r.source = std::string(detail::trim(line.text.substr(colon + 1)));
    auto start = line.text.find_first_not_of(" \t", colon + 1);
    try {
      r.formula = ltl::parse(r.source);
    } catch (const ParseError& e) {
      throw ParseError(std::string("in formula: ") + e.message(), line.number,
                       (start == std::string::npos ? colon + 1 : start) + e.column());
    }
    if (!ltl::is_safety(r.formula)) {
      throw ParseError("non-safety formula in requirement '" + r.id + "'", line.number, colon + 2);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string render_requirements(const std::vector<Requirement>& reqs) {
  std::ostringstream os;
  for (const auto& r : reqs) {
    os << "req " << r.id << " kind=" << to_string(r.kind) << " weight=" << r.weight << ": "
       << (r.source.empty() ? ltl::to_string(*r.formula) : r.source) << "\n";
  }
  return os.str();
}

int total_weight(const std::vector<Requirement>& reqs) {
  int sum = 0;
  for (const auto& r : reqs) sum += r.weight;
  return sum;
}

namespace {

Lts model_for(const Mlts& revision, RequirementKind kind, const OccupancyAutomaton& occupancy,
              const RequirementCheckOptions& options) {
  Lts machine = to_lts(revision);
  if (kind == RequirementKind::security || options.weaken_functional) {
    return complete_deadlocks(weaken(machine, occupancy));
  }
  return complete_deadlocks(machine);
}

CheckOptions options_for(const Mlts& revision) {
  CheckOptions o;
  o.agents = {revision.agents().user, revision.agents().attacker};
  return o;
}

}  // namespace

Verdict check_requirement(const Mlts& revision, const Requirement& req,
                          const OccupancyAutomaton& occupancy,
                          const RequirementCheckOptions& options) {
  return check(model_for(revision, req.kind, occupancy, options), req.formula,
               options_for(revision));
}

RequirementChecker::RequirementChecker(const std::vector<Requirement>& reqs,
                                       OccupancyAutomaton occupancy,
                                       RequirementCheckOptions options)
    : reqs_(reqs), occupancy_(std::move(occupancy)), options_(options) {
  for (const auto& r : reqs_) {
    // Agent names come from the occupancy tags; default to the standard pair.
    CheckOptions o;
    std::vector<std::string> agents;
    for (StateId s = 0; s < occupancy_.lts().num_states(); ++s) {
      if (auto tag = occupancy_.enabled(s); tag &&
          std::find(agents.begin(), agents.end(), *tag) == agents.end()) {
        agents.push_back(*tag);
      }
    }
    if (!agents.empty()) o.agents = agents;
    checkers_.push_back(std::make_unique<SafetyChecker>(r.formula, o));
  }
}

Verdict RequirementChecker::check(const Mlts& revision, std::size_t req_index) {
  const auto& r = reqs_.at(req_index);
  return checkers_[req_index]->run(model_for(revision, r.kind, occupancy_, options_));
}

bool RequirementChecker::satisfies_all(const Mlts& revision) {
  std::optional<Lts> weakened, plain;
  for (std::size_t i = 0; i < reqs_.size(); ++i) {
    bool weak = reqs_[i].kind == RequirementKind::security || options_.weaken_functional;
    auto& slot = weak ? weakened : plain;
    if (!slot) slot = model_for(revision, reqs_[i].kind, occupancy_, options_);
    if (!checkers_[i]->run(*slot).satisfied) return false;
  }
  return true;
}

std::vector<bool> RequirementChecker::check_each(const Mlts& revision) {
  std::optional<Lts> weakened, plain;
  std::vector<bool> out(reqs_.size());
  for (std::size_t i = 0; i < reqs_.size(); ++i) {
    bool weak = reqs_[i].kind == RequirementKind::security || options_.weaken_functional;
    auto& slot = weak ? weakened : plain;
    if (!slot) slot = model_for(revision, reqs_[i].kind, occupancy_, options_);
    out[i] = checkers_[i]->run(*slot).satisfied;
  }
  return out;
}

}  // namespace modrev
