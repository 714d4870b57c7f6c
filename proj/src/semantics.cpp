#include "argbench/semantics.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>

#include "argbench/error.hpp"

namespace argbench {

std::string to_string(Label label) {
  switch (label) {
    case Label::In:
      return "IN";
    case Label::Out:
      return "OUT";
    case Label::Undec:
      return "UNDEC";
  }
  return "?";
}

std::vector<ArgumentId> Labelling::in_set() const {
  std::vector<ArgumentId> out;
  for (std::uint32_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == Label::In) out.push_back(ArgumentId{i});
  }
  return out;
}

Labelling grounded_labelling(const AttackGraph& graph) {
  const auto n = graph.size();
  std::vector<std::optional<Label>> status(n);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (status[i]) continue;
      bool all_out = true;
      bool any_in = false;
      for (auto a : graph.attackers_of(ArgumentId{i})) {
        const auto& s = status[a.index];
        if (s == Label::In) any_in = true;
        if (s != Label::Out) all_out = false;
      }
      if (any_in) {
        status[i] = Label::Out;
        changed = true;
      } else if (all_out) {
        status[i] = Label::In;
        changed = true;
      }
    }
  }
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = status[i].value_or(Label::Undec);
  return Labelling(std::move(labels));
}

bool root_accepted(const AttackGraph& graph) { return grounded_labelling(graph)[ArgumentId{0}] == Label::In; }

bool closed_form_accept(const Topology& topology) {
  if (topology.kind() == Topology::Kind::Linear) return topology.argument_count() % 2 == 1;
  const auto paths = topology.path_lengths();
  return std::all_of(paths.begin(), paths.end(), [](std::size_t len) { return len % 2 == 0; });
}

std::vector<Extension> brute_force_extensions(const AttackGraph& graph) {
  const auto n = graph.size();
  if (n > kBruteForceLimit) {
    throw ValidationError("brute-force enumeration limited to " + std::to_string(kBruteForceLimit) +
                          " arguments, got " + std::to_string(n));
  }
  std::vector<std::uint32_t> attacker_mask(n, 0);
  for (const auto& e : graph.attacks()) attacker_mask[e.target.index] |= 1u << e.attacker.index;

  std::vector<Extension> out;
  const std::uint32_t limit = 1u << n;
  for (std::uint32_t set = 0; set < limit; ++set) {
    bool stable = true;
    for (std::size_t i = 0; i < n && stable; ++i) {
      const bool member = (set >> i) & 1u;
      const bool attacked = (attacker_mask[i] & set) != 0;
      // Members must not be attacked from inside; outsiders must be.
      stable = member ? !attacked : attacked;
    }
    if (!stable) continue;
    Extension ext;
    for (std::uint32_t i = 0; i < n; ++i) {
      if ((set >> i) & 1u) ext.push_back(ArgumentId{i});
    }
    out.push_back(std::move(ext));
  }
  return out;
}

bool is_conflict_free(const AttackGraph& graph, const std::vector<ArgumentId>& set) {
  for (auto a : set) {
    for (auto b : set) {
      if (graph.has_attack(a, b)) return false;
    }
  }
  return true;
}

bool defends_all(const AttackGraph& graph, const std::vector<ArgumentId>& set) {
  auto in_set = [&](ArgumentId x) { return std::find(set.begin(), set.end(), x) != set.end(); };
  for (auto member : set) {
    for (auto attacker : graph.attackers_of(member)) {
      const auto& counters = graph.attackers_of(attacker);
      if (std::none_of(counters.begin(), counters.end(), in_set)) return false;
    }
  }
  return true;
}

}  // namespace argbench
