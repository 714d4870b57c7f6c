#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "argbench/af_core.hpp"

namespace argbench {

enum class Label { In, Out, Undec };

std::string to_string(Label label);

// Three-valued status per argument, indexed by ArgumentId::index.
class Labelling {
 public:
  explicit Labelling(std::vector<Label> labels) : labels_(std::move(labels)) {}

  Label operator[](ArgumentId a) const { return labels_.at(a.index); }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  std::vector<ArgumentId> in_set() const;

  bool operator==(const Labelling&) const = default;

 private:
  std::vector<Label> labels_;
};

// Least fixed point of the characteristic iteration. Each round walks the
// arguments in id order, marking IN every unlabelled argument whose attackers
// are all OUT and OUT every unlabelled argument with an IN attacker; anything
// left once a round changes nothing is UNDEC.
Labelling grounded_labelling(const AttackGraph& graph);

// True iff the grounded labelling puts the root IN. UNDEC counts as rejected.
bool root_accepted(const AttackGraph& graph);

// Linear(n): n odd. Star: every path has even length (true with no paths).
bool closed_form_accept(const Topology& topology);

using Extension = std::vector<ArgumentId>;

inline constexpr std::size_t kBruteForceLimit = 20;

// All stable extensions, found by testing every subset of arguments. Subsets
// are visited in increasing bitmask order (bit i = argument i). Throws
// ValidationError above kBruteForceLimit arguments.
std::vector<Extension> brute_force_extensions(const AttackGraph& graph);

// Helpers used by the admissibility checks.
bool is_conflict_free(const AttackGraph& graph, const std::vector<ArgumentId>& set);
bool defends_all(const AttackGraph& graph, const std::vector<ArgumentId>& set);

}  // namespace argbench
