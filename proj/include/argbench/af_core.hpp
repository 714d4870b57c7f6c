#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace argbench {

// Index of an argument inside an AttackGraph. Index 0 is the root argument
// whose acceptance a puzzle asks about.
struct ArgumentId {
  std::uint32_t index = 0;

  constexpr auto operator<=>(const ArgumentId&) const = default;
};

// attacker attacks target.
struct Attack {
  ArgumentId attacker;
  ArgumentId target;

  constexpr auto operator<=>(const Attack&) const = default;
};

// A finite set of arguments 0..n-1 with a set of directed attacks.
//
// The class itself accepts any digraph (cycles, self-attacks, several targets
// per attacker) so that it can feed the semantics engine in tests. Graphs
// produced by make_linear / make_star are in-trees rooted at argument 0.
class AttackGraph {
 public:
  // Throws ValidationError if n == 0 or an edge references an id >= n.
  // Duplicate edges are collapsed.
  AttackGraph(std::size_t n, std::vector<Attack> attacks);

  std::size_t size() const noexcept { return n_; }
  // Sorted by (attacker, target), no duplicates.
  const std::vector<Attack>& attacks() const noexcept { return attacks_; }

  // attackers_of(a) lists every argument attacking a, ascending.
  const std::vector<ArgumentId>& attackers_of(ArgumentId a) const { return attackers_.at(a.index); }
  const std::vector<ArgumentId>& targets_of(ArgumentId a) const { return targets_.at(a.index); }

  bool has_attack(ArgumentId attacker, ArgumentId target) const;

  // True when argument 0 has no target, every other argument has exactly one
  // target, and following targets from any argument reaches argument 0.
  bool is_rooted_in_tree() const;

  bool operator==(const AttackGraph& other) const { return n_ == other.n_ && attacks_ == other.attacks_; }

 private:
  std::size_t n_;
  std::vector<Attack> attacks_;
  std::vector<std::vector<ArgumentId>> attackers_;
  std::vector<std::vector<ArgumentId>> targets_;
};

// Canonical (AHU) encoding of a rooted in-tree; two in-trees rooted at 0 are
// isomorphic as rooted trees iff their signatures match. Throws
// ValidationError when the graph is not a rooted in-tree.
std::string in_tree_signature(const AttackGraph& graph);

bool isomorphic_in_trees(const AttackGraph& a, const AttackGraph& b);

// Parameterized shape of a benchmark graph.
class Topology {
 public:
  enum class Kind { Linear, Star };

  static Topology linear(std::size_t n);
  static Topology star(std::vector<std::size_t> path_lengths);

  Kind kind() const noexcept { return kind_; }
  // Total argument count (root included).
  std::size_t argument_count() const noexcept;
  // Lengths of the disjoint attack paths ending at the root. A Linear(n)
  // topology is reported as a single path of n-1 (no path when n == 1).
  std::vector<std::size_t> path_lengths() const;
  std::size_t path_count() const noexcept { return path_lengths().size(); }

  // Same topology with paths sorted non-increasing (identity for Linear).
  Topology canonical() const;

  // `linear:<n>` or `star:<l1>+<l2>+...`; the star without paths is `star:`.
  std::string to_string() const;
  static Topology parse(std::string_view text);

  bool operator==(const Topology&) const = default;

 private:
  Topology(Kind kind, std::size_t n, std::vector<std::size_t> paths)
      : kind_(kind), n_(n), paths_(std::move(paths)) {}

  Kind kind_;
  std::size_t n_;                    // Linear only
  std::vector<std::size_t> paths_;   // Star only
};

using Partition = std::vector<std::size_t>;

// Every partition of m exactly once, parts non-increasing, in
// reverse-lexicographic order: [m], [m-1,1], ..., [1,...,1]. The partition
// of 0 is the single empty partition.
std::vector<Partition> enumerate_partitions(std::size_t m);

// Chain of n arguments where i+1 attacks i. Throws ValidationError for n == 0.
AttackGraph make_linear(std::size_t n);

// Root 0 attacked by the heads of one chain per entry in path_lengths. Ids
// follow presentation order: root, then each path from the root's attacker
// outward, paths in list order. Throws ValidationError on a zero length.
AttackGraph make_star(const std::vector<std::size_t>& path_lengths);

AttackGraph make_graph(const Topology& topology);

// One Star topology per partition of n-1 for every n in [n_min, n_max],
// ascending n then partition order. Throws ValidationError when n_min == 0
// or n_min > n_max.
std::vector<Topology> enumerate_topologies(std::size_t n_min, std::size_t n_max);

}  // namespace argbench
