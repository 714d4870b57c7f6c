#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "argbench/af_core.hpp"

namespace argbench {

// Witness names and claim texts used to instantiate puzzles. Order matters:
// sampling indexes into these lists.
class Ontology {
 public:
  // Throws ValidationError on an empty list, a duplicate entry, or a
  // statement ending in punctuation.
  Ontology(std::vector<std::string> names, std::vector<std::string> statements);

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::string>& statements() const noexcept { return statements_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::string> statements_;
};

// One entry per non-blank line, surrounding whitespace trimmed. Errors name
// the file and line of the offending entry.
Ontology load_ontology(const std::filesystem::path& names_file, const std::filesystem::path& statements_file);

// Ontology shipped in data/ (path fixed at build time).
std::filesystem::path default_names_path();
std::filesystem::path default_statements_path();

enum class Family { Linear, Nonlinear };

std::string to_string(Family family);
Family parse_family(std::string_view text);

struct PuzzleInstance {
  std::string id;
  Topology topology;
  AttackGraph graph;
  std::vector<std::string> witness_names;  // indexed by ArgumentId
  std::string statement;
  std::vector<ArgumentId> presentation_order;
  bool label = false;  // true = the root claim should be believed
  std::uint64_t seed = 0;
  bool shuffled = false;

  Family family() const {
    return topology.kind() == Topology::Kind::Linear ? Family::Linear : Family::Nonlinear;
  }
};

// Builds an unshuffled instance with explicit bindings; names are assigned
// to arguments in id order. Throws ValidationError if the name count differs
// from the argument count or names repeat.
PuzzleInstance bind_instance(const Topology& topology, std::vector<std::string> names, std::string statement,
                             std::uint64_t seed = 0);

// Draws one statement and topology.argument_count() distinct names from the
// ontology using a generator seeded with `seed`. Throws CapacityError when the
// ontology has too few names.
PuzzleInstance sample_instance(const Topology& topology, const Ontology& ontology, std::uint64_t seed);

std::string render_prompt(const PuzzleInstance& instance);

// Copy with a seeded uniform permutation of the fact lines.
PuzzleInstance shuffle_presentation(const PuzzleInstance& instance, std::uint64_t seed);

struct ParsedPrompt {
  // Root is argument 0; the rest are numbered breadth-first from the root
  // along attack edges (attackers in line order), then any unreachable
  // witnesses in line order.
  AttackGraph graph;
  std::vector<std::string> witness_names;
  std::string statement;
  // Ids in the order their fact lines appear.
  std::vector<ArgumentId> presentation_order;
};

// Inverse of render_prompt. Throws ParseError with the offending line number.
ParsedPrompt reparse_prompt(std::string_view prompt);

struct DatasetSpec {
  Family family = Family::Linear;
  std::size_t n_min = 1;
  std::size_t n_max = 1;
  std::size_t variations = 1;
  std::uint64_t master_seed = 0;
  bool shuffled = false;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Per-instance seed for a (topology index, variation index) pair.
std::uint64_t instance_seed(std::uint64_t master_seed, std::size_t topology_index, std::size_t variation);
// Seed used to shuffle an instance drawn with instance_seed.
std::uint64_t shuffle_seed(std::uint64_t instance_seed);

std::string instance_id(Family family, const Topology& topology, std::size_t variation, bool shuffled);

// Topology-major, variation-minor list of instances.
std::vector<PuzzleInstance> generate_dataset(const DatasetSpec& spec, const Ontology& ontology);

}  // namespace argbench
