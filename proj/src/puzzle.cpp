#include "argbench/puzzle.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "argbench/error.hpp"
#include "argbench/random.hpp"
#include "argbench/semantics.hpp"

#ifndef ARGBENCH_DATA_DIR
#define ARGBENCH_DATA_DIR "data"
#endif

namespace argbench {

namespace {

constexpr std::string_view kHeader =
    "The following is a reasoning puzzle. Witnesses should be believed unless there is testimony that they are "
    "lying. Now consider the following facts:";
constexpr std::string_view kWitness = "Witness ";
constexpr std::string_view kSaysThat = " says that ";
constexpr std::string_view kAccusePrefix = "witness ";
constexpr std::string_view kAccuseSuffix = " is lying";
constexpr std::string_view kQuestionPrefix = "Question: should it be believed that ";
constexpr std::string_view kInstruction = "End your answer with: \"Answer: yes or no\".";

bool reads_as_accusation(std::string_view body) {
  return body.starts_with(kAccusePrefix) && body.ends_with(kAccuseSuffix) &&
         body.size() > kAccusePrefix.size() + kAccuseSuffix.size();
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

struct Entry {
  std::string text;
  std::size_t line;
};

std::vector<Entry> read_entries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<Entry> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto t = trim(line);
    if (!t.empty()) out.push_back({std::string(t), number});
  }
  return out;
}

void check_unique(const std::vector<Entry>& entries, const std::filesystem::path& path) {
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& e : entries) {
    auto [it, inserted] = seen.emplace(e.text, e.line);
    if (!inserted) {
      throw ValidationError(path.string() + ":" + std::to_string(e.line) + ": duplicate entry '" + e.text +
                            "' (first on line " + std::to_string(it->second) + ")");
    }
  }
}

std::vector<std::string> texts(const std::vector<Entry>& entries) {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.text);
  return out;
}

std::vector<ArgumentId> canonical_order(std::size_t n) {
  std::vector<ArgumentId> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = ArgumentId{i};
  return order;
}

}  // namespace

Ontology::Ontology(std::vector<std::string> names, std::vector<std::string> statements)
    : names_(std::move(names)), statements_(std::move(statements)) {
  if (names_.empty()) throw ValidationError("ontology has no names");
  if (statements_.empty()) throw ValidationError("ontology has no statements");
  auto check = [](const std::vector<std::string>& list, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& s : list) {
      if (s.empty()) throw ValidationError(std::string("empty ") + what);
      if (!seen.insert(s).second) throw ValidationError(std::string("duplicate ") + what + " '" + s + "'");
    }
  };
  check(names_, "name");
  check(statements_, "statement");
  for (const auto& name : names_) {
    if (name.find(" says that") != std::string::npos || name.find('\n') != std::string::npos) {
      throw ValidationError("name '" + name + "' cannot be rendered unambiguously");
    }
  }
  for (const auto& s : statements_) {
    if (std::string_view(".?!,;:").find(s.back()) != std::string_view::npos) {
      throw ValidationError("statement '" + s + "' ends with punctuation");
    }
    if (reads_as_accusation(s)) throw ValidationError("statement '" + s + "' reads as an accusation");
  }
}

Ontology load_ontology(const std::filesystem::path& names_file, const std::filesystem::path& statements_file) {
  const auto names = read_entries(names_file);
  const auto statements = read_entries(statements_file);
  if (names.empty()) throw ValidationError(names_file.string() + ": no names");
  if (statements.empty()) throw ValidationError(statements_file.string() + ": no statements");
  check_unique(names, names_file);
  check_unique(statements, statements_file);
  return Ontology(texts(names), texts(statements));
}

std::filesystem::path default_names_path() { return std::filesystem::path(ARGBENCH_DATA_DIR) / "names.txt"; }
std::filesystem::path default_statements_path() {
  return std::filesystem::path(ARGBENCH_DATA_DIR) / "statements.txt";
}

std::string to_string(Family family) { return family == Family::Linear ? "linear" : "nonlinear"; }

Family parse_family(std::string_view text) {
  if (text == "linear") return Family::Linear;
  if (text == "nonlinear") return Family::Nonlinear;
  throw ValidationError("unknown family '" + std::string(text) + "' (expected linear or nonlinear)");
}

PuzzleInstance bind_instance(const Topology& topology, std::vector<std::string> names, std::string statement,
                             std::uint64_t seed) {
  auto graph = make_graph(topology);
  if (names.size() != graph.size()) {
    throw ValidationError("topology " + topology.to_string() + " needs " + std::to_string(graph.size()) +
                          " names, got " + std::to_string(names.size()));
  }
  std::unordered_set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw ValidationError("witness names must be distinct");
  const bool label = root_accepted(graph);
  auto order = canonical_order(graph.size());
  return PuzzleInstance{
      .id = topology.to_string() + "#" + std::to_string(seed),
      .topology = topology,
      .graph = std::move(graph),
      .witness_names = std::move(names),
      .statement = std::move(statement),
      .presentation_order = std::move(order),
      .label = label,
      .seed = seed,
      .shuffled = false,
  };
}

PuzzleInstance sample_instance(const Topology& topology, const Ontology& ontology, std::uint64_t seed) {
  const auto n = topology.argument_count();
  const auto& pool = ontology.names();
  if (pool.size() < n) {
    throw CapacityError("topology " + topology.to_string() + " needs " + std::to_string(n) +
                        " distinct names but the ontology has " + std::to_string(pool.size()));
  }
  Rng rng(seed);
  const auto& statement = ontology.statements()[rng.below(ontology.statements().size())];

  // Partial Fisher-Yates: the first n slots end up a uniform draw without
  // replacement.
  std::vector<std::size_t> index(pool.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + rng.below(index.size() - i);
    std::swap(index[i], index[j]);
    names.push_back(pool[index[i]]);
  }
  return bind_instance(topology, std::move(names), statement, seed);
}

std::string render_prompt(const PuzzleInstance& instance) {
  std::string out(kHeader);
  out += "\n\n";
  for (auto a : instance.presentation_order) {
    out += kWitness;
    out += instance.witness_names.at(a.index);
    out += kSaysThat;
    const auto& targets = instance.graph.targets_of(a);
    if (targets.empty()) {
      out += instance.statement;
    } else {
      out += kAccusePrefix;
      out += instance.witness_names.at(targets.front().index);
      out += kAccuseSuffix;
    }
    out += ".\n";
  }
  out += "\n";
  out += kQuestionPrefix;
  out += instance.statement;
  out += "?\n";
  out += kInstruction;
  return out;
}

PuzzleInstance shuffle_presentation(const PuzzleInstance& instance, std::uint64_t seed) {
  PuzzleInstance out = instance;
  Rng rng(seed);
  rng.shuffle(std::span<ArgumentId>(out.presentation_order));
  out.shuffled = true;
  return out;
}

ParsedPrompt reparse_prompt(std::string_view prompt) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest = prompt;
    if (rest.ends_with('\n')) rest.remove_suffix(1);
    std::size_t start = 0;
    for (;;) {
      const auto nl = rest.find('\n', start);
      lines.push_back(rest.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }
  if (lines[0] != kHeader) throw ParseError(1, "expected the puzzle header");
  if (lines.size() < 2 || !lines[1].empty()) throw ParseError(2, "expected a blank line after the header");

  std::size_t fact_end = 2;
  while (fact_end < lines.size() && !lines[fact_end].empty()) ++fact_end;
  if (fact_end == 2) throw ParseError(3, "expected at least one fact line");

  struct Fact {
    std::string name;
    std::string_view body;  // text after "says that ", final period removed
    std::size_t line;
  };
  std::vector<Fact> facts;
  std::unordered_map<std::string, std::size_t> fact_of_name;
  for (std::size_t i = 2; i < fact_end; ++i) {
    const auto line = lines[i];
    const auto number = i + 1;
    if (!line.starts_with(kWitness)) throw ParseError(number, "fact line must start with 'Witness '");
    const auto says = line.find(kSaysThat, kWitness.size());
    if (says == std::string_view::npos) throw ParseError(number, "fact line is missing 'says that'");
    std::string name(line.substr(kWitness.size(), says - kWitness.size()));
    if (name.empty()) throw ParseError(number, "empty witness name");
    auto body = line.substr(says + kSaysThat.size());
    if (!body.ends_with('.') || body.size() < 2) throw ParseError(number, "fact line must end with '.'");
    body.remove_suffix(1);
    if (!fact_of_name.emplace(name, facts.size()).second) {
      throw ParseError(number, "witness '" + name + "' testifies twice");
    }
    facts.push_back({std::move(name), body, number});
  }

  const auto question_line = fact_end + 1;
  if (question_line >= lines.size()) throw ParseError(question_line + 1, "missing question line");
  const auto question = lines[question_line];
  if (!question.starts_with(kQuestionPrefix) || !question.ends_with('?')) {
    throw ParseError(question_line + 1, "expected 'Question: should it be believed that ...?'");
  }
  const auto statement = question.substr(kQuestionPrefix.size(), question.size() - kQuestionPrefix.size() - 1);
  if (question_line + 1 >= lines.size()) throw ParseError(question_line + 2, "missing answer instruction line");
  if (lines[question_line + 1] != kInstruction) throw ParseError(question_line + 2, "expected the answer instruction");
  if (question_line + 2 != lines.size()) throw ParseError(question_line + 3, "unexpected text after the instruction");

  // Resolve each fact to either the claim or an accusation (fact index).
  std::optional<std::size_t> root;
  std::vector<std::optional<std::size_t>> accused(facts.size());
  for (std::size_t f = 0; f < facts.size(); ++f) {
    const auto body = facts[f].body;
    if (reads_as_accusation(body)) {
      std::string target(
          body.substr(kAccusePrefix.size(), body.size() - kAccusePrefix.size() - kAccuseSuffix.size()));
      auto it = fact_of_name.find(target);
      if (it == fact_of_name.end()) throw ParseError(facts[f].line, "unknown witness '" + target + "'");
      accused[f] = it->second;
    } else {
      if (root) throw ParseError(facts[f].line, "second claim line; only one witness may make the claim");
      if (body != statement) throw ParseError(facts[f].line, "claim does not match the question statement");
      root = f;
    }
  }
  if (!root) throw ParseError(3, "no witness makes the claim asked about in the question");

  // Number facts: root first, breadth-first over attackers, then leftovers.
  constexpr auto kUnassigned = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> id_of(facts.size(), kUnassigned);
  std::uint32_t next = 0;
  std::deque<std::size_t> queue{*root};
  id_of[*root] = next++;
  auto drain = [&] {
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      for (std::size_t f = 0; f < facts.size(); ++f) {
        if (accused[f] == cur && id_of[f] == kUnassigned) {
          id_of[f] = next++;
          queue.push_back(f);
        }
      }
    }
  };
  drain();
  for (std::size_t f = 0; f < facts.size(); ++f) {
    if (id_of[f] == kUnassigned) {
      id_of[f] = next++;
      queue.push_back(f);
      drain();
    }
  }

  std::vector<Attack> attacks;
  std::vector<std::string> names(facts.size());
  std::vector<ArgumentId> order;
  for (std::size_t f = 0; f < facts.size(); ++f) {
    names[id_of[f]] = facts[f].name;
    order.push_back(ArgumentId{id_of[f]});
    if (accused[f]) attacks.push_back({ArgumentId{id_of[f]}, ArgumentId{id_of[*accused[f]]}});
  }
  return ParsedPrompt{
      .graph = AttackGraph(facts.size(), std::move(attacks)),
      .witness_names = std::move(names),
      .statement = std::string(statement),
      .presentation_order = std::move(order),
  };
}

void DatasetSpec::validate() const {
  if (n_min < 1) throw ValidationError("n-min must be at least 1");
  if (n_min > n_max) {
    throw ValidationError("n-min (" + std::to_string(n_min) + ") exceeds n-max (" + std::to_string(n_max) + ")");
  }
  if (variations < 1) throw ValidationError("variations must be at least 1");
}

std::uint64_t instance_seed(std::uint64_t master_seed, std::size_t topology_index, std::size_t variation) {
  return derive_seed(master_seed, topology_index, variation);
}

std::uint64_t shuffle_seed(std::uint64_t instance_seed) {
  return derive_seed(instance_seed, 0x53485546464c45ULL, 1);  // "SHUFFLE"
}

std::string instance_id(Family family, const Topology& topology, std::size_t variation, bool shuffled) {
  auto id = to_string(family) + "/" + topology.to_string() + "/v" + std::to_string(variation);
  if (shuffled) id += "/shuffled";
  return id;
}

std::vector<PuzzleInstance> generate_dataset(const DatasetSpec& spec, const Ontology& ontology) {
  spec.validate();
  std::vector<Topology> topologies;
  if (spec.family == Family::Linear) {
    for (auto n = spec.n_min; n <= spec.n_max; ++n) topologies.push_back(Topology::linear(n));
  } else {
    topologies = enumerate_topologies(spec.n_min, spec.n_max);
  }

  std::vector<PuzzleInstance> out;
  out.reserve(topologies.size() * spec.variations);
  for (std::size_t t = 0; t < topologies.size(); ++t) {
    for (std::size_t v = 0; v < spec.variations; ++v) {
      const auto seed = instance_seed(spec.master_seed, t, v);
      auto instance = sample_instance(topologies[t], ontology, seed);
      if (spec.shuffled) instance = shuffle_presentation(instance, shuffle_seed(seed));
      instance.id = instance_id(spec.family, topologies[t], v, spec.shuffled);
      out.push_back(std::move(instance));
    }
  }
  return out;
}

}  // namespace argbench
