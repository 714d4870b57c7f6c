#include "argbench/af_core.hpp"

#include <algorithm>
#include <charconv>
#include <functional>

#include "argbench/error.hpp"

namespace argbench {

AttackGraph::AttackGraph(std::size_t n, std::vector<Attack> attacks)
    : n_(n), attacks_(std::move(attacks)), attackers_(n), targets_(n) {
  if (n_ == 0) throw ValidationError("attack graph needs at least one argument");
  for (const auto& e : attacks_) {
    if (e.attacker.index >= n_ || e.target.index >= n_) {
      throw ValidationError("attack " + std::to_string(e.attacker.index) + "->" +
                            std::to_string(e.target.index) + " references an argument outside 0.." +
                            std::to_string(n_ - 1));
    }
  }
  std::sort(attacks_.begin(), attacks_.end());
  attacks_.erase(std::unique(attacks_.begin(), attacks_.end()), attacks_.end());
  for (const auto& e : attacks_) {
    attackers_[e.target.index].push_back(e.attacker);
    targets_[e.attacker.index].push_back(e.target);
  }
  for (auto& a : attackers_) std::sort(a.begin(), a.end());
}

bool AttackGraph::has_attack(ArgumentId attacker, ArgumentId target) const {
  return std::binary_search(attacks_.begin(), attacks_.end(), Attack{attacker, target});
}

bool AttackGraph::is_rooted_in_tree() const {
  if (!targets_[0].empty()) return false;
  for (std::size_t i = 1; i < n_; ++i) {
    if (targets_[i].size() != 1) return false;
  }
  // With out-degree 1 everywhere but the root, reaching the root within n
  // steps from every argument rules out cycles.
  for (std::size_t i = 1; i < n_; ++i) {
    std::size_t cur = i;
    std::size_t steps = 0;
    while (cur != 0 && steps <= n_) {
      cur = targets_[cur].front().index;
      ++steps;
    }
    if (cur != 0) return false;
  }
  return true;
}

std::string in_tree_signature(const AttackGraph& graph) {
  if (!graph.is_rooted_in_tree()) throw ValidationError("graph is not an in-tree rooted at argument 0");
  std::function<std::string(ArgumentId)> encode = [&](ArgumentId a) {
    std::vector<std::string> children;
    for (auto c : graph.attackers_of(a)) children.push_back(encode(c));
    std::sort(children.begin(), children.end());
    std::string out = "(";
    for (const auto& c : children) out += c;
    out += ")";
    return out;
  };
  return encode(ArgumentId{0});
}

bool isomorphic_in_trees(const AttackGraph& a, const AttackGraph& b) {
  return a.size() == b.size() && in_tree_signature(a) == in_tree_signature(b);
}

Topology Topology::linear(std::size_t n) {
  if (n == 0) throw ValidationError("linear topology needs n >= 1");
  return Topology(Kind::Linear, n, {});
}

Topology Topology::star(std::vector<std::size_t> path_lengths) {
  for (auto len : path_lengths) {
    if (len == 0) throw ValidationError("star path lengths must be positive");
  }
  return Topology(Kind::Star, 0, std::move(path_lengths));
}

std::size_t Topology::argument_count() const noexcept {
  if (kind_ == Kind::Linear) return n_;
  std::size_t total = 1;
  for (auto len : paths_) total += len;
  return total;
}

std::vector<std::size_t> Topology::path_lengths() const {
  if (kind_ == Kind::Star) return paths_;
  if (n_ == 1) return {};
  return {n_ - 1};
}

Topology Topology::canonical() const {
  if (kind_ == Kind::Linear) return *this;
  auto sorted = paths_;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return Topology(Kind::Star, 0, std::move(sorted));
}

std::string Topology::to_string() const {
  if (kind_ == Kind::Linear) return "linear:" + std::to_string(n_);
  std::string out = "star:";
  for (std::size_t i = 0; i < paths_.size(); ++i) {
    if (i > 0) out += '+';
    out += std::to_string(paths_[i]);
  }
  return out;
}

namespace {

std::size_t parse_count(std::string_view digits, std::string_view whole) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw ParseError(0, "bad topology '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Topology Topology::parse(std::string_view text) {
  constexpr std::string_view kLinear = "linear:";
  constexpr std::string_view kStar = "star:";
  if (text.starts_with(kLinear)) {
    auto n = parse_count(text.substr(kLinear.size()), text);
    if (n == 0) throw ParseError(0, "bad topology '" + std::string(text) + "': n must be positive");
    return linear(n);
  }
  if (text.starts_with(kStar)) {
    auto rest = text.substr(kStar.size());
    std::vector<std::size_t> paths;
    while (!rest.empty()) {
      auto plus = rest.find('+');
      auto part = rest.substr(0, plus);
      auto len = parse_count(part, text);
      if (len == 0) throw ParseError(0, "bad topology '" + std::string(text) + "': zero-length path");
      paths.push_back(len);
      if (plus == std::string_view::npos) break;
      rest = rest.substr(plus + 1);
      if (rest.empty()) throw ParseError(0, "bad topology '" + std::string(text) + "': trailing '+'");
    }
    return star(std::move(paths));
  }
  throw ParseError(0, "bad topology '" + std::string(text) + "': expected linear:<n> or star:<l1>+<l2>...");
}

std::vector<Partition> enumerate_partitions(std::size_t m) {
  std::vector<Partition> out;
  Partition current;
  // Largest first part first, then recurse with parts bounded by the
  // previous one: this is reverse-lexicographic order.
  std::function<void(std::size_t, std::size_t)> extend = [&](std::size_t remaining, std::size_t max_part) {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (std::size_t part = std::min(remaining, max_part); part >= 1; --part) {
      current.push_back(part);
      extend(remaining - part, part);
      current.pop_back();
    }
  };
  extend(m, m);
  return out;
}

AttackGraph make_linear(std::size_t n) {
  if (n == 0) throw ValidationError("linear graph needs n >= 1");
  std::vector<Attack> attacks;
  attacks.reserve(n - 1);
  for (std::uint32_t i = 0; i + 1 < n; ++i) attacks.push_back({ArgumentId{i + 1}, ArgumentId{i}});
  return AttackGraph(n, std::move(attacks));
}

AttackGraph make_star(const std::vector<std::size_t>& path_lengths) {
  std::size_t n = 1;
  for (auto len : path_lengths) {
    if (len == 0) throw ValidationError("star path lengths must be positive");
    n += len;
  }
  std::vector<Attack> attacks;
  attacks.reserve(n - 1);
  std::uint32_t next = 1;
  for (auto len : path_lengths) {
    ArgumentId target{0};
    for (std::size_t j = 0; j < len; ++j) {
      ArgumentId arg{next++};
      attacks.push_back({arg, target});
      target = arg;
    }
  }
  return AttackGraph(n, std::move(attacks));
}

AttackGraph make_graph(const Topology& topology) {
  if (topology.kind() == Topology::Kind::Linear) return make_linear(topology.argument_count());
  return make_star(topology.path_lengths());
}

std::vector<Topology> enumerate_topologies(std::size_t n_min, std::size_t n_max) {
  if (n_min == 0) throw ValidationError("n_min must be at least 1");
  if (n_min > n_max) {
    throw ValidationError("inverted range: n_min " + std::to_string(n_min) + " > n_max " + std::to_string(n_max));
  }
  std::vector<Topology> out;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    for (auto& p : enumerate_partitions(n - 1)) out.push_back(Topology::star(std::move(p)));
  }
  return out;
}

}  // namespace argbench
