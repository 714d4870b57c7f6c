#include "argbench/dataset.hpp"

#include <fstream>
#include <sstream>

#include "argbench/error.hpp"
#include "argbench/semantics.hpp"

namespace argbench {

using nlohmann::json;

json instance_to_json(const PuzzleInstance& instance) {
  json order = json::array();
  for (auto a : instance.presentation_order) order.push_back(a.index);
  const auto paths = instance.topology.path_lengths();
  // nlohmann::json objects keep keys sorted, so lines serialize identically.
  return json{
      {"schema_version", kDatasetSchemaVersion},
      {"id", instance.id},
      {"family", to_string(instance.family())},
      {"topology", instance.topology.to_string()},
      {"n_args", instance.graph.size()},
      {"num_paths", paths.size()},
      {"path_lengths", paths},
      {"names", instance.witness_names},
      {"statement", instance.statement},
      {"presentation_order", std::move(order)},
      {"shuffled", instance.shuffled},
      {"label", instance.label ? "yes" : "no"},
      {"seed", instance.seed},
      {"prompt", render_prompt(instance)},
  };
}

PuzzleInstance instance_from_json(const json& line) {
  try {
    const auto version = line.at("schema_version").get<int>();
    if (version != kDatasetSchemaVersion) {
      throw ParseError(0, "unsupported dataset schema_version " + std::to_string(version));
    }
    const auto id = line.at("id").get<std::string>();
    auto instance = bind_instance(Topology::parse(line.at("topology").get<std::string>()),
                                  line.at("names").get<std::vector<std::string>>(),
                                  line.at("statement").get<std::string>(), line.at("seed").get<std::uint64_t>());
    instance.id = id;
    const auto family = parse_family(line.at("family").get<std::string>());
    if (family != instance.family()) throw IntegrityError(id + ": family does not match topology");

    std::vector<ArgumentId> order;
    std::vector<bool> seen(instance.graph.size(), false);
    for (auto index : line.at("presentation_order").get<std::vector<std::uint32_t>>()) {
      if (index >= seen.size() || seen[index]) throw IntegrityError(id + ": presentation_order is not a permutation");
      seen[index] = true;
      order.push_back(ArgumentId{index});
    }
    if (order.size() != instance.graph.size()) throw IntegrityError(id + ": presentation_order is not a permutation");
    instance.presentation_order = std::move(order);
    instance.shuffled = line.at("shuffled").get<bool>();

    const auto label = line.at("label").get<std::string>();
    if (label != "yes" && label != "no") throw ParseError(0, id + ": label must be \"yes\" or \"no\"");
    if ((label == "yes") != instance.label) throw IntegrityError(id + ": stored label disagrees with the semantics");
    if (line.at("n_args").get<std::size_t>() != instance.graph.size()) throw IntegrityError(id + ": n_args mismatch");
    if (line.at("prompt").get<std::string>() != render_prompt(instance)) {
      throw IntegrityError(id + ": stored prompt differs from the rendered prompt");
    }
    return instance;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed dataset line: ") + e.what());
  } catch (const ValidationError& e) {
    throw IntegrityError(std::string("invalid dataset line: ") + e.what());
  }
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void write_dataset(const std::filesystem::path& path, const std::vector<PuzzleInstance>& instances) {
  std::string contents;
  for (const auto& instance : instances) {
    contents += instance_to_json(instance).dump();
    contents += '\n';
  }
  write_file_atomically(path, contents);
}

std::vector<PuzzleInstance> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dataset " + path.string());
  std::vector<PuzzleInstance> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded()) throw ParseError(number, path.string() + ": invalid JSON");
    try {
      out.push_back(instance_from_json(parsed));
    } catch (const ParseError& e) {
      throw ParseError(number, path.string() + ": " + e.what());
    } catch (const IntegrityError& e) {
      throw IntegrityError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace argbench
