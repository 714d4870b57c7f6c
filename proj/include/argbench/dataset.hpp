#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argbench/puzzle.hpp"

namespace argbench {

// Version of the dataset line layout. Bump when fields change meaning.
inline constexpr int kDatasetSchemaVersion = 1;

// One dataset line:
//   schema_version, id, family, topology, n_args, num_paths, path_lengths,
//   names (by argument id), statement, presentation_order, shuffled,
//   label ("yes"|"no"), seed, prompt
nlohmann::json instance_to_json(const PuzzleInstance& instance);

// Rebuilds the graph from the topology and checks the stored label, names
// and prompt against it. Throws IntegrityError on any mismatch and
// ParseError on missing or mistyped fields.
PuzzleInstance instance_from_json(const nlohmann::json& line);

// Writes atomically (temp file + rename).
void write_dataset(const std::filesystem::path& path, const std::vector<PuzzleInstance>& instances);
std::vector<PuzzleInstance> read_dataset(const std::filesystem::path& path);

// Writes `contents` to `path` through a sibling temp file so readers never
// see a partial file. Throws IoError.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace argbench
