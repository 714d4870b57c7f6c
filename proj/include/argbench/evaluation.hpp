#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "argbench/gateway.hpp"
#include "argbench/puzzle.hpp"

namespace argbench {

enum class Verdict { Yes, No, Unparseable };

std::string to_string(Verdict verdict);

// Reads the verdict from a model reply. Looks for the last "answer:" marker
// (any case) and takes the first alphabetic word after it; without a marker,
// a reply consisting of just "yes" or "no" is accepted.
Verdict parse_answer(std::string_view raw);

struct EvalRecord {
  std::string instance_id;
  bool label = false;
  Verdict verdict = Verdict::Unparseable;
  std::optional<bool> correct;  // empty unless verdict is Yes or No
  std::string raw_text;
  std::int64_t latency_ms = 0;
  int attempts = 0;
  TransportStatus status = TransportStatus::Ok;
  std::string error;

  bool parsed() const noexcept { return status == TransportStatus::Ok && verdict != Verdict::Unparseable; }
  // Failed, unparseable, or wrong.
  bool missed() const noexcept { return !correct.value_or(false); }
};

EvalRecord make_record(const PuzzleInstance& instance, ModelReply reply);

nlohmann::json record_to_json(const EvalRecord& record);
EvalRecord record_from_json(const nlohmann::json& j);

// Accepts a results file or a run directory containing results.jsonl.
std::vector<EvalRecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<EvalRecord>& records);

inline constexpr std::string_view kResultsFile = "results.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";

struct EvaluationOutcome {
  std::vector<EvalRecord> records;  // dataset order
  std::size_t new_requests = 0;
};

// Queries `client` for every instance without a record in
// <run_dir>/results.jsonl, appending one line per answer. Records are
// appended in dataset order regardless of completion order, so a run over
// a deterministic client produces the same file every time. Throws IoError
// before issuing any request if the run directory cannot be written, and
// IntegrityError if existing records name instances outside the dataset.
EvaluationOutcome run_evaluation(const std::vector<PuzzleInstance>& dataset, ModelClient& client,
                                 const std::filesystem::path& run_dir);

}  // namespace argbench
