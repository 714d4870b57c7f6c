#include "argbench/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "argbench/dataset.hpp"
#include "argbench/error.hpp"

namespace argbench {

using nlohmann::json;

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Yes:
      return "yes";
    case Verdict::No:
      return "no";
    case Verdict::Unparseable:
      return "unparseable";
  }
  return "?";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

Verdict from_word(std::string_view word) {
  if (word == "yes") return Verdict::Yes;
  if (word == "no") return Verdict::No;
  return Verdict::Unparseable;
}

}  // namespace

Verdict parse_answer(std::string_view raw) {
  const auto text = lower(raw);
  constexpr std::string_view kMarker = "answer:";
  const auto marker = text.rfind(kMarker);
  if (marker != std::string::npos) {
    auto pos = marker + kMarker.size();
    // Skip whitespace and markup such as ** or quotes before the word.
    while (pos < text.size() && !is_alpha(text[pos])) ++pos;
    auto end = pos;
    while (end < text.size() && is_alpha(text[end])) ++end;
    return from_word(std::string_view(text).substr(pos, end - pos));
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return Verdict::Unparseable;
  const auto last = text.find_last_not_of(" \t\r\n");
  return from_word(std::string_view(text).substr(first, last - first + 1));
}

EvalRecord make_record(const PuzzleInstance& instance, ModelReply reply) {
  EvalRecord r;
  r.instance_id = instance.id;
  r.label = instance.label;
  r.latency_ms = reply.latency_ms;
  r.attempts = reply.attempts;
  r.status = reply.status;
  r.error = std::move(reply.error);
  if (reply.status == TransportStatus::Ok) {
    r.verdict = parse_answer(reply.raw_text);
    if (r.verdict != Verdict::Unparseable) r.correct = (r.verdict == Verdict::Yes) == r.label;
    r.raw_text = std::move(reply.raw_text);
  }
  return r;
}

json record_to_json(const EvalRecord& r) {
  json j{
      {"instance_id", r.instance_id},
      {"label", r.label ? "yes" : "no"},
      {"verdict", to_string(r.verdict)},
      {"correct", r.correct ? json(*r.correct) : json(nullptr)},
      {"raw_text", r.raw_text},
      {"latency_ms", r.latency_ms},
      {"attempts", r.attempts},
      {"status", r.status == TransportStatus::Ok ? "ok" : "failed"},
  };
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

EvalRecord record_from_json(const json& j) {
  try {
    EvalRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    const auto label = j.at("label").get<std::string>();
    if (label != "yes" && label != "no") throw ParseError(0, "label must be yes or no");
    r.label = label == "yes";
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict == "yes") {
      r.verdict = Verdict::Yes;
    } else if (verdict == "no") {
      r.verdict = Verdict::No;
    } else if (verdict == "unparseable") {
      r.verdict = Verdict::Unparseable;
    } else {
      throw ParseError(0, "unknown verdict '" + verdict + "'");
    }
    if (!j.at("correct").is_null()) r.correct = j.at("correct").get<bool>();
    r.raw_text = j.at("raw_text").get<std::string>();
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.attempts = j.value("attempts", 0);
    const auto status = j.at("status").get<std::string>();
    if (status != "ok" && status != "failed") throw ParseError(0, "unknown status '" + status + "'");
    r.status = status == "ok" ? TransportStatus::Ok : TransportStatus::Failed;
    r.error = j.value("error", "");
    if (r.correct.has_value() != r.parsed()) throw ParseError(0, r.instance_id + ": correct must be set iff parsed");
    if (r.correct && *r.correct != ((r.verdict == Verdict::Yes) == r.label)) {
      throw IntegrityError(r.instance_id + ": correct flag disagrees with verdict and label");
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed result record: ") + e.what());
  }
}

namespace {

std::filesystem::path results_path(const std::filesystem::path& path) {
  return std::filesystem::is_directory(path) ? path / kResultsFile : path;
}

// Reads a results file. An unterminated final line is a write interrupted
// mid-record; it is dropped (and reported through `truncated_at`) instead of
// failing the whole file.
std::vector<EvalRecord> read_results_file(const std::filesystem::path& file, std::optional<std::size_t>* truncated_at) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read results " + file.string());
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<EvalRecord> out;
  std::size_t start = 0;
  std::size_t number = 0;
  while (start < contents.size()) {
    ++number;
    const auto nl = contents.find('\n', start);
    const bool terminated = nl != std::string::npos;
    const auto line = contents.substr(start, terminated ? nl - start : std::string::npos);
    if (!line.empty()) {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        if (!terminated && truncated_at != nullptr) {
          *truncated_at = start;
          break;
        }
        throw ParseError(number, file.string() + ": invalid JSON");
      }
      try {
        out.push_back(record_from_json(j));
      } catch (const ParseError& e) {
        throw ParseError(number, file.string() + ": " + e.what());
      }
    }
    if (!terminated) break;
    start = nl + 1;
  }
  return out;
}

}  // namespace

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  return read_results_file(results_path(path), nullptr);
}

void write_records(const std::filesystem::path& path, const std::vector<EvalRecord>& records) {
  std::string contents;
  for (const auto& r : records) {
    contents += record_to_json(r).dump();
    contents += '\n';
  }
  write_file_atomically(path, contents);
}

EvaluationOutcome run_evaluation(const std::vector<PuzzleInstance>& dataset, ModelClient& client,
                                 const std::filesystem::path& run_dir) {
  if (dataset.empty()) throw ValidationError("dataset is empty");
  std::error_code ec;
  std::filesystem::create_directories(run_dir, ec);
  if (ec || !std::filesystem::is_directory(run_dir)) {
    throw IoError("cannot create run directory " + run_dir.string() + (ec ? ": " + ec.message() : ""));
  }
  const auto file = run_dir / kResultsFile;

  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!index_of.emplace(dataset[i].id, i).second) throw IntegrityError("duplicate instance id " + dataset[i].id);
  }

  std::vector<std::optional<EvalRecord>> slots(dataset.size());
  if (std::filesystem::exists(file)) {
    std::optional<std::size_t> truncated_at;
    for (auto& r : read_results_file(file, &truncated_at)) {
      auto it = index_of.find(r.instance_id);
      if (it == index_of.end()) throw IntegrityError(file.string() + ": record for unknown instance " + r.instance_id);
      slots[it->second] = std::move(r);
    }
    if (truncated_at) std::filesystem::resize_file(file, *truncated_at);
  }

  bool needs_newline = false;
  if (std::filesystem::exists(file) && std::filesystem::file_size(file) > 0) {
    std::ifstream tail(file, std::ios::binary);
    tail.seekg(-1, std::ios::end);
    needs_newline = tail.get() != '\n';
  }
  std::ofstream out(file, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write " + file.string());
  if (needs_newline) out << '\n';

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!slots[i]) pending.push_back(i);
  }

  std::vector<std::optional<EvalRecord>> fresh(pending.size());
  std::mutex write_mu;
  std::size_t flushed = 0;  // fresh[0, flushed) are on disk
  std::atomic<std::size_t> next{0};
  std::exception_ptr io_failure;

  auto worker = [&] {
    for (;;) {
      const auto k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const auto& instance = dataset[pending[k]];
      auto record = make_record(instance, client.query(render_prompt(instance), instance.id));

      std::lock_guard lock(write_mu);
      fresh[k] = std::move(record);
      while (flushed < fresh.size() && fresh[flushed]) {
        out << record_to_json(*fresh[flushed]).dump() << '\n';
        ++flushed;
      }
      out.flush();
      if (!out && !io_failure) io_failure = std::make_exception_ptr(IoError("write failed for " + file.string()));
    }
  };

  const auto workers = std::min(std::max<std::size_t>(1, client.max_concurrency()), pending.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
  if (workers > 0) worker();
  for (auto& t : threads) t.join();
  if (io_failure) std::rethrow_exception(io_failure);

  EvaluationOutcome outcome;
  outcome.new_requests = pending.size();
  for (std::size_t k = 0; k < pending.size(); ++k) slots[pending[k]] = std::move(fresh[k]);
  outcome.records.reserve(dataset.size());
  for (auto& s : slots) outcome.records.push_back(std::move(*s));
  return outcome;
}

}  // namespace argbench
