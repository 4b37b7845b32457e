#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "guirl/agent.hpp"
#include "guirl/template.hpp"
#include "guirl/trajectory.hpp"

namespace guirl {

// Append-only JSONL file of trajectories. Appends are serialised by a mutex
// and flushed line by line; ids continue from the largest id already on disk.
class TrajectoryStore {
 public:
  explicit TrajectoryStore(std::string path, bool include_grid = false);

  const std::string& path() const { return path_; }

  // Validates, assigns the next id and appends one line. Throws SchemaError.
  long long append(TrajectoryRecord record);
  std::size_t line_count() const;
  std::vector<TrajectoryRecord> load() const;

  // Reads a JSONL file; errors are prefixed with "line N".
  static std::vector<TrajectoryRecord> read_file(const std::string& path);

 private:
  std::string path_;
  bool include_grid_;
  mutable std::mutex mu_;
  long long last_id_ = 0;
  std::size_t lines_ = 0;
};

// Canonical task categories of the dataset distribution table.
const std::vector<std::string>& known_categories();

struct StepBand {
  int min = 0;
  int max = 0;
  double avg = 0.0;

  bool operator==(const StepBand&) const = default;
};

struct CategoryStats {
  int count = 0;
  StepBand actions;   // steps taken
  StepBand subgoals;  // self-labeled milestone declarations

  bool operator==(const CategoryStats&) const = default;
};

struct DatasetManifest {
  int total_count = 0;
  std::map<std::string, int> platforms;  // desktop, web, mobile always present
  std::map<std::string, CategoryStats> categories;
  std::map<std::string, int> templates;

  ordered_json to_json() const;
  bool operator==(const DatasetManifest&) const = default;
};

DatasetManifest dataset_stats(const std::vector<TrajectoryRecord>& records);

enum class QualityRule { completed, no_format_penalty, no_safety_penalty, replay_verified };

std::string_view quality_rule_name(QualityRule r);
std::optional<QualityRule> parse_quality_rule(std::string_view name);

// Keeps records passing every rule. `completed` means every subtask of the
// template was credited; replay_verified re-executes the record.
std::vector<TrajectoryRecord> filter_quality(const std::vector<TrajectoryRecord>& records,
                                             const std::set<QualityRule>& rules, const TemplateRegistry& templates);

struct GenerationEntry {
  std::string template_id;
  AgentSpec agent;
  int count = 0;
};

// 150 trajectories: 55 desktop, 60 web, 35 mobile.
std::vector<GenerationEntry> desk_preset();

struct GenerationResult {
  DatasetManifest manifest;
  std::vector<long long> ids;
};

// Episode seeds derive from (seed, template, agent, index) only, so a rerun
// with the same arguments writes identical lines. Throws ConfigError for an
// unknown template, a negative count, or a scripted agent on a template
// without gold actions.
GenerationResult generate_dataset(const TemplateRegistry& templates, const std::vector<GenerationEntry>& entries,
                                  std::uint64_t seed, TrajectoryStore& store, const HarnessConfig& config = {},
                                  std::shared_ptr<CritiqueProvider> provider = nullptr);

std::uint64_t episode_seed(std::uint64_t seed, const std::string& template_id, const std::string& agent, int index);

}  // namespace guirl
