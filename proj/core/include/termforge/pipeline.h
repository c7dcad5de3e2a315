#ifndef TERMFORGE_PIPELINE_H_
#define TERMFORGE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "termforge/candidate_extraction.h"
#include "termforge/corpus_store.h"
#include "termforge/set_classifier.h"
#include "termforge/surface_clustering.h"
#include "termforge/termhood.h"

namespace termforge {

inline constexpr const char* kConfigEnvVar = "TERMFORGE_CONFIG";

// Stage names in execution order.
inline const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> kStages{"ingest", "extract", "label", "score",
                                                "classify", "cluster", "rank", "eval"};
  return kStages;
}

struct PipelineConfig {
  uint64_t seed = 0;
  std::filesystem::path out;

  // Inputs. Relative paths in a config file resolve against its directory.
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> np_annotations;  // else the fallback chunker
  std::optional<std::filesystem::path> stopwords;       // else the built-in list
  std::optional<std::filesystem::path> snapshot;        // label source, first choice
  std::optional<std::filesystem::path> fixture_wiki;    // label source, second choice
  std::optional<std::string> endpoint;                  // label source, last choice
  std::optional<std::filesystem::path> static_embeddings;
  std::optional<std::filesystem::path> contextual_embeddings;
  std::optional<std::filesystem::path> lexicon;

  size_t sample_size = 1'000'000;
  uint32_t min_tokens = 10;
  Thresholds thresholds;
  uint64_t aug_min_freq = 100;

  std::vector<Measure> measures{Measure::kRelativeFrequency, Measure::kContextVariance};
  size_t cv_sample_size = 1000;

  std::string classifier_set = "LNNP_1";
  TrainConfig classifier;
  double classifier_threshold = 0;
  double train_fraction = 0.2;
  double dev_fraction = 0.2;

  ClusteringOptions clustering;
  std::optional<size_t> cluster_k;  // nullopt: number of gold canonical titles
  uint32_t cluster_n = 2;           // which augmented set is clustered

  std::string created_at = "1970-01-01T00:00:00Z";
  size_t label_concurrency = 4;
  double label_rps = 10;

  std::vector<std::string> disabled_stages;

  bool stage_enabled(std::string_view stage) const;

  // Strict: unknown keys and wrong types raise kConfig.
  static PipelineConfig from_json_text(std::string_view text,
                                       const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
  // Checks that referenced inputs exist (kConfig otherwise). With a stage
  // given, only that stage's needs are checked.
  void validate(std::optional<std::string_view> only_stage = std::nullopt) const;

  // Canonical JSON of every setting except locations; input files are
  // represented by their content digests.
  std::string canonical_json() const;
  std::string digest() const;
};

enum class StageStatus { kRan, kCached, kDisabled, kFailed };
std::string_view stage_status_name(StageStatus s);

struct StageOutcome {
  std::string name;
  StageStatus status = StageStatus::kDisabled;
  std::string error;
};

struct ManifestEntry {
  std::string stage;
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct PipelineResult {
  int exit_code = 0;
  std::vector<StageOutcome> stages;
  std::vector<ManifestEntry> artifacts;
};

// Runs enabled stages in order under an exclusive lock on the output
// directory. A stage whose inputs and outputs match its recorded stamp is
// skipped. The manifest is written after every stage, so a failed run
// leaves a partial one.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

// Runs one stage against artifacts already in config.out, ignoring stage
// toggles and stamps. Missing prerequisite artifacts raise
// kMissingDependency naming the file and the stage that makes it.
std::vector<ManifestEntry> run_single_stage(const PipelineConfig& config, std::string_view stage,
                                            std::ostream* log = nullptr);

// A JSON document with a "clusters" array (clustering solutions and gold
// files) or a bare array of clusters.
Partition read_partition_file(const std::filesystem::path& path);
void write_partition_file(const std::filesystem::path& path, const Partition& partition,
                          std::string_view source);

}  // namespace termforge

#endif  // TERMFORGE_PIPELINE_H_
