#ifndef TERMFORGE_RANKING_H_
#define TERMFORGE_RANKING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "termforge/corpus_store.h"
#include "termforge/surface_clustering.h"
#include "termforge/wiki_labeling.h"

namespace termforge {

struct RankedEntry {
  std::string representative;
  std::vector<std::string> members;  // sorted
  uint64_t frequency = 0;            // sum of member sentence frequencies
  std::optional<uint64_t> inlink_count;

  bool operator==(const RankedEntry&) const = default;
};

using RankedList = std::vector<RankedEntry>;
using FrequencyFn = std::function<uint64_t(const std::string&)>;

// Each item is a cluster (a single candidate is a one-member cluster). The
// representative is the most frequent member, ties to the smaller surface.
// Sorted by frequency descending, then representative ascending.
RankedList rank_by_frequency(const Partition& items, const FrequencyFn& frequency);
RankedList rank_by_frequency(const Partition& items, const SentenceStore& store);

// Re-sorts an existing list with the same ordering.
RankedList rerank(RankedList list);

// Inlink count of the representative's label, else of the first member
// that has one.
void attach_inlinks(RankedList& list, const LabelSnapshot& labels);

// Spearman between frequency and inlink count over entries that have an
// inlink count once labels are attached; fewer than two → kInvalidArgument.
double inlink_correlation(const RankedList& list, const LabelSnapshot& labels);

// rank, representative, members (comma separated), frequency, inlink_count.
void write_ranked_tsv(std::ostream& out, const RankedList& list);
void write_ranked_tsv(const std::filesystem::path& path, const RankedList& list);

}  // namespace termforge

#endif  // TERMFORGE_RANKING_H_
