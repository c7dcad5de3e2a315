#include "termforge/ranking.h"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "termforge/error.h"
#include "termforge/evaluation.h"

namespace termforge {
namespace {

bool ranks_before(const RankedEntry& l, const RankedEntry& r) {
  if (l.frequency != r.frequency) return l.frequency > r.frequency;
  return l.representative < r.representative;
}

}  // namespace

RankedList rank_by_frequency(const Partition& items, const FrequencyFn& frequency) {
  RankedList out;
  for (const auto& cluster : items) {
    if (cluster.empty()) continue;
    RankedEntry e;
    e.members = cluster;
    std::sort(e.members.begin(), e.members.end());
    e.members.erase(std::unique(e.members.begin(), e.members.end()), e.members.end());
    uint64_t best = 0;
    for (const auto& m : e.members) {
      uint64_t f = frequency(m);
      e.frequency += f;
      if (e.representative.empty() || f > best) {
        e.representative = m;
        best = f;
      }
    }
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(), ranks_before);
  return out;
}

RankedList rank_by_frequency(const Partition& items, const SentenceStore& store) {
  return rank_by_frequency(items, [&store](const std::string& s) { return store.frequency(s); });
}

RankedList rerank(RankedList list) {
  std::stable_sort(list.begin(), list.end(), ranks_before);
  return list;
}

void attach_inlinks(RankedList& list, const LabelSnapshot& labels) {
  for (auto& e : list) {
    e.inlink_count.reset();
    if (const auto* l = labels.find(e.representative); l && l->inlink_count) {
      e.inlink_count = l->inlink_count;
      continue;
    }
    for (const auto& m : e.members) {
      if (const auto* l = labels.find(m); l && l->inlink_count) {
        e.inlink_count = l->inlink_count;
        break;
      }
    }
  }
}

double inlink_correlation(const RankedList& list, const LabelSnapshot& labels) {
  RankedList copy = list;
  attach_inlinks(copy, labels);
  std::vector<double> freq, inlinks;
  for (const auto& e : copy) {
    if (!e.inlink_count) continue;
    freq.push_back(static_cast<double>(e.frequency));
    inlinks.push_back(static_cast<double>(*e.inlink_count));
  }
  if (freq.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "inlink correlation needs at least two entries with inlink counts");
  }
  return spearman(freq, inlinks);
}

void write_ranked_tsv(std::ostream& out, const RankedList& list) {
  out << "rank\trepresentative\tmembers\tfrequency\tinlink_count\n";
  for (size_t i = 0; i < list.size(); ++i) {
    const auto& e = list[i];
    out << (i + 1) << '\t' << e.representative << '\t';
    for (size_t m = 0; m < e.members.size(); ++m) out << (m ? "," : "") << e.members[m];
    out << '\t' << e.frequency << '\t';
    if (e.inlink_count) out << *e.inlink_count;
    out << '\n';
  }
}

void write_ranked_tsv(const std::filesystem::path& path, const RankedList& list) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_ranked_tsv(out, list);
}

}  // namespace termforge
