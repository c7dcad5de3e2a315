#include "termforge/candidate_extraction.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "termforge/error.h"
#include "termforge/text.h"
#include "termforge/wiki_labeling.h"

namespace termforge {
namespace {

constexpr const char* kEnglishStopWords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
    "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
    "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing",
    "down", "during", "each", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
    "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most",
    "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or",
    "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should",
    "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to",
    "too", "under", "until", "up", "very", "was", "we", "were", "what", "when",
    "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you",
    "your", "yours", "yourself", "yourselves",
};

CandidateSet make_set(std::string name, std::vector<Candidate> members) {
  std::sort(members.begin(), members.end(),
            [](const Candidate& a, const Candidate& b) { return a.surface < b.surface; });
  return CandidateSet{std::move(name), std::move(members)};
}

}  // namespace

StopWords::StopWords(std::set<std::string> words) {
  for (const auto& w : words) words_.insert(text::to_lower(w));
}

StopWords StopWords::english() {
  std::set<std::string> words(std::begin(kEnglishStopWords), std::end(kEnglishStopWords));
  return StopWords(std::move(words));
}

StopWords StopWords::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open stop-word list " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = text::split_whitespace(line);
    if (tokens.empty() || tokens[0].starts_with('#')) continue;
    words.insert(tokens[0]);
  }
  return StopWords(std::move(words));
}

bool StopWords::contains(std::string_view word) const {
  return words_.find(text::to_lower(word)) != words_.end();
}

bool CandidateSet::contains(std::string_view surface) const {
  auto it = std::lower_bound(members.begin(), members.end(), surface,
                             [](const Candidate& c, std::string_view s) { return c.surface < s; });
  return it != members.end() && it->surface == surface;
}

std::vector<NpAnnotation> read_np_annotations(std::istream& in) {
  std::vector<NpAnnotation> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("sentence_id").get<uint64_t>(), j.at("np").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat,
                  "NP annotation line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<NpAnnotation> read_np_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_np_annotations(in);
}

std::string normalize_np(std::string_view np, const StopWords& stopwords) {
  std::vector<std::string> tokens;
  for (const auto& raw : text::split_whitespace(text::nfc(np))) {
    std::string t = text::trim_punctuation(text::to_lower(raw));
    if (!t.empty()) tokens.push_back(std::move(t));
  }
  size_t first = 0;
  while (first < tokens.size() && stopwords.contains(tokens[first])) ++first;
  tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(first));
  return text::join(tokens, " ");
}

ExtractionResult extract_candidates(const SentenceStore& store,
                                    const std::vector<NpAnnotation>& annotations,
                                    const StopWords& stopwords) {
  ExtractionResult result;
  std::map<std::string, uint32_t> surfaces;
  for (size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    if (!store.contains_id(a.sentence_id)) {
      result.rejected.push_back({i, "unknown sentence id " + std::to_string(a.sentence_id)});
      continue;
    }
    std::string surface = normalize_np(a.np, stopwords);
    if (surface.empty()) {
      ++result.discarded_stopword_only;
      continue;
    }
    auto n = static_cast<uint32_t>(text::split_whitespace(surface).size());
    if (n > 3) {
      ++result.discarded_length;
      continue;
    }
    ++result.accepted_nps;
    surfaces.emplace(std::move(surface), n);
  }
  for (auto& [surface, n] : surfaces) {
    uint64_t freq = store.frequency(surface);
    if (freq == 0) {
      // The NP text never appears as contiguous tokens in the corpus
      // (tokenizer disagreement); it cannot be scored.
      result.rejected.push_back({annotations.size(), "no occurrence of '" + surface + "'"});
      continue;
    }
    result.candidates.push_back({surface, n, freq});
  }
  return result;
}

LnnpSets apply_thresholds(const std::vector<Candidate>& candidates,
                          const Thresholds& thresholds) {
  std::vector<Candidate> by_n[3];
  for (const auto& c : candidates) {
    if (c.n < 1 || c.n > 3) continue;
    uint64_t min = c.n == 1 ? thresholds.unigram : c.n == 2 ? thresholds.bigram : thresholds.trigram;
    if (c.sentence_freq >= min) by_n[c.n - 1].push_back(c);
  }
  std::vector<Candidate> union23 = by_n[1];
  union23.insert(union23.end(), by_n[2].begin(), by_n[2].end());
  LnnpSets sets;
  sets.lnnp1 = make_set("LNNP_1", std::move(by_n[0]));
  sets.lnnp2 = make_set("LNNP_2", std::move(by_n[1]));
  sets.lnnp3 = make_set("LNNP_3", std::move(by_n[2]));
  sets.lnnp23 = make_set("LNNP_23", std::move(union23));
  return sets;
}

std::vector<NpSpan> fallback_chunker(std::string_view sentence, const StopWords& stopwords) {
  std::vector<NpSpan> spans;
  std::vector<std::string> words;
  size_t run_start = 0;
  auto flush = [&](size_t end_token) {
    if (!words.empty()) {
      spans.push_back({text::join(words, " "), run_start, end_token - run_start});
      words.clear();
    }
  };
  auto raw = text::split_whitespace(sentence);
  for (size_t i = 0; i < raw.size(); ++i) {
    const std::string& tok = raw[i];
    if (text::is_punctuation_only(tok)) {
      flush(i);
      continue;
    }
    std::string core = text::trim_punctuation(tok);
    bool leading = !tok.starts_with(core);
    bool trailing = !tok.ends_with(core);
    if (leading) flush(i);
    if (stopwords.contains(core)) {
      flush(i);
      continue;
    }
    if (words.empty()) run_start = i;
    words.push_back(core);
    if (trailing) flush(i + 1);
  }
  flush(raw.size());
  return spans;
}

std::vector<NpAnnotation> chunk_store(const SentenceStore& store, const StopWords& stopwords) {
  std::vector<NpAnnotation> out;
  for (const auto& s : store.sentences()) {
    for (auto& span : fallback_chunker(s.text, stopwords)) {
      out.push_back({s.id, std::move(span.text)});
    }
  }
  return out;
}

AugmentResult build_augmented_set(const CandidateSet& base, const LabelSnapshot& labels,
                                  const SentenceStore& store, uint64_t min_freq) {
  std::string suffix = base.name.substr(base.name.find('_') == std::string::npos
                                            ? base.name.size()
                                            : base.name.find('_'));
  AugmentResult result;
  std::vector<Candidate> star;
  for (const auto& c : base.members) {
    const TermLabel* label = labels.find(c.surface);
    if (!label || label->status == LabelStatus::kUnresolved) {
      result.missing_labels.push_back(c.surface);
      continue;
    }
    if (label->status == LabelStatus::kNawt && c.sentence_freq >= min_freq) star.push_back(c);
  }

  std::map<std::string, Candidate> aug;
  for (const auto& c : star) aug.emplace(c.surface, c);
  for (const auto& c : star) {
    const TermLabel* label = labels.find(c.surface);
    for (const auto& surface : coredirect_group(*label->canonical_title, labels)) {
      if (aug.count(surface)) continue;
      uint64_t freq = store.frequency(surface);
      if (freq < min_freq) continue;
      auto n = static_cast<uint32_t>(text::split_whitespace(surface).size());
      aug.emplace(surface, Candidate{surface, n, freq});
    }
  }
  std::vector<Candidate> aug_members;
  for (auto& [_, c] : aug) aug_members.push_back(std::move(c));

  result.star = make_set("LNNP*" + suffix, std::move(star));
  result.augmented = make_set("LNNP^aug" + suffix, std::move(aug_members));
  return result;
}

void write_candidates(std::ostream& out, const std::vector<Candidate>& candidates) {
  for (const auto& c : candidates) {
    nlohmann::ordered_json j;
    j["surface"] = c.surface;
    j["n"] = c.n;
    j["sentence_freq"] = c.sentence_freq;
    out << j.dump() << '\n';
  }
}

void write_candidates(const std::filesystem::path& path, const std::vector<Candidate>& candidates) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_candidates(out, candidates);
}

std::vector<Candidate> read_candidates(std::istream& in) {
  std::vector<Candidate> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("surface").get<std::string>(), j.at("n").get<uint32_t>(),
                     j.at("sentence_freq").get<uint64_t>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, std::string("candidate record: ") + e.what());
    }
  }
  return out;
}

std::vector<Candidate> read_candidates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_candidates(in);
}

}  // namespace termforge
