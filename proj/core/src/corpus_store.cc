#include "termforge/corpus_store.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "termforge/digest.h"
#include "termforge/error.h"
#include "termforge/random.h"
#include "termforge/text.h"

namespace termforge {
namespace {

constexpr char kIndexMagic[4] = {'T', 'I', 'D', 'X'};

void put_u16(std::string& out, uint16_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>(v >> 8);
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  uint64_t get(size_t width) {
    need(width);
    uint64_t v = 0;
    for (size_t i = 0; i < width; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += width;
    return v;
  }
  std::string_view bytes(size_t n) {
    need(n);
    auto v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::kFormat, "index.bin truncated");
  }
  std::string_view data_;
  size_t pos_ = 0;
};

}  // namespace

SentenceStore::SentenceStore(std::vector<Sentence> sentences)
    : sentences_(std::move(sentences)) {
  build_index();
}

void SentenceStore::build_index() {
  tokens_.clear();
  postings_.clear();
  tokens_.reserve(sentences_.size());
  for (const auto& s : sentences_) {
    tokens_.push_back(text::match_tokens(s.text));
    std::vector<std::string> uniq = tokens_.back();
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    // Ids are visited in ascending order, so postings stay sorted.
    for (auto& t : uniq) postings_[t].push_back(s.id);
  }
}

SentenceStore SentenceStore::ingest(std::istream& source, const IngestOptions& options,
                                    IngestStats* stats) {
  if (options.sample_size == 0) {
    throw Error(ErrorCode::kEmptyStore, "sample_size is 0");
  }
  IngestStats local;
  std::vector<std::string> survivors;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(source, line)) {
    ++local.lines_read;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string norm = text::nfc(line);
    if (text::contains_line_break(norm)) {
      ++local.line_breaks;
      continue;
    }
    if (text::split_whitespace(norm).size() < options.min_tokens) {
      ++local.too_short;
      continue;
    }
    if (!seen.insert(norm).second) {
      ++local.duplicates;
      continue;
    }
    survivors.push_back(std::move(norm));
  }
  if (source.bad()) throw Error(ErrorCode::kIo, "error reading corpus source");
  local.survivors = survivors.size();
  if (stats) *stats = local;
  if (survivors.empty()) {
    throw Error(ErrorCode::kEmptyStore, "no sentence survived the ingestion filters");
  }

  Rng rng = make_rng(options.seed);
  std::vector<size_t> chosen = sample_indices(survivors.size(), options.sample_size, rng);
  std::vector<Sentence> sentences;
  sentences.reserve(chosen.size());
  for (size_t idx : chosen) {
    Sentence s;
    s.id = sentences.size();
    s.text = std::move(survivors[idx]);
    s.token_count = static_cast<uint32_t>(text::split_whitespace(s.text).size());
    sentences.push_back(std::move(s));
  }
  return SentenceStore(std::move(sentences));
}

SentenceStore SentenceStore::ingest_file(const std::filesystem::path& path,
                                         const IngestOptions& options, IngestStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + path.string());
  return ingest(in, options, stats);
}

void SentenceStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::string jsonl;
  for (const auto& s : sentences_) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["text"] = s.text;
    jsonl += j.dump();
    jsonl += '\n';
  }
  write_file_atomic(dir / "sentences.jsonl", jsonl);

  std::vector<const std::string*> keys;
  keys.reserve(postings_.size());
  for (const auto& [k, _] : postings_) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });

  std::string bin(kIndexMagic, 4);
  put_u16(bin, kIndexVersion);
  put_u64(bin, sentences_.size());
  put_u64(bin, keys.size());
  for (const auto* key : keys) {
    const auto& ids = postings_.at(*key);
    put_u32(bin, static_cast<uint32_t>(key->size()));
    bin += *key;
    put_u64(bin, ids.size());
    for (SentenceId id : ids) put_u64(bin, id);
  }
  write_file_atomic(dir / "index.bin", bin);
}

SentenceStore SentenceStore::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "sentences.jsonl", std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + (dir / "sentences.jsonl").string());
  std::vector<Sentence> sentences;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, std::string("sentences.jsonl: ") + e.what());
    }
    Sentence s;
    s.id = j.at("id").get<uint64_t>();
    s.text = j.at("text").get<std::string>();
    if (s.id != sentences.size()) {
      throw Error(ErrorCode::kFormat, "sentence ids are not dense at id " + std::to_string(s.id));
    }
    s.token_count = static_cast<uint32_t>(text::split_whitespace(s.text).size());
    sentences.push_back(std::move(s));
  }
  if (sentences.empty()) throw Error(ErrorCode::kEmptyStore, "store at " + dir.string() + " is empty");
  SentenceStore store(std::move(sentences));

  // The index is rebuilt from the text; the persisted copy is validated
  // against it so a stale or foreign index is caught.
  std::string bin = read_file(dir / "index.bin");
  ByteReader r(bin);
  if (r.bytes(4) != std::string_view(kIndexMagic, 4)) {
    throw Error(ErrorCode::kFormat, "index.bin: bad magic");
  }
  uint16_t version = static_cast<uint16_t>(r.get(2));
  if (version != kIndexVersion) {
    throw Error(ErrorCode::kFormat, "index.bin: unsupported version " + std::to_string(version));
  }
  uint64_t n_sentences = r.get(8);
  uint64_t n_keys = r.get(8);
  if (n_sentences != store.size() || n_keys != store.postings_.size()) {
    throw Error(ErrorCode::kFormat, "index.bin does not match sentences.jsonl");
  }
  for (uint64_t i = 0; i < n_keys; ++i) {
    std::string key(r.bytes(r.get(4)));
    uint64_t count = r.get(8);
    auto it = store.postings_.find(key);
    if (it == store.postings_.end() || it->second.size() != count) {
      throw Error(ErrorCode::kFormat, "index.bin postings mismatch for '" + key + "'");
    }
    for (uint64_t j = 0; j < count; ++j) {
      if (r.get(8) != it->second[j]) {
        throw Error(ErrorCode::kFormat, "index.bin postings mismatch for '" + key + "'");
      }
    }
  }
  if (!r.done()) throw Error(ErrorCode::kFormat, "index.bin has trailing bytes");
  return store;
}

const Sentence& SentenceStore::sentence(SentenceId id) const {
  if (!contains_id(id)) throw Error(ErrorCode::kInvalidArgument, "unknown sentence id " + std::to_string(id));
  return sentences_[id];
}

const std::vector<std::string>& SentenceStore::tokens(SentenceId id) const {
  if (!contains_id(id)) throw Error(ErrorCode::kInvalidArgument, "unknown sentence id " + std::to_string(id));
  return tokens_[id];
}

std::vector<SentenceId> SentenceStore::occurrences(std::string_view surface) const {
  std::vector<std::string> needle = text::match_tokens(surface);
  if (needle.empty()) return {};

  // Start from the rarest token's postings.
  const std::vector<SentenceId>* shortest = nullptr;
  for (const auto& t : needle) {
    auto it = postings_.find(t);
    if (it == postings_.end()) return {};
    if (!shortest || it->second.size() < shortest->size()) shortest = &it->second;
  }
  if (needle.size() == 1) return *shortest;

  std::vector<SentenceId> out;
  for (SentenceId id : *shortest) {
    const auto& hay = tokens_[id];
    auto hit = std::search(hay.begin(), hay.end(), needle.begin(), needle.end());
    if (hit != hay.end()) out.push_back(id);
  }
  return out;
}

size_t SentenceStore::frequency(std::string_view surface) const {
  return occurrences(surface).size();
}

ContextSet SentenceStore::sample_contexts(std::string_view surface, size_t k,
                                          uint64_t seed) const {
  std::vector<SentenceId> occ = occurrences(surface);
  if (occ.empty()) {
    throw Error(ErrorCode::kNoContext, "no sentence contains '" + std::string(surface) + "'");
  }
  Rng rng = make_rng(seed);
  ContextSet ctx;
  ctx.surface = std::string(surface);
  for (size_t idx : sample_indices(occ.size(), k, rng)) {
    ctx.ids.push_back(occ[idx]);
    ctx.texts.push_back(sentences_[occ[idx]].text);
  }
  return ctx;
}

}  // namespace termforge
