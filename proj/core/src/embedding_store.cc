#include "termforge/embedding_store.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "termforge/error.h"
#include "termforge/text.h"

namespace termforge {
namespace {

constexpr char kMagic[4] = {'T', 'E', 'M', 'B'};

template <typename T>
void put_le(std::ostream& out, T v) {
  char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw Error(ErrorCode::kFormat, "embedding file truncated");
  }
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

std::string_view layer_tag(Layer layer) { return layer == Layer::kLast ? "L" : "SL"; }

std::string contextual_key(std::string_view surface, uint64_t sentence_id,
                           std::optional<Layer> layer) {
  std::string key(surface);
  key += kContextualSeparator;
  key += std::to_string(sentence_id);
  if (layer) {
    key += kLayerSeparator;
    key += layer_tag(*layer);
  }
  return key;
}

std::optional<ContextualKey> parse_contextual_key(std::string_view key) {
  auto sep = key.find(kContextualSeparator);
  if (sep == std::string_view::npos) return std::nullopt;
  ContextualKey out;
  out.surface = std::string(key.substr(0, sep));
  std::string_view rest = key.substr(sep + 1);
  auto lsep = rest.find(kLayerSeparator);
  std::string_view id = rest.substr(0, lsep);
  auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), out.sentence_id);
  if (ec != std::errc() || ptr != id.data() + id.size() || id.empty()) return std::nullopt;
  if (lsep != std::string_view::npos) {
    std::string_view tag = rest.substr(lsep + 1);
    if (tag == "L") out.layer = Layer::kLast;
    else if (tag == "SL") out.layer = Layer::kSecondLast;
    else return std::nullopt;
  }
  return out;
}

void EmbeddingTable::add(EmbeddingRecord record) {
  if (record.vector.size() != dim_) {
    throw Error(ErrorCode::kFormat, "record '" + record.key + "' has dimension " +
                                        std::to_string(record.vector.size()) + ", table has " +
                                        std::to_string(dim_));
  }
  if (record.key.size() > UINT16_MAX) throw Error(ErrorCode::kFormat, "embedding key too long");
  for (float v : record.vector) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kFormat, "non-finite component in '" + record.key + "'");
  }
  if (!index_.emplace(record.key, records_.size()).second) {
    throw Error(ErrorCode::kFormat, "duplicate embedding key '" + record.key + "'");
  }
  if (auto parsed = parse_contextual_key(record.key)) {
    by_surface_[parsed->surface].push_back(records_.size());
  }
  records_.push_back(std::move(record));
}

const std::vector<float>* EmbeddingTable::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  return it == index_.end() ? nullptr : &records_[it->second].vector;
}

std::vector<std::pair<uint64_t, const std::vector<float>*>> EmbeddingTable::contextual(
    std::string_view surface, std::optional<Layer> layer) const {
  std::vector<std::pair<uint64_t, const std::vector<float>*>> out;
  auto it = by_surface_.find(std::string(surface));
  if (it == by_surface_.end()) return out;
  for (size_t idx : it->second) {
    auto parsed = parse_contextual_key(records_[idx].key);
    if (layer && parsed->layer != layer) continue;
    out.emplace_back(parsed->sentence_id, &records_[idx].vector);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void EmbeddingTable::write(std::ostream& out) const {
  out.write(kMagic, 4);
  put_le<uint16_t>(out, kEmbeddingFormatVersion);
  put_le<uint32_t>(out, dim_);
  put_le<uint64_t>(out, records_.size());
  for (const auto& r : records_) {
    put_le<uint16_t>(out, static_cast<uint16_t>(r.key.size()));
    out.write(r.key.data(), static_cast<std::streamsize>(r.key.size()));
    for (float v : r.vector) put_le<uint32_t>(out, std::bit_cast<uint32_t>(v));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing embedding file");
}

void EmbeddingTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write(out);
}

EmbeddingTable EmbeddingTable::read(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::kFormat, "not a TEMB file");
  }
  auto version = get_le<uint16_t>(in);
  if (version != kEmbeddingFormatVersion) {
    throw Error(ErrorCode::kFormat, "unsupported TEMB version " + std::to_string(version));
  }
  EmbeddingTable table(get_le<uint32_t>(in));
  auto count = get_le<uint64_t>(in);
  for (uint64_t i = 0; i < count; ++i) {
    EmbeddingRecord r;
    r.key.resize(get_le<uint16_t>(in));
    if (!in.read(r.key.data(), static_cast<std::streamsize>(r.key.size()))) {
      throw Error(ErrorCode::kFormat, "embedding file truncated");
    }
    r.vector.resize(table.dim_);
    for (auto& v : r.vector) v = std::bit_cast<float>(get_le<uint32_t>(in));
    table.add(std::move(r));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kFormat, "trailing bytes after last embedding record");
  }
  return table;
}

EmbeddingTable EmbeddingTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read(in);
}

CandidateVector compose_static(const Candidate& candidate, const EmbeddingTable& table) {
  auto tokens = text::split_whitespace(candidate.surface);
  if (tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "empty candidate surface");
  CandidateVector out;
  out.surfaces = {candidate.surface};
  out.provenance = VectorProvenance::kStaticAvg;
  out.vector.assign(table.dim(), 0.0);
  for (const auto& t : tokens) {
    const auto* v = table.find(t);
    if (!v) {
      throw Error(ErrorCode::kMissingDependency,
                  "no static vector for '" + t + "' in '" + candidate.surface + "'");
    }
    for (size_t i = 0; i < v->size(); ++i) out.vector[i] += (*v)[i];
  }
  for (auto& x : out.vector) x /= static_cast<double>(tokens.size());
  return out;
}

CandidateVector compose_contextual(std::string_view surface,
                                   std::span<const std::vector<float>* const> records) {
  if (records.empty()) {
    throw Error(ErrorCode::kNoContext, "no contextual records for '" + std::string(surface) + "'");
  }
  CandidateVector out;
  out.surfaces = {std::string(surface)};
  out.provenance = VectorProvenance::kContextualAvg;
  out.vector.assign(records.front()->size(), 0.0);
  for (const auto* r : records) {
    if (r->size() != out.vector.size()) throw Error(ErrorCode::kFormat, "contextual dimension mismatch");
    for (size_t i = 0; i < r->size(); ++i) out.vector[i] += (*r)[i];
  }
  for (auto& x : out.vector) x /= static_cast<double>(records.size());
  return out;
}

CandidateVector merge_cluster_vectors(std::span<const CandidateVector> members) {
  if (members.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot merge zero vectors");
  CandidateVector out;
  out.provenance = VectorProvenance::kClusterAvg;
  out.vector.assign(members.front().vector.size(), 0.0);
  for (const auto& m : members) {
    if (m.vector.size() != out.vector.size()) {
      throw Error(ErrorCode::kFormat, "cannot merge vectors of different dimensions");
    }
    out.surfaces.insert(out.surfaces.end(), m.surfaces.begin(), m.surfaces.end());
    for (size_t i = 0; i < m.vector.size(); ++i) out.vector[i] += m.vector[i];
  }
  for (auto& x : out.vector) x /= static_cast<double>(members.size());
  return out;
}

ComposeResult compose_static_all(std::span<const Candidate> candidates, const EmbeddingTable& table) {
  ComposeResult result;
  for (const auto& c : candidates) {
    try {
      result.vectors.push_back(compose_static(c, table));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingDependency) throw;
      result.filtered.push_back({c.surface, e.what()});
    }
  }
  return result;
}

double squared_norm(std::span<const double> a) {
  double s = 0;
  for (double x : a) s += x * x;
  return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShape, "cosine of vectors with different sizes");
  double dot = 0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  double denom = std::sqrt(squared_norm(a)) * std::sqrt(squared_norm(b));
  if (denom == 0) throw Error(ErrorCode::kDomain, "cosine with a zero vector");
  return dot / denom;
}

}  // namespace termforge
