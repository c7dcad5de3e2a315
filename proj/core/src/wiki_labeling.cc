#include "termforge/wiki_labeling.h"

#include <atomic>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "termforge/error.h"
#include "termforge/text.h"

namespace termforge {
namespace {

using nlohmann::json;

constexpr const char* kSnapshotFormat = "termforge-labels";
constexpr int kSnapshotVersion = 1;

}  // namespace

std::string_view label_status_name(LabelStatus status) {
  switch (status) {
    case LabelStatus::kNonWt: return "NON_WT";
    case LabelStatus::kNawt: return "NAWT";
    case LabelStatus::kAwt: return "AWT";
    case LabelStatus::kUnresolved: return "UNRESOLVED";
  }
  return "UNRESOLVED";
}

LabelStatus parse_label_status(std::string_view name) {
  if (name == "NON_WT") return LabelStatus::kNonWt;
  if (name == "NAWT") return LabelStatus::kNawt;
  if (name == "AWT") return LabelStatus::kAwt;
  if (name == "UNRESOLVED") return LabelStatus::kUnresolved;
  throw Error(ErrorCode::kFormat, "unknown label status '" + std::string(name) + "'");
}

void LabelSnapshot::put(TermLabel label) {
  std::string key = label.surface;
  entries_.insert_or_assign(std::move(key), std::move(label));
}

const TermLabel* LabelSnapshot::find(std::string_view surface) const {
  auto it = entries_.find(surface);
  return it == entries_.end() ? nullptr : &it->second;
}

std::set<std::string> LabelSnapshot::canonical_titles() const {
  std::set<std::string> titles;
  for (const auto& [_, l] : entries_) {
    if (l.canonical_title && !l.canonical_title->empty()) titles.insert(*l.canonical_title);
  }
  return titles;
}

void LabelSnapshot::write(std::ostream& out) const {
  nlohmann::ordered_json header;
  header["format"] = kSnapshotFormat;
  header["version"] = kSnapshotVersion;
  header["created_at"] = created_at;
  header["endpoint"] = endpoint;
  out << header.dump() << '\n';
  for (const auto& [_, l] : entries_) {
    nlohmann::ordered_json j;
    j["surface"] = l.surface;
    j["status"] = label_status_name(l.status);
    if (l.canonical_title) j["canonical_title"] = *l.canonical_title;
    if (l.inlink_count) j["inlink_count"] = *l.inlink_count;
    if (!l.error.empty()) j["error"] = l.error;
    out << j.dump() << '\n';
  }
}

void LabelSnapshot::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write(out);
}

LabelSnapshot LabelSnapshot::read(std::istream& in) {
  LabelSnapshot snap;
  std::string line;
  bool header = true;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      if (header) {
        if (j.value("format", "") != kSnapshotFormat) {
          throw Error(ErrorCode::kFormat, "snapshot header missing or wrong format");
        }
        if (j.value("version", 0) != kSnapshotVersion) {
          throw Error(ErrorCode::kFormat, "unsupported snapshot version");
        }
        snap.created_at = j.value("created_at", "");
        snap.endpoint = j.value("endpoint", "");
        header = false;
        continue;
      }
      TermLabel l;
      l.surface = j.at("surface").get<std::string>();
      l.status = parse_label_status(j.at("status").get<std::string>());
      if (j.contains("canonical_title")) l.canonical_title = j["canonical_title"].get<std::string>();
      if (j.contains("inlink_count")) l.inlink_count = j["inlink_count"].get<uint64_t>();
      l.error = j.value("error", "");
      bool resolved = l.status == LabelStatus::kNawt || l.status == LabelStatus::kAwt;
      if (resolved != l.canonical_title.has_value()) {
        throw Error(ErrorCode::kFormat, "canonical_title must be present iff status is NAWT/AWT ('" +
                                            l.surface + "')");
      }
      snap.put(std::move(l));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, "snapshot line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (header) throw Error(ErrorCode::kFormat, "snapshot is empty");
  return snap;
}

LabelSnapshot LabelSnapshot::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open snapshot " + path.string());
  return read(in);
}

std::set<std::string> coredirect_group(std::string_view title, const LabelSnapshot& snapshot) {
  std::set<std::string> group;
  if (title.empty()) return group;
  for (const auto& [surface, l] : snapshot.entries()) {
    if (l.canonical_title && *l.canonical_title == title) group.insert(surface);
  }
  return group;
}

std::string capitalize_tokens(std::string_view surface) {
  std::vector<std::string> tokens = text::split_whitespace(surface);
  for (auto& t : tokens) t = text::upper_first(t);
  return text::join(tokens, " ");
}

TermLabel label_surface(std::string_view surface, MediaWikiClient& client) {
  TermLabel label;
  label.surface = std::string(surface);
  try {
    std::string lower = text::to_lower(surface);
    std::optional<std::string> canonical = client.resolve(lower);
    if (!canonical) {
      std::string capitalized = capitalize_tokens(lower);
      if (capitalized != lower) canonical = client.resolve(capitalized);
    }
    if (!canonical) {
      label.status = LabelStatus::kNonWt;
      return label;
    }
    std::string body = client.page_text(*canonical);
    label.status = body.find(kDisambiguationHallmark) != std::string::npos ? LabelStatus::kAwt
                                                                           : LabelStatus::kNawt;
    label.canonical_title = std::move(canonical);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRetryable && e.code() != ErrorCode::kProtocol) throw;
    label.status = LabelStatus::kUnresolved;
    label.canonical_title.reset();
    label.error = e.what();
  }
  return label;
}

uint64_t fetch_inlinks(std::string_view title, MediaWikiClient& client) {
  return client.count_backlinks(title);
}

std::string utc_timestamp_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

LabelSnapshot build_snapshot(const std::vector<std::string>& surfaces,
                             const TransportFactory& make_transport,
                             const LabelOptions& options) {
  ClientOptions client_opts = options.client;
  if (!client_opts.rate_limiter) client_opts.rate_limiter = std::make_shared<RateLimiter>(10.0);

  std::vector<TermLabel> labels(surfaces.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    MediaWikiClient client(make_transport(), client_opts);
    for (size_t i = next.fetch_add(1); i < surfaces.size(); i = next.fetch_add(1)) {
      labels[i] = label_surface(surfaces[i], client);
    }
  };
  size_t n_workers = std::max<size_t>(1, std::min(options.concurrency, surfaces.size()));
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      try {
        worker();
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  LabelSnapshot snap;
  snap.created_at = options.created_at.empty() ? utc_timestamp_now() : options.created_at;
  snap.endpoint = options.endpoint;
  for (auto& l : labels) snap.put(std::move(l));

  // Title-level lookups run sequentially; their count is bounded by the
  // number of distinct pages, not surfaces.
  MediaWikiClient client(make_transport(), client_opts);
  std::map<std::string, std::optional<uint64_t>> inlinks;
  for (const auto& title : snap.canonical_titles()) {
    if (options.expand_redirects) {
      // A redirect shares its target's page, hence its status.
      LabelStatus status = snap.find(*coredirect_group(title, snap).begin())->status;
      try {
        for (const auto& r : client.redirects_to(title)) {
          std::string surface = text::to_lower(r);
          if (snap.find(surface)) continue;
          TermLabel l;
          l.surface = surface;
          l.canonical_title = title;
          l.status = status;
          snap.put(std::move(l));
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kRetryable && e.code() != ErrorCode::kProtocol) throw;
        // Group stays as labeled; members are still individually valid.
      }
    }
    if (options.fetch_inlinks) {
      try {
        inlinks[title] = fetch_inlinks(title, client);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kRetryable && e.code() != ErrorCode::kProtocol) throw;
        inlinks[title] = std::nullopt;
      }
    }
  }
  if (options.fetch_inlinks) {
    std::vector<TermLabel> updated;
    for (const auto& [_, l] : snap.entries()) {
      if (!l.canonical_title) continue;
      auto it = inlinks.find(*l.canonical_title);
      if (it != inlinks.end() && it->second) {
        TermLabel copy = l;
        copy.inlink_count = *it->second;
        updated.push_back(std::move(copy));
      }
    }
    for (auto& l : updated) snap.put(std::move(l));
  }
  return snap;
}

}  // namespace termforge
