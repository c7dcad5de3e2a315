#ifndef TERMFORGE_WIKI_LABELING_H_
#define TERMFORGE_WIKI_LABELING_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace termforge {

// Rendered-page text that marks a disambiguation page.
inline constexpr std::string_view kDisambiguationHallmark =
    "This disambiguation page lists articles associated with";

enum class LabelStatus { kNonWt, kNawt, kAwt, kUnresolved };

std::string_view label_status_name(LabelStatus status);
LabelStatus parse_label_status(std::string_view name);

struct TermLabel {
  std::string surface;
  LabelStatus status = LabelStatus::kNonWt;
  std::optional<std::string> canonical_title;  // set iff NAWT or AWT
  std::optional<uint64_t> inlink_count;
  std::string error;  // UNRESOLVED only

  bool operator==(const TermLabel&) const = default;
};

class LabelSnapshot {
 public:
  std::string created_at;
  std::string endpoint;

  void put(TermLabel label);
  const TermLabel* find(std::string_view surface) const;
  const std::map<std::string, TermLabel, std::less<>>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  // Distinct non-empty canonical titles.
  std::set<std::string> canonical_titles() const;

  // One header line, then one TermLabel per line sorted by surface.
  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
  static LabelSnapshot read(std::istream& in);
  static LabelSnapshot read(const std::filesystem::path& path);

 private:
  std::map<std::string, TermLabel, std::less<>> entries_;
};

// Surfaces whose canonical title equals title; empty for unknown titles.
std::set<std::string> coredirect_group(std::string_view title, const LabelSnapshot& snapshot);

using ApiParams = std::map<std::string, std::string>;

// One GET against a MediaWiki-compatible api.php. Implementations throw
// Error(kRetryable) for transport failures and retryable HTTP statuses.
class WikiTransport {
 public:
  virtual ~WikiTransport() = default;
  virtual std::string get(const ApiParams& params) = 0;
};

// api.php over HTTP(S), e.g. "https://en.wikipedia.org/w/api.php".
class HttpTransport : public WikiTransport {
 public:
  explicit HttpTransport(std::string endpoint,
                         std::chrono::seconds timeout = std::chrono::seconds(30));
  ~HttpTransport() override;
  std::string get(const ApiParams& params) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Process-wide request pacing shared by concurrent clients.
class RateLimiter {
 public:
  // 0 disables limiting.
  explicit RateLimiter(double requests_per_second);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
};

struct ClientOptions {
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  size_t max_redirect_hops = 16;
  uint32_t page_limit = 500;
  std::shared_ptr<RateLimiter> rate_limiter;
};

class MediaWikiClient {
 public:
  explicit MediaWikiClient(std::shared_ptr<WikiTransport> transport, ClientOptions options = {});

  // Follows redirects hop by hop. nullopt if the title (or a redirect
  // target) does not exist. Loops and chains longer than
  // max_redirect_hops raise kProtocol.
  std::optional<std::string> resolve(std::string_view title);
  std::string page_text(std::string_view title);
  uint64_t count_backlinks(std::string_view title);
  std::vector<std::string> redirects_to(std::string_view title);

  size_t requests_made() const { return requests_; }

 private:
  std::string call(const ApiParams& params);

  std::shared_ptr<WikiTransport> transport_;
  ClientOptions options_;
  size_t requests_ = 0;
};

// Every token with its first letter uppercased.
std::string capitalize_tokens(std::string_view surface);

// Queries the lowercase then the all-capitalized form. Transport and
// protocol failures yield UNRESOLVED instead of throwing.
TermLabel label_surface(std::string_view surface, MediaWikiClient& client);

uint64_t fetch_inlinks(std::string_view title, MediaWikiClient& client);

struct LabelOptions {
  size_t concurrency = 4;
  bool fetch_inlinks = true;
  // Adds lowercase redirect titles of each resolved page as NAWT entries so
  // co-redirect groups are complete.
  bool expand_redirects = true;
  std::string created_at;  // defaults to now (UTC)
  std::string endpoint;
  ClientOptions client;
};

using TransportFactory = std::function<std::shared_ptr<WikiTransport>()>;

LabelSnapshot build_snapshot(const std::vector<std::string>& surfaces,
                             const TransportFactory& make_transport,
                             const LabelOptions& options = {});

std::string utc_timestamp_now();

}  // namespace termforge

#endif  // TERMFORGE_WIKI_LABELING_H_
