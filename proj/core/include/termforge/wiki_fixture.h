#ifndef TERMFORGE_WIKI_FIXTURE_H_
#define TERMFORGE_WIKI_FIXTURE_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "termforge/wiki_labeling.h"

namespace termforge {

struct FixturePage {
  std::string title;
  std::string text;
  std::optional<std::string> redirect;  // target title
  std::vector<std::string> links;
};

// Offline stand-in for a MediaWiki api.php. Answers the query/info,
// query/redirects, list=backlinks and parse actions with formatversion=2
// JSON, including title normalization and continuation.
class FixtureWiki {
 public:
  FixtureWiki() = default;
  explicit FixtureWiki(std::vector<FixturePage> pages);

  // DIR/pages.jsonl, one FixturePage per line.
  static FixtureWiki load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

  void add(FixturePage page);
  std::string handle(const ApiParams& params) const;

  // First letter uppercased, underscores to spaces.
  static std::string normalize_title(std::string_view title);

 private:
  std::string query(const ApiParams& params) const;
  std::string parse(const ApiParams& params) const;

  std::map<std::string, FixturePage> pages_;
  std::map<std::string, std::vector<std::string>> backlinks_;  // target -> sorted sources
};

class FixtureTransport : public WikiTransport {
 public:
  explicit FixtureTransport(std::shared_ptr<const FixtureWiki> wiki) : wiki_(std::move(wiki)) {}
  std::string get(const ApiParams& params) override { return wiki_->handle(params); }

 private:
  std::shared_ptr<const FixtureWiki> wiki_;
};

struct FixtureServerOptions {
  int fail_first = 0;          // answer this many requests with HTTP 503
  bool malformed = false;      // answer every request with invalid JSON
};

// Serves a FixtureWiki over HTTP on 127.0.0.1 at an ephemeral port.
class FixtureServer {
 public:
  explicit FixtureServer(std::shared_ptr<const FixtureWiki> wiki, FixtureServerOptions options = {});
  ~FixtureServer();
  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;

  std::string endpoint() const;
  size_t requests_served() const { return served_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<size_t> served_{0};
};

}  // namespace termforge

#endif  // TERMFORGE_WIKI_FIXTURE_H_
