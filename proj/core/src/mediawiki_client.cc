#include <httplib.h>

#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "termforge/error.h"
#include "termforge/wiki_labeling.h"

namespace termforge {
namespace {

using nlohmann::json;

bool retryable_status(int status) { return status == 429 || status >= 500; }

json parse_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("malformed API response: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kProtocol, "API response is not an object");
  if (j.contains("error")) {
    throw Error(ErrorCode::kProtocol, "API error: " + j["error"].dump());
  }
  return j;
}

const json& require(const json& j, const char* key, const char* context) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kProtocol, std::string(context) + ": missing '" + key + "'");
  }
  return *it;
}

// Copies every continuation field back into the next request.
bool apply_continue(const json& response, ApiParams& params) {
  auto it = response.find("continue");
  if (it == response.end() || !it->is_object()) return false;
  for (const auto& [k, v] : it->items()) {
    params[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return true;
}

}  // namespace

struct HttpTransport::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string path;
};

HttpTransport::HttpTransport(std::string endpoint, std::chrono::seconds timeout)
    : impl_(std::make_unique<Impl>()) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint must be an absolute URL: " + endpoint);
  }
  auto path_start = endpoint.find('/', scheme_end + 3);
  std::string origin = endpoint.substr(0, path_start);
  impl_->path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
  impl_->client = std::make_unique<httplib::Client>(origin);
  impl_->client->set_connection_timeout(timeout);
  impl_->client->set_read_timeout(timeout);
  impl_->client->set_follow_location(true);
  impl_->client->set_default_headers({{"User-Agent", "termforge/0.1 (term extraction research)"}});
}

HttpTransport::~HttpTransport() = default;

std::string HttpTransport::get(const ApiParams& params) {
  httplib::Params query(params.begin(), params.end());
  auto res = impl_->client->Get(impl_->path, query, httplib::Headers{});
  if (!res) {
    throw Error(ErrorCode::kRetryable, "HTTP request failed: " + httplib::to_string(res.error()));
  }
  if (retryable_status(res->status)) {
    throw Error(ErrorCode::kRetryable, "HTTP status " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kProtocol, "HTTP status " + std::to_string(res->status));
  }
  return res->body;
}

RateLimiter::RateLimiter(double requests_per_second)
    : interval_(requests_per_second > 0
                    ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(1.0 / requests_per_second))
                    : std::chrono::steady_clock::duration::zero()),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (interval_ == std::chrono::steady_clock::duration::zero()) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

MediaWikiClient::MediaWikiClient(std::shared_ptr<WikiTransport> transport, ClientOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {}

std::string MediaWikiClient::call(const ApiParams& params) {
  ApiParams full = params;
  full["format"] = "json";
  full["formatversion"] = "2";
  auto delay = options_.backoff_base;
  for (int attempt = 0;; ++attempt) {
    if (options_.rate_limiter) options_.rate_limiter->acquire();
    ++requests_;
    try {
      return transport_->get(full);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRetryable || attempt >= options_.max_retries) throw;
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

std::optional<std::string> MediaWikiClient::resolve(std::string_view title) {
  std::string current(title);
  std::set<std::string> visited;
  for (size_t hop = 0;; ++hop) {
    json j = parse_response(call({{"action", "query"},
                                  {"titles", current},
                                  {"redirects", "1"},
                                  {"prop", "info"}}));
    const json& pages = require(require(j, "query", "query"), "pages", "query");
    if (!pages.is_array() || pages.empty()) {
      throw Error(ErrorCode::kProtocol, "query.pages is empty for '" + current + "'");
    }
    const json& page = pages.at(0);
    if (page.value("missing", false) || page.value("invalid", false)) return std::nullopt;
    std::string resolved = require(page, "title", "page").get<std::string>();

    auto redirects = j["query"].find("redirects");
    bool followed = redirects != j["query"].end() && redirects->is_array() && !redirects->empty();
    if (followed) {
      for (const auto& r : *redirects) visited.insert(r.value("from", ""));
    }
    if (!page.value("redirect", false)) return resolved;

    // The target is itself a redirect: keep walking.
    if (visited.count(resolved)) {
      throw Error(ErrorCode::kProtocol, "redirect cycle through '" + resolved + "'");
    }
    if (hop + 1 >= options_.max_redirect_hops) {
      throw Error(ErrorCode::kProtocol, "redirect chain from '" + std::string(title) +
                                            "' exceeds " +
                                            std::to_string(options_.max_redirect_hops) + " hops");
    }
    visited.insert(current);
    current = resolved;
  }
}

std::string MediaWikiClient::page_text(std::string_view title) {
  json j = parse_response(call({{"action", "parse"},
                                {"page", std::string(title)},
                                {"prop", "text"},
                                {"redirects", "0"}}));
  const json& text = require(require(j, "parse", "parse"), "text", "parse");
  if (text.is_string()) return text.get<std::string>();
  // formatversion=1 shape: {"*": "..."}
  if (text.is_object() && text.contains("*")) return text["*"].get<std::string>();
  throw Error(ErrorCode::kProtocol, "parse.text has unexpected type");
}

uint64_t MediaWikiClient::count_backlinks(std::string_view title) {
  ApiParams params{{"action", "query"},
                   {"list", "backlinks"},
                   {"bltitle", std::string(title)},
                   {"blnamespace", "0"},
                   {"blfilterredir", "nonredirects"},
                   {"bllimit", std::to_string(options_.page_limit)},
                   {"continue", ""}};
  uint64_t total = 0;
  for (size_t page = 0;; ++page) {
    json j = parse_response(call(params));
    const json& links = require(require(j, "query", "query"), "backlinks", "query");
    if (!links.is_array()) throw Error(ErrorCode::kProtocol, "query.backlinks is not an array");
    total += links.size();
    if (!apply_continue(j, params)) break;
    if (page > 1'000'000) throw Error(ErrorCode::kProtocol, "backlink continuation does not end");
  }
  return total;
}

std::vector<std::string> MediaWikiClient::redirects_to(std::string_view title) {
  ApiParams params{{"action", "query"},
                   {"titles", std::string(title)},
                   {"prop", "redirects"},
                   {"rdprop", "title"},
                   {"rdnamespace", "0"},
                   {"rdlimit", std::to_string(options_.page_limit)},
                   {"continue", ""}};
  std::vector<std::string> out;
  for (size_t page = 0;; ++page) {
    json j = parse_response(call(params));
    const json& pages = require(require(j, "query", "query"), "pages", "query");
    for (const auto& p : pages) {
      auto it = p.find("redirects");
      if (it == p.end()) continue;
      for (const auto& r : *it) out.push_back(require(r, "title", "redirect").get<std::string>());
    }
    if (!apply_continue(j, params)) break;
    if (page > 1'000'000) throw Error(ErrorCode::kProtocol, "redirect continuation does not end");
  }
  return out;
}

}  // namespace termforge
