#include "termforge/wiki_fixture.h"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "termforge/error.h"
#include "termforge/text.h"

namespace termforge {
namespace {

using nlohmann::json;

std::string param(const ApiParams& params, const std::string& key, std::string fallback = "") {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string api_error(const std::string& code, const std::string& info) {
  return json{{"error", {{"code", code}, {"info", info}}}}.dump();
}

}  // namespace

FixtureWiki::FixtureWiki(std::vector<FixturePage> pages) {
  for (auto& p : pages) add(std::move(p));
}

void FixtureWiki::add(FixturePage page) {
  page.title = normalize_title(page.title);
  if (page.redirect) page.redirect = normalize_title(*page.redirect);
  for (auto& l : page.links) l = normalize_title(l);
  auto old = pages_.find(page.title);
  if (old != pages_.end()) {
    for (const auto& l : old->second.links) {
      auto& v = backlinks_[l];
      v.erase(std::remove(v.begin(), v.end(), page.title), v.end());
    }
  }
  for (const auto& l : page.links) {
    auto& v = backlinks_[l];
    v.insert(std::upper_bound(v.begin(), v.end(), page.title), page.title);
  }
  pages_[page.title] = std::move(page);
}

std::string FixtureWiki::normalize_title(std::string_view title) {
  std::string t(title);
  std::replace(t.begin(), t.end(), '_', ' ');
  auto words = text::split_whitespace(t);
  t = text::join(words, " ");
  if (t.empty()) return t;
  // Only the first code point is case-folded to upper, like MediaWiki's
  // default $wgCapitalLinks.
  return text::upper_first(t);
}

std::string FixtureWiki::handle(const ApiParams& params) const {
  std::string action = param(params, "action");
  if (action == "query") return query(params);
  if (action == "parse") return parse(params);
  return api_error("badvalue", "Unrecognized value for parameter \"action\": " + action);
}

std::string FixtureWiki::query(const ApiParams& params) const {
  json out{{"batchcomplete", true}};
  json q = json::object();

  if (param(params, "list") == "backlinks") {
    std::string target = normalize_title(param(params, "bltitle"));
    size_t limit = std::stoul(param(params, "bllimit", "10"));
    size_t offset = 0;
    std::string cont = param(params, "blcontinue");
    if (!cont.empty()) offset = std::stoul(cont.substr(cont.find('|') + 1));
    json links = json::array();
    auto it = backlinks_.find(target);
    std::vector<std::string> sources;
    if (it != backlinks_.end()) {
      for (const auto& s : it->second) {
        auto page = pages_.find(s);
        bool is_redirect = page != pages_.end() && page->second.redirect.has_value();
        if (param(params, "blfilterredir") == "nonredirects" && is_redirect) continue;
        sources.push_back(s);
      }
    }
    for (size_t i = offset; i < sources.size() && i < offset + limit; ++i) {
      links.push_back({{"ns", 0}, {"title", sources[i]}});
    }
    if (offset + limit < sources.size()) {
      out["continue"] = {{"blcontinue", "0|" + std::to_string(offset + limit)}, {"continue", "-||"}};
      out.erase("batchcomplete");
    }
    q["backlinks"] = std::move(links);
    out["query"] = std::move(q);
    return out.dump();
  }

  std::string raw = param(params, "titles");
  if (raw.empty()) return api_error("missingparam", "titles is required");
  std::string title = normalize_title(raw);
  if (title != raw) q["normalized"] = json::array({{{"from", raw}, {"to", title}}});

  std::string prop = param(params, "prop");
  if (param(params, "redirects") == "1") {
    auto p = pages_.find(title);
    if (p != pages_.end() && p->second.redirect) {
      // One hop per request, as for double redirects on a live wiki.
      q["redirects"] = json::array({{{"from", title}, {"to", *p->second.redirect}}});
      title = *p->second.redirect;
    }
  }

  json page{{"ns", 0}, {"title", title}};
  auto p = pages_.find(title);
  if (p == pages_.end()) {
    page["missing"] = true;
  } else {
    page["pageid"] = static_cast<int64_t>(std::distance(pages_.begin(), p)) + 1;
    if (prop.find("info") != std::string::npos && p->second.redirect) page["redirect"] = true;
    if (prop.find("redirects") != std::string::npos) {
      std::vector<std::string> sources;
      for (const auto& [t, pg] : pages_) {
        if (pg.redirect && *pg.redirect == title) sources.push_back(t);
      }
      size_t limit = std::stoul(param(params, "rdlimit", "10"));
      size_t offset = 0;
      std::string cont = param(params, "rdcontinue");
      if (!cont.empty()) offset = std::stoul(cont);
      json rd = json::array();
      for (size_t i = offset; i < sources.size() && i < offset + limit; ++i) {
        rd.push_back({{"ns", 0}, {"title", sources[i]}});
      }
      if (!rd.empty()) page["redirects"] = std::move(rd);
      if (offset + limit < sources.size()) {
        out["continue"] = {{"rdcontinue", std::to_string(offset + limit)}, {"continue", "||"}};
        out.erase("batchcomplete");
      }
    }
  }
  q["pages"] = json::array({std::move(page)});
  out["query"] = std::move(q);
  return out.dump();
}

std::string FixtureWiki::parse(const ApiParams& params) const {
  std::string title = normalize_title(param(params, "page"));
  auto p = pages_.find(title);
  if (p == pages_.end()) {
    return api_error("missingtitle", "The page you specified doesn't exist.");
  }
  std::string html = "<div class=\"mw-parser-output\">";
  if (p->second.redirect) {
    html += "<div class=\"redirectMsg\"><p>Redirect to:</p><ul class=\"redirectText\"><li>" +
            *p->second.redirect + "</li></ul></div>";
  } else {
    html += "<p>" + p->second.text + "</p>";
  }
  html += "</div>";
  return json{{"parse", {{"title", title}, {"pageid", 1}, {"text", html}}}}.dump();
}

FixtureWiki FixtureWiki::load(const std::filesystem::path& dir) {
  auto path = dir / "pages.jsonl";
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open fixture " + path.string());
  FixtureWiki wiki;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      FixturePage p;
      p.title = j.at("title").get<std::string>();
      p.text = j.value("text", "");
      if (j.contains("redirect") && !j["redirect"].is_null()) p.redirect = j["redirect"].get<std::string>();
      p.links = j.value("links", std::vector<std::string>{});
      wiki.add(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
    }
  }
  return wiki;
}

void FixtureWiki::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "pages.jsonl", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "pages.jsonl").string());
  for (const auto& [_, p] : pages_) {
    nlohmann::ordered_json j;
    j["title"] = p.title;
    if (p.redirect) j["redirect"] = *p.redirect;
    else j["text"] = p.text;
    if (!p.links.empty()) j["links"] = p.links;
    out << j.dump() << '\n';
  }
}

struct FixtureServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

FixtureServer::FixtureServer(std::shared_ptr<const FixtureWiki> wiki, FixtureServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  auto remaining_failures = std::make_shared<std::atomic<int>>(options.fail_first);
  impl_->server.Get("/w/api.php", [this, wiki, options, remaining_failures](
                                      const httplib::Request& req, httplib::Response& res) {
    served_.fetch_add(1);
    if (remaining_failures->fetch_sub(1) > 0) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    if (options.malformed) {
      res.set_content("{\"query\": [unterminated", "application/json");
      return;
    }
    ApiParams params;
    for (const auto& [k, v] : req.params) params[k] = v;
    res.set_content(wiki->handle(params), "application/json");
  });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw Error(ErrorCode::kIo, "fixture server could not bind");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

FixtureServer::~FixtureServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string FixtureServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/w/api.php";
}

}  // namespace termforge
