#include "termforge/wiki_labeling.h"

#include <gtest/gtest.h>

#include <sstream>

#include "termforge/error.h"
#include "termforge/wiki_fixture.h"

namespace termforge {
namespace {

std::shared_ptr<FixtureWiki> sample_wiki() {
  auto w = std::make_shared<FixtureWiki>();
  w->add({"Mercury", std::string(kDisambiguationHallmark) + " Mercury.", std::nullopt, {}});
  w->add({"Common stock", "Article about common stock.", std::nullopt, {}});
  w->add({"Equity (finance)", "", std::string("Common stock"), {}});
  w->add({"Ordinary share", "", std::string("Common stock"), {}});
  w->add({"Volcano", "Article.", std::nullopt, {}});
  for (int i = 0; i < 3; ++i) {
    w->add({"Linker " + std::to_string(i), "x", std::nullopt, {"Volcano"}});
  }
  return w;
}

MediaWikiClient client_for(std::shared_ptr<const FixtureWiki> w) {
  return MediaWikiClient(std::make_shared<FixtureTransport>(std::move(w)));
}

TEST(Labeling, HallmarkMeansAmbiguous) {
  auto c = client_for(sample_wiki());
  auto l = label_surface("mercury", c);
  EXPECT_EQ(l.status, LabelStatus::kAwt);
  EXPECT_EQ(l.canonical_title, "Mercury");
}

TEST(Labeling, RedirectResolvesToCanonicalArticle) {
  auto c = client_for(sample_wiki());
  auto l = label_surface("ordinary share", c);
  EXPECT_EQ(l.status, LabelStatus::kNawt);
  EXPECT_EQ(l.canonical_title, "Common stock");
}

TEST(Labeling, MissingPageIsNotAWikiTerm) {
  auto c = client_for(sample_wiki());
  auto l = label_surface("blue banana", c);
  EXPECT_EQ(l.status, LabelStatus::kNonWt);
  EXPECT_FALSE(l.canonical_title.has_value());
}

TEST(Labeling, CapitalizedFallback) {
  auto w = std::make_shared<FixtureWiki>();
  w->add({"New York City", "Article.", std::nullopt, {}});
  auto c = client_for(w);
  auto l = label_surface("new york city", c);
  EXPECT_EQ(l.status, LabelStatus::kNawt);
  EXPECT_EQ(l.canonical_title, "New York City");
  EXPECT_EQ(capitalize_tokens("new york city"), "New York City");
}

TEST(Labeling, StatusNamesRoundTrip) {
  for (auto s : {LabelStatus::kNonWt, LabelStatus::kNawt, LabelStatus::kAwt, LabelStatus::kUnresolved}) {
    EXPECT_EQ(parse_label_status(label_status_name(s)), s);
  }
  EXPECT_THROW(parse_label_status("maybe"), Error);
}

TEST(CoRedirect, GroupsByCanonicalTitle) {
  LabelSnapshot snap;
  snap.put({"equity", LabelStatus::kNawt, "Common stock", std::nullopt, ""});
  snap.put({"common stock", LabelStatus::kNawt, "Common stock", std::nullopt, ""});
  snap.put({"ordinary share", LabelStatus::kNawt, "Common stock", std::nullopt, ""});
  snap.put({"volcano", LabelStatus::kNawt, "Volcano", std::nullopt, ""});
  snap.put({"zebra mussel", LabelStatus::kNonWt, std::nullopt, std::nullopt, ""});
  EXPECT_EQ(coredirect_group("Common stock", snap),
            (std::set<std::string>{"common stock", "equity", "ordinary share"}));
  EXPECT_EQ(coredirect_group("Volcano", snap), (std::set<std::string>{"volcano"}));
  EXPECT_TRUE(coredirect_group("Unknown", snap).empty());
  EXPECT_EQ(snap.canonical_titles(), (std::set<std::string>{"Common stock", "Volcano"}));
}

TEST(Backlinks, Counts) {
  auto c = client_for(sample_wiki());
  EXPECT_EQ(fetch_inlinks("Volcano", c), 3u);
  EXPECT_EQ(fetch_inlinks("Mercury", c), 0u);
}

TEST(Backlinks, ContinuationAcrossPages) {
  auto w = std::make_shared<FixtureWiki>();
  w->add({"Hub", "Article.", std::nullopt, {}});
  for (int i = 0; i < 1000; ++i) w->add({"Src " + std::to_string(i), "x", std::nullopt, {"Hub"}});
  auto transport = std::make_shared<FixtureTransport>(w);
  MediaWikiClient c(transport);
  EXPECT_EQ(c.count_backlinks("Hub"), 1000u);
  EXPECT_EQ(c.requests_made(), 2u);
}

TEST(Redirects, LongChainIsAProtocolError) {
  auto w = std::make_shared<FixtureWiki>();
  for (int i = 0; i < 17; ++i) {
    w->add({"Hop " + std::to_string(i), "", "Hop " + std::to_string(i + 1), {}});
  }
  w->add({"Hop 17", "End.", std::nullopt, {}});
  auto c = client_for(w);
  try {
    c.resolve("Hop 0");
    FAIL() << "expected kProtocol";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocol);
  }
  // label_surface turns it into UNRESOLVED.
  auto l = label_surface("hop 0", c);
  EXPECT_EQ(l.status, LabelStatus::kUnresolved);
  EXPECT_FALSE(l.error.empty());
}

TEST(Redirects, LoopIsAProtocolError) {
  auto w = std::make_shared<FixtureWiki>();
  w->add({"A", "", std::string("B"), {}});
  w->add({"B", "", std::string("A"), {}});
  auto c = client_for(w);
  EXPECT_THROW(c.resolve("A"), Error);
}

TEST(Snapshot, RoundTripIsExact) {
  LabelSnapshot snap;
  snap.created_at = "2024-06-11T00:00:00Z";
  snap.endpoint = "fixture";
  snap.put({"mercury", LabelStatus::kAwt, "Mercury", 2, ""});
  snap.put({"blue banana", LabelStatus::kNonWt, std::nullopt, std::nullopt, ""});
  snap.put({"x", LabelStatus::kUnresolved, std::nullopt, std::nullopt, "timeout"});
  std::stringstream a;
  snap.write(a);
  auto back = LabelSnapshot::read(a);
  EXPECT_EQ(back.created_at, snap.created_at);
  EXPECT_EQ(back.endpoint, snap.endpoint);
  EXPECT_EQ(back.entries(), snap.entries());
  std::stringstream b;
  back.write(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Snapshot, BuildExpandsRedirectsAndAttachesInlinks) {
  auto w = sample_wiki();
  LabelOptions opts;
  opts.created_at = "1970-01-01T00:00:00Z";
  opts.endpoint = "fixture";
  opts.concurrency = 3;
  opts.client.rate_limiter = std::make_shared<RateLimiter>(0);
  auto snap = build_snapshot({"common stock", "mercury", "volcano", "blue banana"},
                             [w] { return std::make_shared<FixtureTransport>(w); }, opts);
  ASSERT_NE(snap.find("equity (finance)"), nullptr);
  EXPECT_EQ(snap.find("equity (finance)")->canonical_title, "Common stock");
  EXPECT_EQ(snap.find("volcano")->inlink_count, 3u);
  EXPECT_EQ(snap.find("blue banana")->status, LabelStatus::kNonWt);
  EXPECT_EQ(coredirect_group("Common stock", snap).size(), 3u);
  // Concurrency does not change the result.
  opts.concurrency = 1;
  auto serial = build_snapshot({"common stock", "mercury", "volcano", "blue banana"},
                               [w] { return std::make_shared<FixtureTransport>(w); }, opts);
  EXPECT_EQ(serial.entries(), snap.entries());
}

TEST(FixtureServer, HttpPathRetriesTransientFailures) {
  auto w = sample_wiki();
  FixtureServerOptions so;
  so.fail_first = 2;
  FixtureServer server(w, so);
  ClientOptions co;
  co.backoff_base = std::chrono::milliseconds(1);
  MediaWikiClient c(std::make_shared<HttpTransport>(server.endpoint(), std::chrono::seconds(5)), co);
  auto l = label_surface("ordinary share", c);
  EXPECT_EQ(l.status, LabelStatus::kNawt);
  EXPECT_EQ(l.canonical_title, "Common stock");
  EXPECT_GE(server.requests_served(), 3u);
}

TEST(FixtureServer, MalformedResponsesGiveUnresolved) {
  auto w = sample_wiki();
  FixtureServerOptions so;
  so.malformed = true;
  FixtureServer server(w, so);
  ClientOptions co;
  co.backoff_base = std::chrono::milliseconds(1);
  MediaWikiClient c(std::make_shared<HttpTransport>(server.endpoint(), std::chrono::seconds(5)), co);
  auto l = label_surface("mercury", c);
  EXPECT_EQ(l.status, LabelStatus::kUnresolved);
}

TEST(FixtureServer, PersistentFailureGivesUnresolved) {
  auto w = sample_wiki();
  FixtureServerOptions so;
  so.fail_first = 100;
  FixtureServer server(w, so);
  ClientOptions co;
  co.backoff_base = std::chrono::milliseconds(1);
  co.max_retries = 2;
  MediaWikiClient c(std::make_shared<HttpTransport>(server.endpoint(), std::chrono::seconds(5)), co);
  auto l = label_surface("mercury", c);
  EXPECT_EQ(l.status, LabelStatus::kUnresolved);
}

}  // namespace
}  // namespace termforge
