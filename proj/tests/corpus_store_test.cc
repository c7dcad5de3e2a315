#include "termforge/corpus_store.h"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "oracles.h"
#include "termforge/digest.h"
#include "termforge/error.h"
#include "termforge/random.h"
#include "test_support.h"

namespace termforge {
namespace {

using testing_support::padded;
using testing_support::TempDir;

SentenceStore from_lines(const std::vector<std::string>& lines, uint64_t seed = 0, size_t sample = 1000) {
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  std::istringstream in(joined);
  IngestOptions opts;
  opts.sample_size = sample;
  opts.seed = seed;
  return SentenceStore::ingest(in, opts);
}

TEST(CorpusStore, FiveLineFixtureKeepsThree) {
  const std::string a = "one two three four five six seven eight nine ten";
  const std::string b = "alpha beta gamma delta epsilon zeta eta theta iota kappa";
  const std::string c = "red orange yellow green blue indigo violet black white grey";
  IngestStats stats;
  std::istringstream in(a + "\nonly three tokens\n" + b + "\n" + a + "\n" + c + "\n");
  auto store = SentenceStore::ingest(in, IngestOptions{}, &stats);
  ASSERT_EQ(store.size(), 3u);
  EXPECT_EQ(store.sentence(0).text, a);
  EXPECT_EQ(store.sentence(1).text, b);
  EXPECT_EQ(store.sentence(2).text, c);
  EXPECT_EQ(stats.too_short, 1u);
  EXPECT_EQ(stats.duplicates, 1u);
  for (const auto& s : store.sentences()) EXPECT_GE(s.token_count, 10u);
}

TEST(CorpusStore, SampleSizeZeroIsEmptyStore) {
  std::istringstream in(padded("x") + "\n");
  IngestOptions opts;
  opts.sample_size = 0;
  try {
    SentenceStore::ingest(in, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyStore);
  }
}

TEST(CorpusStore, NoSurvivorsIsEmptyStore) {
  std::istringstream in("short\nalso short\n");
  EXPECT_THROW(SentenceStore::ingest(in, IngestOptions{}), Error);
}

TEST(CorpusStore, UnreadableSourceIsIoError) {
  try {
    SentenceStore::ingest_file("/nonexistent/corpus.txt", IngestOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(CorpusStore, EmbeddedLineBreakIsFiltered) {
  // A vertical tab is a line break inside a single source line.
  auto store = from_lines({padded("has a \v break"), padded("clean sentence")});
  ASSERT_EQ(store.size(), 1u);
  EXPECT_EQ(store.sentence(0).text.rfind("clean", 0), 0u);
}

TEST(CorpusStore, DuplicatesComparedAfterNfc) {
  auto store = from_lines({padded("caf\xC3\xA9 open"), padded("cafe\xCC\x81 open")});
  EXPECT_EQ(store.size(), 1u);
}

TEST(CorpusStore, OccurrencesContiguousOnly) {
  auto store = from_lines({padded("the dog ran home"), padded("cats sleep all day"), padded("a hot dog stand"),
                           padded("a hot spicy dog")});
  EXPECT_EQ(store.occurrences("dog"), (std::vector<SentenceId>{0, 2, 3}));
  EXPECT_EQ(store.occurrences("hot dog"), (std::vector<SentenceId>{2}));
  EXPECT_TRUE(store.occurrences("giraffe").empty());
  EXPECT_TRUE(store.occurrences("").empty());
  EXPECT_EQ(store.frequency("cats sleep"), 1u);
}

TEST(CorpusStore, OccurrencesMatchNaiveScan) {
  // 1000 sentences over a 30-word vocabulary; 100 random 1-3 grams.
  Rng rng = make_rng(77);
  std::vector<std::string> vocab;
  for (int i = 0; i < 30; ++i) vocab.push_back("w" + std::to_string(i));
  std::vector<std::string> lines;
  for (int s = 0; s < 1000; ++s) {
    std::string line;
    size_t len = 10 + uniform_below(rng, 6);
    for (size_t t = 0; t < len; ++t) line += (t ? " " : "") + vocab[uniform_below(rng, vocab.size())];
    lines.push_back(line + " s" + std::to_string(s));
  }
  auto store = from_lines(lines);
  ASSERT_EQ(store.size(), 1000u);
  std::vector<std::vector<std::string>> tokenized;
  for (const auto& s : store.sentences()) tokenized.push_back(oracle::split_ws(s.text));
  for (int q = 0; q < 100; ++q) {
    size_t n = 1 + uniform_below(rng, 3);
    std::vector<std::string> gram;
    std::string surface;
    for (size_t i = 0; i < n; ++i) {
      gram.push_back(vocab[uniform_below(rng, vocab.size())]);
      surface += (i ? " " : "") + gram.back();
    }
    std::vector<SentenceId> expected;
    for (size_t id = 0; id < tokenized.size(); ++id) {
      if (oracle::sentence_frequency({tokenized[id]}, gram) == 1) expected.push_back(id);
    }
    EXPECT_EQ(store.occurrences(surface), expected) << surface;
  }
}

TEST(CorpusStore, PostingsSortedAndValid) {
  auto store = from_lines({padded("a b c"), padded("b c d"), padded("c d e")});
  for (const auto& [tok, ids] : store.postings()) {
    EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
    EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
    for (auto id : ids) EXPECT_TRUE(store.contains_id(id)) << tok;
  }
}

TEST(CorpusStore, SampleContextsMinRuleAndDeterminism) {
  std::vector<std::string> lines;
  for (int i = 0; i < 40; ++i) lines.push_back(padded("target word " + std::to_string(i)));
  auto store = from_lines(lines);
  EXPECT_EQ(store.sample_contexts("target", 1000, 1).ids.size(), 40u);
  auto a = store.sample_contexts("target", 2, 9);
  auto b = store.sample_contexts("target", 2, 9);
  EXPECT_EQ(a.ids, b.ids);
  EXPECT_EQ(a.texts.size(), 2u);
  EXPECT_TRUE(std::is_sorted(a.ids.begin(), a.ids.end()));
  try {
    store.sample_contexts("absent", 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoContext);
  }
}

TEST(CorpusStore, SampleContextsIsUniform) {
  std::vector<std::string> lines;
  for (int i = 0; i < 10; ++i) lines.push_back(padded("needle " + std::to_string(i)));
  auto store = from_lines(lines);
  std::vector<int> hits(10, 0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    for (auto id : store.sample_contexts("needle", 3, static_cast<uint64_t>(t)).ids) ++hits[id];
  }
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / trials, 0.3, 0.02);
}

TEST(CorpusStore, SeedsControlTheSample) {
  std::vector<std::string> lines;
  for (int i = 0; i < 10000; ++i) lines.push_back(padded("line number " + std::to_string(i)));
  auto a = from_lines(lines, 1, 100);
  auto a2 = from_lines(lines, 1, 100);
  auto b = from_lines(lines, 2, 100);
  ASSERT_EQ(a.size(), 100u);
  auto texts = [](const SentenceStore& s) {
    std::set<std::string> out;
    for (const auto& x : s.sentences()) out.insert(x.text);
    return out;
  };
  EXPECT_EQ(texts(a), texts(a2));
  EXPECT_NE(texts(a), texts(b));
}

TEST(CorpusStore, SaveIsByteIdenticalAndLoadRoundTrips) {
  TempDir dir;
  std::vector<std::string> lines;
  for (int i = 0; i < 50; ++i) lines.push_back(padded("sentence " + std::to_string(i % 7) + " x" + std::to_string(i)));
  from_lines(lines, 5, 20).save(dir / "a");
  from_lines(lines, 5, 20).save(dir / "b");
  for (const char* f : {"sentences.jsonl", "index.bin"}) {
    EXPECT_EQ(sha256_file(dir / "a" / f), sha256_file(dir / "b" / f)) << f;
  }
  auto loaded = SentenceStore::load(dir / "a");
  auto fresh = from_lines(lines, 5, 20);
  ASSERT_EQ(loaded.size(), fresh.size());
  for (size_t i = 0; i < fresh.size(); ++i) EXPECT_EQ(loaded.sentence(i).text, fresh.sentence(i).text);
  EXPECT_EQ(loaded.occurrences("sentence 3"), fresh.occurrences("sentence 3"));
  EXPECT_EQ(read_file(dir / "a" / "index.bin").substr(0, 4), "TIDX");
}

TEST(CorpusStore, LoadRejectsCorruptIndex) {
  TempDir dir;
  from_lines({padded("a b c"), padded("d e f")}).save(dir.path());
  std::string idx = read_file(dir / "index.bin");
  idx[0] = 'X';
  write_file_atomic(dir / "index.bin", idx);
  try {
    SentenceStore::load(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
}

}  // namespace
}  // namespace termforge
