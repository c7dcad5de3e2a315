// Writes the mini end-to-end fixture: corpus, NP annotations, fixture wiki,
// static and contextual TEMB tables, word-form lexicon and a config.
//
// Sentence frequencies are planned so termhood scores can be worked out by
// hand:
//   machine learning 8 | machine 8 | learning 8
//   climate change 6   | climate 11 (with climate crisis) | change 8
//   stock market 7     | stock 12 (with stock markets) | market 7
//   new york city 4    | new 10 | york 4 | city 6
//   big problem 6      | big 7 | problem 6
//   good idea 5        | good 15 | idea 10
//
// usage: termforge_make_fixture OUT_DIR

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "termforge/corpus_store.h"
#include "termforge/embedding_store.h"
#include "termforge/random.h"
#include "termforge/wiki_fixture.h"

namespace fs = std::filesystem;
using namespace termforge;

namespace {

const std::vector<std::string> kFiller{
    "people",   "said",     "today",     "report",   "officials", "during",  "morning",  "several",
    "according", "local",   "agency",    "statement", "region",   "experts", "noted",    "across",
    "country",  "weekend",  "council",   "members",  "plans",     "showed",  "recent",   "figures",
    "evening",  "visitors", "museum",    "river",    "bridge",    "teachers", "students", "village",
    "harbor",   "families", "travelers", "garden",   "weather",   "morning", "crowd",    "gathered"};

struct Planned {
  std::string phrase;       // text inserted into the sentence
  std::string np;           // NP annotation text, empty for none
  int count = 0;
};

// Dimensions of the static table: one axis per topic plus noise.
constexpr uint32_t kStaticDim = 8;
constexpr uint32_t kContextDim = 8;

std::vector<float> topic_vector(int axis, Rng& rng) {
  std::vector<float> v(kStaticDim);
  for (auto& x : v) x = static_cast<float>(0.05 * standard_normal(rng));
  v[static_cast<size_t>(axis)] += 1.0f;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: termforge_make_fixture OUT_DIR\n";
    return 2;
  }
  const fs::path out = argv[1];
  fs::create_directories(out / "wiki");
  Rng rng = make_rng(20240611);

  const std::vector<Planned> plan{
      {"machine learning", "the machine learning", 8},
      {"ml", "", 5},
      {"climate change", "climate change", 6},
      {"climate crisis", "", 5},
      {"change", "", 2},
      {"stock market", "the stock market", 7},
      {"stock markets", "", 5},
      {"new york city", "new york city", 4},
      {"new", "", 6},
      {"city", "", 2},
      {"big problem", "a big problem", 6},
      {"big", "", 1},
      {"good idea", "a good idea", 5},
      {"good", "", 10},
      {"idea", "", 5},
      {"rare gem", "a rare gem", 2},
      {"mercury", "the mercury", 8},
      {"jaguar", "the jaguar", 8},
      {"python", "a python", 8},
      {"volcano", "the volcano", 8},
      {"telescope", "the telescope", 8},
      {"glacier", "the glacier", 8},
  };

  struct Line {
    std::string text;
    std::string np;
  };
  std::vector<Line> lines;
  auto filler = [&](size_t n) {
    std::string s;
    for (size_t i = 0; i < n; ++i) {
      if (!s.empty()) s += ' ';
      s += kFiller[uniform_below(rng, kFiller.size())];
    }
    return s;
  };
  for (const auto& p : plan) {
    for (int i = 0; i < p.count; ++i) {
      // The phrase sits between two filler runs; a numbered tag keeps
      // every sentence distinct.
      std::string text = filler(3 + uniform_below(rng, 3)) + " " + p.phrase + " " +
                         filler(5 + uniform_below(rng, 4)) + " item" + std::to_string(lines.size()) + " .";
      lines.push_back({text, p.np});
    }
  }
  while (lines.size() < 200) {
    lines.push_back({filler(9 + uniform_below(rng, 5)) + " item" + std::to_string(lines.size()) + " .", ""});
  }
  shuffle(lines, rng);

  // Lines the store must drop: too short, and an exact duplicate.
  std::vector<std::string> corpus_lines;
  for (const auto& l : lines) corpus_lines.push_back(l.text);
  corpus_lines.insert(corpus_lines.begin() + 17, "too short to keep .");
  corpus_lines.insert(corpus_lines.begin() + 91, "short line");
  corpus_lines.insert(corpus_lines.begin() + 140, corpus_lines[60]);
  {
    std::ofstream f(out / "corpus.txt", std::ios::binary);
    for (const auto& l : corpus_lines) f << l << '\n';
  }

  // Surviving sentence ids follow source order, so ids are recoverable by
  // ingesting the corpus.
  std::ifstream corpus_in(out / "corpus.txt");
  IngestOptions io;
  io.sample_size = 1000;
  SentenceStore store = SentenceStore::ingest(corpus_in, io);
  {
    std::ofstream f(out / "nps.jsonl", std::ios::binary);
    for (const auto& s : store.sentences()) {
      for (const auto& l : lines) {
        if (l.text == s.text && !l.np.empty()) {
          f << nlohmann::json{{"sentence_id", s.id}, {"np", l.np}}.dump() << '\n';
        }
      }
    }
    // One record pointing past the store is reported and skipped.
    f << nlohmann::json{{"sentence_id", 99999}, {"np", "ghost town"}}.dump() << '\n';
  }

  // Fixture wiki. Link pages supply backlinks.
  FixtureWiki wiki;
  const std::string hallmark = "This disambiguation page lists articles associated with the title ";
  for (const std::string t : {"Mercury", "Jaguar", "Python"}) {
    wiki.add({t, hallmark + t + ".", std::nullopt, {}});
  }
  for (const std::string t : {"Volcano", "Telescope", "Glacier", "Machine learning", "Climate change",
                              "Stock market", "New York City"}) {
    wiki.add({t, "Article about " + t + ".", std::nullopt, {}});
  }
  wiki.add({"ML", "", std::string("Machine learning"), {}});
  wiki.add({"Climate crisis", "", std::string("Climate change"), {}});
  wiki.add({"Stock markets", "", std::string("Stock market"), {}});
  const std::vector<std::pair<std::string, int>> inlinks{
      {"Machine learning", 7}, {"Climate change", 5}, {"Stock market", 9}, {"New York City", 4},
      {"Volcano", 3},          {"Telescope", 2},      {"Glacier", 6},      {"Mercury", 2}};
  int max_links = 0;
  for (const auto& [_, n] : inlinks) max_links = std::max(max_links, n);
  for (int i = 0; i < max_links; ++i) {
    FixturePage p{"Link page " + std::to_string(i + 1), "Index page.", std::nullopt, {}};
    for (const auto& [title, n] : inlinks) {
      if (i < n) p.links.push_back(title);
    }
    wiki.add(p);
  }
  wiki.save(out / "wiki");

  // Static vectors: one axis per topic so co-redirects sit together.
  EmbeddingTable stat(kStaticDim);
  const std::vector<std::pair<std::string, int>> axes{
      {"machine", 0}, {"learning", 0}, {"ml", 0},      {"climate", 1}, {"change", 1}, {"crisis", 1},
      {"stock", 2},   {"market", 2},   {"markets", 2}, {"new", 3},     {"york", 3},   {"city", 3},
      {"big", 4},     {"problem", 4},  {"good", 5},    {"idea", 5},    {"mercury", 6}, {"jaguar", 6},
      {"python", 6},  {"volcano", 7},  {"telescope", 7}, {"glacier", 7}};
  for (const auto& [tok, axis] : axes) stat.add({tok, topic_vector(axis, rng)});
  stat.write(out / "static.temb");

  // Contextual last-layer vectors per (unigram, sentence): ambiguous terms
  // around +1 on every axis, the rest around -1.
  EmbeddingTable ctx(kContextDim);
  const std::vector<std::pair<std::string, int>> unigrams{{"mercury", 1},   {"jaguar", 1},    {"python", 1},
                                                          {"volcano", -1},  {"telescope", -1}, {"glacier", -1}};
  for (const auto& [surface, sign] : unigrams) {
    for (auto id : store.occurrences(surface)) {
      std::vector<float> v(kContextDim);
      for (auto& x : v) x = static_cast<float>(sign * 1.0 + 0.3 * standard_normal(rng));
      ctx.add({contextual_key(surface, id, Layer::kLast), v});
    }
  }
  ctx.write(out / "contextual.temb");

  {
    std::ofstream f(out / "lexicon.tsv", std::ios::binary);
    f << "# form\tlemma\n"
      << "intelligent\tintelligence\n"
      << "intelligently\tintelligence\n"
      << "artificially\tartificial\n"
      << "markets\tmarket\n";
  }

  nlohmann::ordered_json cfg;
  cfg["seed"] = 2024;
  cfg["out"] = "out";
  cfg["inputs"] = {{"corpus", "corpus.txt"},           {"np_annotations", "nps.jsonl"},
                   {"fixture_wiki", "wiki"},           {"static_embeddings", "static.temb"},
                   {"contextual_embeddings", "contextual.temb"}, {"lexicon", "lexicon.tsv"}};
  cfg["ingest"] = {{"sample_size", 1000}, {"min_tokens", 10}};
  cfg["thresholds"] = {{"unigram", 5}, {"bigram", 5}, {"trigram", 3}, {"aug", 5}};
  cfg["score"] = {{"measures", {"RF", "CV"}}, {"cv_sample_size", 1000}};
  cfg["classifier"] = {{"set", "LNNP_1"},      {"learning_rate", 0.05},  {"epochs", 50},
                       {"batch_size", 8},      {"train_fraction", 0.5}, {"dev_fraction", 0.0}};
  cfg["clustering"] = {{"mode", "STATIC_HAR"}, {"k", "gold"}, {"restarts", 5}, {"n", 2}};
  cfg["labels"] = {{"created_at", "1970-01-01T00:00:00Z"}, {"concurrency", 2}};
  std::ofstream(out / "config.json", std::ios::binary) << cfg.dump(2) << '\n';
  std::cout << "wrote fixture to " << out << " (" << store.size() << " sentences)\n";
  return 0;
}
