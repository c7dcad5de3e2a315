// termforge: command-line front end for the term extraction pipeline.
//
// Every stage subcommand reads and writes artifacts in the --out directory,
// so `termforge ingest`, `termforge extract`, ... run by hand produce the
// same files as `termforge run`.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "termforge/digest.h"
#include "termforge/error.h"
#include "termforge/evaluation.h"
#include "termforge/pipeline.h"
#include "termforge/termhood.h"

namespace fs = std::filesystem;
using termforge::Error;
using termforge::ErrorCode;
using termforge::PipelineConfig;

namespace {

struct Globals {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string format = "text";
};

PipelineConfig base_config(const Globals& g) {
  std::string path = g.config;
  if (path.empty()) {
    if (const char* env = std::getenv(termforge::kConfigEnvVar)) path = env;
  }
  PipelineConfig c = path.empty() ? PipelineConfig{} : PipelineConfig::load(path);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.out = fs::absolute(g.out).lexically_normal();
  return c;
}

void print_artifacts(const std::vector<termforge::ManifestEntry>& entries, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : entries) arr.push_back({{"stage", e.stage}, {"path", e.path}, {"sha256", e.sha256}});
    std::cout << arr.dump(2) << '\n';
  } else if (format == "tsv") {
    std::cout << "stage\tpath\tsha256\n";
    for (const auto& e : entries) std::cout << e.stage << '\t' << e.path << '\t' << e.sha256 << '\n';
  } else {
    for (const auto& e : entries) std::cout << e.sha256 << "  " << e.path << '\n';
  }
}

void print_file(const fs::path& path) { std::cout << termforge::read_file(path); }

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::absolute(s).lexically_normal();
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::kConfig ? 2 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"termforge: find Wikipedia-worthy terms in a sentence corpus"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config, "Pipeline config (JSON); defaults to $TERMFORGE_CONFIG");
  app.add_option("--seed", g.seed, "Master seed, overrides the config");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "tsv", "text"}));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Filter and sample a one-sentence-per-line corpus");
  std::string corpus;
  std::optional<size_t> sample_size;
  std::optional<uint32_t> min_tokens;
  ingest->add_option("--corpus", corpus, "UTF-8 text, one sentence per line");
  ingest->add_option("--sample-size", sample_size);
  ingest->add_option("--min-tokens", min_tokens);

  // extract
  auto* extract = app.add_subcommand("extract", "Normalize noun phrases into candidate sets");
  std::string nps, stopwords;
  std::optional<uint64_t> t_uni, t_bi, t_tri;
  extract->add_option("--nps", nps, "NP annotation JSONL; the fallback chunker is used without it");
  extract->add_option("--stopwords", stopwords, "One stop-word per line");
  extract->add_option("--unigram", t_uni, "Sentence-frequency threshold for unigrams");
  extract->add_option("--bigram", t_bi, "Sentence-frequency threshold for bigrams");
  extract->add_option("--trigram", t_tri, "Sentence-frequency threshold for trigrams");

  // label
  auto* label = app.add_subcommand("label", "Label candidates against a MediaWiki-compatible source");
  std::string fixture, endpoint, snapshot, created_at;
  std::optional<size_t> concurrency;
  label->add_option("--fixture", fixture, "Fixture wiki directory (pages.jsonl); no network");
  label->add_option("--endpoint", endpoint, "api.php URL");
  label->add_option("--snapshot", snapshot, "Existing label snapshot to adopt");
  label->add_option("--created-at", created_at, "Timestamp recorded in the snapshot");
  label->add_option("--concurrency", concurrency);

  // score
  auto* score = app.add_subcommand("score", "Score candidates with termhood measures");
  std::vector<std::string> measures;
  std::optional<size_t> cv_sample;
  score->add_option("--measure", measures, "rf and/or cv")->check(CLI::IsMember({"rf", "cv", "RF", "CV"}));
  score->add_option("--cv-sample-size", cv_sample);

  // classify
  auto* classify = app.add_subcommand("classify", "Train and apply the set classifier for ambiguity");
  std::string embeddings, set_name, activation;
  std::optional<size_t> epochs, hidden;
  std::optional<double> learning_rate;
  classify->add_option("--embeddings", embeddings, "Contextual TEMB file");
  classify->add_option("--set", set_name)->check(CLI::IsMember({"LNNP_1", "LNNP_2", "LNNP_3", "LNNP_23"}));
  classify->add_option("--epochs", epochs);
  classify->add_option("--learning-rate", learning_rate);
  classify->add_option("--hidden", hidden);
  classify->add_option("--activation", activation)->check(CLI::IsMember({"relu", "tanh"}));

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster co-referring surface forms");
  std::string mode, k_policy, static_emb, contextual_emb, lexicon;
  std::optional<size_t> restarts;
  std::optional<uint32_t> cluster_n;
  cluster->add_option("--mode", mode, "STATIC_AGG, STATIC_HAR, TF_SIB or CONTEXTUAL_HAR");
  cluster->add_option("--k", k_policy, "Cluster count or 'gold'");
  cluster->add_option("--restarts", restarts);
  cluster->add_option("--n", cluster_n, "Which augmented n-gram set to cluster")->check(CLI::Range(1, 3));
  cluster->add_option("--static-embeddings", static_emb);
  cluster->add_option("--contextual-embeddings", contextual_emb);
  cluster->add_option("--lexicon", lexicon, "Word-form lexicon TSV");

  // rank
  auto* rank = app.add_subcommand("rank", "Rank clusters by corpus frequency");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate artifacts, or compare two partition files");
  std::string metric;
  std::vector<std::string> partitions;
  eval->add_option("--metric", metric, "Compare two partitions with one metric")
      ->check(CLI::IsMember({"ari", "bcubed-f1", "bcubed-precision", "bcubed-recall"}));
  eval->add_option("partitions", partitions, "Predicted and gold partition files")->expected(0, 2);

  // report
  auto* report = app.add_subcommand("report", "Render an evaluation report");
  std::string report_in;
  report->add_option("--in", report_in, "report.json; defaults to OUT/report.json");

  // run
  auto* run = app.add_subcommand("run", "Run every enabled stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*eval && !metric.empty()) {
      if (partitions.size() != 2) {
        std::cerr << "eval --metric needs two partition files\n";
        return 2;
      }
      auto a = termforge::read_partition_file(partitions[0]);
      auto b = termforge::read_partition_file(partitions[1]);
      double v = 0;
      if (metric == "ari") v = termforge::adjusted_rand_index(a, b);
      else if (metric == "bcubed-f1") v = termforge::bcubed(a, b).f1;
      else if (metric == "bcubed-precision") v = termforge::bcubed(a, b).precision;
      else v = termforge::bcubed(a, b).recall;
      std::printf("%.17g\n", v);
      return 0;
    }

    if (*report) {
      fs::path in = report_in.empty() ? fs::path(g.out.empty() ? base_config(g).out : fs::path(g.out)) / "report.json"
                                      : fs::path(report_in);
      std::istringstream ss(termforge::read_file(in));
      auto reports = termforge::read_reports_json(ss);
      if (g.format == "json") termforge::write_reports_json(std::cout, reports);
      else termforge::write_reports_text(std::cout, reports);
      return 0;
    }

    PipelineConfig cfg = base_config(g);
    if (cfg.out.empty()) {
      std::cerr << "no output directory: pass --out or set out in the config\n";
      return 2;
    }

    if (*run) {
      auto result = termforge::run_pipeline(cfg, &std::cerr);
      print_artifacts(result.artifacts, g.format);
      return result.exit_code;
    }

    std::string stage;
    if (*ingest) {
      stage = "ingest";
      if (auto p = opt_path(corpus)) cfg.corpus = *p;
      if (sample_size) cfg.sample_size = *sample_size;
      if (min_tokens) cfg.min_tokens = *min_tokens;
    } else if (*extract) {
      stage = "extract";
      if (auto p = opt_path(nps)) cfg.np_annotations = p;
      if (auto p = opt_path(stopwords)) cfg.stopwords = p;
      if (t_uni) cfg.thresholds.unigram = *t_uni;
      if (t_bi) cfg.thresholds.bigram = *t_bi;
      if (t_tri) cfg.thresholds.trigram = *t_tri;
    } else if (*label) {
      stage = "label";
      if (auto p = opt_path(snapshot)) cfg.snapshot = p;
      if (auto p = opt_path(fixture)) {
        cfg.snapshot.reset();
        cfg.fixture_wiki = p;
      }
      if (!endpoint.empty()) {
        cfg.snapshot.reset();
        cfg.fixture_wiki.reset();
        cfg.endpoint = endpoint;
      }
      if (!created_at.empty()) cfg.created_at = created_at;
      if (concurrency) cfg.label_concurrency = *concurrency;
    } else if (*score) {
      stage = "score";
      if (!measures.empty()) {
        cfg.measures.clear();
        for (const auto& m : measures) cfg.measures.push_back(termforge::parse_measure(m));
      }
      if (cv_sample) cfg.cv_sample_size = *cv_sample;
    } else if (*classify) {
      stage = "classify";
      if (auto p = opt_path(embeddings)) cfg.contextual_embeddings = p;
      if (!set_name.empty()) cfg.classifier_set = set_name;
      if (epochs) cfg.classifier.epochs = *epochs;
      if (learning_rate) cfg.classifier.learning_rate = *learning_rate;
      if (hidden) cfg.classifier.hidden = *hidden;
      if (!activation.empty()) cfg.classifier.activation = termforge::parse_activation(activation);
    } else if (*cluster) {
      stage = "cluster";
      if (!mode.empty()) {
        try {
          cfg.clustering.mode = termforge::parse_cluster_mode(mode);
        } catch (const Error& e) {
          std::cerr << e.what() << '\n';
          return 2;
        }
      }
      if (k_policy == "gold") {
        cfg.cluster_k.reset();
      } else if (!k_policy.empty()) {
        try {
          size_t pos = 0;
          long long k = std::stoll(k_policy, &pos);
          if (pos != k_policy.size() || k <= 0) throw std::invalid_argument("k");
          cfg.cluster_k = static_cast<size_t>(k);
        } catch (const std::exception&) {
          std::cerr << "--k must be a positive integer or 'gold'\n";
          return 2;
        }
      }
      if (restarts) cfg.clustering.restarts = *restarts;
      if (cluster_n) cfg.cluster_n = *cluster_n;
      if (auto p = opt_path(static_emb)) cfg.static_embeddings = p;
      if (auto p = opt_path(contextual_emb)) cfg.contextual_embeddings = p;
      if (auto p = opt_path(lexicon)) cfg.lexicon = p;
    } else if (*rank) {
      stage = "rank";
    } else if (*eval) {
      stage = "eval";
    }

    auto entries = termforge::run_single_stage(cfg, stage, &std::cerr);
    if (stage == "score" && g.format != "json") {
      for (auto m : cfg.measures) print_file(cfg.out / (m == termforge::Measure::kRelativeFrequency ? "scores_rf.tsv"
                                                                                                      : "scores_cv.tsv"));
    } else if (stage == "rank" && g.format != "json") {
      print_file(cfg.out / "ranking.tsv");
    } else if (stage == "eval" && g.format == "text") {
      print_file(cfg.out / "report.txt");
    } else {
      print_artifacts(entries, g.format);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "termforge: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "termforge: " << e.what() << '\n';
    return 1;
  }
}
