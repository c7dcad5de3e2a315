#include "termforge/pipeline.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "termforge/digest.h"
#include "termforge/embedding_store.h"
#include "termforge/error.h"
#include "termforge/evaluation.h"
#include "termforge/random.h"
#include "termforge/ranking.h"
#include "termforge/text.h"
#include "termforge/wiki_fixture.h"
#include "termforge/wiki_labeling.h"

namespace termforge {
namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::kConfig, message); }

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      config_error("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_key(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  const json& v = j.at(key);
  if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) config_error(where + "." + key + " must be a non-negative integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) config_error(where + "." + key + " must be a number");
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) config_error(where + "." + key + " must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) config_error(where + "." + key + " must be a string");
  }
  out = v.get<T>();
}

void read_path(const json& j, const char* key, std::optional<fs::path>& out, const fs::path& base,
               const std::string& where) {
  std::string s;
  read_key(j, key, s, where);
  if (s.empty()) return;
  fs::path p(s);
  out = (p.is_absolute() ? p : base / p).lexically_normal();
}

std::optional<std::string> file_digest(const std::optional<fs::path>& p) {
  if (!p) return std::nullopt;
  if (fs::is_directory(*p)) {
    // Directory inputs (fixture wikis) digest their sorted file contents.
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(*p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += fs::relative(f, *p).generic_string() + ":" + sha256_file(f) + "\n";
    return sha256_hex(acc);
  }
  return sha256_file(*p);
}

ojson nullable(const std::optional<std::string>& v) { return v ? ojson(*v) : ojson(nullptr); }

class DirLock {
 public:
  explicit DirLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::kLocked, "another pipeline is running in " + path.parent_path().string());
    }
  }
  ~DirLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

const std::map<std::string, std::vector<std::string>>& stage_dependencies() {
  static const std::map<std::string, std::vector<std::string>> kDeps{
      {"ingest", {}},
      {"extract", {"ingest"}},
      {"label", {"extract"}},
      {"score", {"ingest", "extract"}},
      {"classify", {"extract", "label"}},
      {"cluster", {"ingest", "extract", "label"}},
      {"rank", {"ingest", "label", "cluster"}},
      {"eval", {"label"}},
  };
  return kDeps;
}

std::string score_file(Measure m) {
  return m == Measure::kRelativeFrequency ? "scores_rf.tsv" : "scores_cv.tsv";
}

const CandidateSet& pick_set(const LnnpSets& sets, std::string_view name) {
  if (name == "LNNP_1") return sets.lnnp1;
  if (name == "LNNP_2") return sets.lnnp2;
  if (name == "LNNP_3") return sets.lnnp3;
  if (name == "LNNP_23") return sets.lnnp23;
  throw Error(ErrorCode::kConfig, "unknown candidate set '" + std::string(name) + "'");
}

class Runner {
 public:
  Runner(const PipelineConfig& cfg, std::ostream* log, bool single = false)
      : cfg_(cfg), out_(cfg.out), log_(log), single_(single) {}

  std::vector<ManifestEntry> run_one(const std::string& stage) {
    config_digest_ = cfg_.digest();
    for (const auto& [file, producer] : prerequisites(stage)) {
      if (!fs::exists(out_ / file)) {
        throw Error(ErrorCode::kMissingDependency,
                    "stage '" + stage + "' needs " + file + " from stage '" + producer + "'");
      }
    }
    auto outputs = dispatch(stage);
    std::sort(outputs.begin(), outputs.end());
    std::vector<ManifestEntry> entries;
    for (const auto& rel : outputs) entries.push_back({stage, rel, sha256_file(out_ / rel)});
    return entries;
  }

  PipelineResult run() {
    config_digest_ = cfg_.digest();
    fs::create_directories(out_ / ".stage");
    for (const auto& stage : pipeline_stages()) {
      StageOutcome outcome{stage, StageStatus::kDisabled, {}};
      if (!cfg_.stage_enabled(stage)) {
        result_.stages.push_back(outcome);
        write_manifest();
        continue;
      }
      try {
        for (const auto& dep : stage_dependencies().at(stage)) {
          if (!cfg_.stage_enabled(dep)) {
            throw Error(ErrorCode::kMissingDependency,
                        "stage '" + stage + "' requires stage '" + dep + "', which is disabled");
          }
        }
        outcome.status = run_stage(stage);
      } catch (const std::exception& e) {
        outcome.status = StageStatus::kFailed;
        outcome.error = e.what();
        result_.stages.push_back(outcome);
        result_.exit_code = 1;
        say(stage, std::string("failed: ") + e.what());
        write_manifest();
        return result_;
      }
      say(stage, std::string(stage_status_name(outcome.status)));
      result_.stages.push_back(outcome);
      write_manifest();
    }
    return result_;
  }

 private:
  void say(const std::string& stage, const std::string& message) {
    if (log_) *log_ << "[" << stage << "] " << message << '\n';
  }

  uint64_t stage_seed(const std::string& stage) const { return derive_seed(cfg_.seed, stage); }

  // Key over the configuration and every upstream artifact.
  std::string stage_key(const std::string& stage) const {
    std::string acc = stage + "\n" + config_digest_ + "\n";
    for (const auto& a : result_.artifacts) acc += a.path + ":" + a.sha256 + "\n";
    return sha256_hex(acc);
  }

  fs::path stamp_path(const std::string& stage) const { return out_ / ".stage" / (stage + ".json"); }

  std::optional<std::vector<ManifestEntry>> cached_outputs(const std::string& stage, const std::string& key) const {
    fs::path p = stamp_path(stage);
    if (!fs::exists(p)) return std::nullopt;
    try {
      json j = json::parse(read_file(p));
      if (j.at("key").get<std::string>() != key) return std::nullopt;
      std::vector<ManifestEntry> outs;
      for (const auto& o : j.at("outputs")) {
        ManifestEntry e{stage, o.at("path").get<std::string>(), o.at("sha256").get<std::string>()};
        fs::path f = out_ / e.path;
        if (!fs::exists(f) || sha256_file(f) != e.sha256) return std::nullopt;
        outs.push_back(std::move(e));
      }
      return outs;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  StageStatus run_stage(const std::string& stage) {
    const std::string key = stage_key(stage);
    if (auto cached = cached_outputs(stage, key)) {
      result_.artifacts.insert(result_.artifacts.end(), cached->begin(), cached->end());
      return StageStatus::kCached;
    }
    fs::remove(stamp_path(stage));
    std::vector<std::string> outputs = dispatch(stage);
    std::sort(outputs.begin(), outputs.end());
    ojson stamp;
    stamp["key"] = key;
    stamp["outputs"] = ojson::array();
    for (const auto& rel : outputs) {
      ManifestEntry e{stage, rel, sha256_file(out_ / rel)};
      stamp["outputs"].push_back({{"path", e.path}, {"sha256", e.sha256}});
      result_.artifacts.push_back(std::move(e));
    }
    write_file_atomic(stamp_path(stage), stamp.dump(2) + "\n");
    return StageStatus::kRan;
  }

  std::vector<std::string> dispatch(const std::string& stage) {
    if (stage == "ingest") return ingest();
    if (stage == "extract") return extract();
    if (stage == "label") return label();
    if (stage == "score") return score();
    if (stage == "classify") return classify();
    if (stage == "cluster") return cluster();
    if (stage == "rank") return rank();
    if (stage == "eval") return evaluate();
    throw Error(ErrorCode::kInvalidArgument, "unknown stage '" + stage + "'");
  }

  static std::vector<std::pair<std::string, std::string>> prerequisites(const std::string& stage) {
    const std::pair<std::string, std::string> store{"store/sentences.jsonl", "ingest"},
        sets{"candidate_sets.json", "extract"}, labels{"labels.jsonl", "label"}, clusters{"clusters.json", "cluster"};
    if (stage == "extract") return {store};
    if (stage == "label") return {sets};
    if (stage == "score") return {store, sets};
    if (stage == "classify") return {sets, labels};
    if (stage == "cluster") return {store, sets, labels};
    if (stage == "rank") return {store, labels, clusters};
    if (stage == "eval") return {labels};
    return {};
  }

  // In a pipeline run a stage's artifacts count only if it is enabled; a
  // single-stage run uses whatever is on disk.
  bool available(const std::string& stage, const std::string& artifact) const {
    return single_ ? fs::exists(out_ / artifact) : cfg_.stage_enabled(stage);
  }

  void write_manifest() const {
    ojson m;
    m["format"] = "termforge-manifest";
    m["version"] = 1;
    m["config_digest"] = config_digest_;
    m["seed"] = cfg_.seed;
    m["stages"] = ojson::array();
    for (const auto& s : result_.stages) {
      ojson st;
      st["name"] = s.name;
      st["state"] = s.status == StageStatus::kDisabled ? "disabled"
                    : s.status == StageStatus::kFailed ? "failed"
                                                       : "complete";
      if (s.status == StageStatus::kFailed) st["error"] = s.error;
      m["stages"].push_back(std::move(st));
    }
    m["artifacts"] = ojson::array();
    for (const auto& a : result_.artifacts) {
      m["artifacts"].push_back({{"stage", a.stage}, {"path", a.path}, {"sha256", a.sha256}});
    }
    write_file_atomic(out_ / "manifest.json", m.dump(2) + "\n");
  }

  // --- artifact readers -----------------------------------------------------

  SentenceStore load_store() const { return SentenceStore::load(out_ / "store"); }

  LnnpSets load_sets() const {
    auto all = read_candidates(out_ / "candidates.jsonl");
    std::map<std::string, Candidate> by_surface;
    for (auto& c : all) by_surface.emplace(c.surface, c);
    json j = json::parse(read_file(out_ / "candidate_sets.json"));
    auto fill = [&](CandidateSet& set, const char* name) {
      set.name = name;
      for (const auto& s : j.at("sets").at(name)) {
        auto it = by_surface.find(s.get<std::string>());
        if (it == by_surface.end()) {
          throw Error(ErrorCode::kFormat, "candidate_sets.json lists unknown surface " + s.dump());
        }
        set.members.push_back(it->second);
      }
    };
    LnnpSets sets;
    fill(sets.lnnp1, "LNNP_1");
    fill(sets.lnnp2, "LNNP_2");
    fill(sets.lnnp3, "LNNP_3");
    fill(sets.lnnp23, "LNNP_23");
    return sets;
  }

  LabelSnapshot load_labels() const { return LabelSnapshot::read(out_ / "labels.jsonl"); }

  StopWords stopwords() const { return cfg_.stopwords ? StopWords::load(*cfg_.stopwords) : StopWords::english(); }

  // --- stages ----------------------------------------------------------------

  std::vector<std::string> ingest() {
    IngestOptions opts;
    opts.sample_size = cfg_.sample_size;
    opts.seed = stage_seed("ingest");
    opts.min_tokens = cfg_.min_tokens;
    IngestStats stats;
    auto store = SentenceStore::ingest_file(cfg_.corpus, opts, &stats);
    store.save(out_ / "store");
    say("ingest", std::to_string(stats.lines_read) + " lines, " + std::to_string(stats.survivors) +
                      " pass filters, " + std::to_string(store.size()) + " sampled");
    return {"store/index.bin", "store/sentences.jsonl"};
  }

  std::vector<std::string> extract() {
    auto store = load_store();
    auto sw = stopwords();
    auto nps = cfg_.np_annotations ? read_np_annotations(*cfg_.np_annotations) : chunk_store(store, sw);
    auto res = extract_candidates(store, nps, sw);
    write_candidates(out_ / "candidates.jsonl", res.candidates);
    auto sets = apply_thresholds(res.candidates, cfg_.thresholds);
    ojson j;
    j["thresholds"] = {{"unigram", cfg_.thresholds.unigram},
                       {"bigram", cfg_.thresholds.bigram},
                       {"trigram", cfg_.thresholds.trigram}};
    j["extraction"] = {{"accepted_nps", res.accepted_nps},
                       {"discarded_stopword_only", res.discarded_stopword_only},
                       {"discarded_length", res.discarded_length},
                       {"rejected", res.rejected.size()}};
    ojson js;
    for (const auto* set : {&sets.lnnp1, &sets.lnnp2, &sets.lnnp3, &sets.lnnp23}) {
      ojson members = ojson::array();
      for (const auto& c : set->members) members.push_back(c.surface);
      js[set->name] = std::move(members);
    }
    j["sets"] = std::move(js);
    write_file_atomic(out_ / "candidate_sets.json", j.dump(2) + "\n");
    say("extract", std::to_string(res.candidates.size()) + " candidates, " +
                       std::to_string(res.rejected.size()) + " rejected annotations");
    return {"candidate_sets.json", "candidates.jsonl"};
  }

  std::vector<std::string> label() {
    auto sets = load_sets();
    std::set<std::string> surfaces;
    for (const auto* set : {&sets.lnnp1, &sets.lnnp2, &sets.lnnp3}) {
      for (const auto& c : set->members) surfaces.insert(c.surface);
    }
    LabelSnapshot snap;
    if (cfg_.snapshot) {
      snap = LabelSnapshot::read(*cfg_.snapshot);
    } else {
      LabelOptions opts;
      opts.concurrency = cfg_.label_concurrency;
      opts.created_at = cfg_.created_at;
      std::vector<std::string> list(surfaces.begin(), surfaces.end());
      if (cfg_.fixture_wiki) {
        auto wiki = std::make_shared<const FixtureWiki>(FixtureWiki::load(*cfg_.fixture_wiki));
        opts.endpoint = "fixture";
        opts.client.rate_limiter = std::make_shared<RateLimiter>(0.0);
        snap = build_snapshot(list, [wiki] { return std::make_shared<FixtureTransport>(wiki); }, opts);
      } else {
        opts.endpoint = *cfg_.endpoint;
        opts.client.rate_limiter = std::make_shared<RateLimiter>(cfg_.label_rps);
        std::string endpoint = *cfg_.endpoint;
        snap = build_snapshot(list, [endpoint] { return std::make_shared<HttpTransport>(endpoint); }, opts);
      }
    }
    size_t missing = 0;
    for (const auto& s : surfaces) missing += snap.find(s) ? 0 : 1;
    snap.write(out_ / "labels.jsonl");
    say("label", std::to_string(snap.size()) + " labels, " + std::to_string(missing) + " candidates unlabeled");
    return {"labels.jsonl"};
  }

  CandidateSet scored_universe(const LnnpSets& sets) const {
    CandidateSet all{"LNNP", sets.lnnp1.members};
    all.members.insert(all.members.end(), sets.lnnp23.members.begin(), sets.lnnp23.members.end());
    std::sort(all.members.begin(), all.members.end());
    return all;
  }

  std::vector<std::string> score() {
    auto store = load_store();
    auto universe = scored_universe(load_sets());
    ScoreParams params;
    params.cv.sample_size = cfg_.cv_sample_size;
    params.cv.seed = stage_seed("score");
    std::vector<std::string> outputs;
    for (Measure m : cfg_.measures) {
      auto res = score_set(universe, m, store, params);
      write_score_table(out_ / score_file(m), res.table);
      outputs.push_back(score_file(m));
      say("score", std::string(measure_name(m)) + ": " + std::to_string(res.table.scores.size()) + " scored, " +
                       std::to_string(res.skipped.size()) + " skipped");
    }
    return outputs;
  }

  std::vector<std::string> classify() {
    if (!cfg_.contextual_embeddings) {
      throw Error(ErrorCode::kMissingDependency, "stage 'classify' requires inputs.contextual_embeddings");
    }
    auto sets = load_sets();
    auto labels = load_labels();
    auto table = EmbeddingTable::read(*cfg_.contextual_embeddings);
    std::vector<TermExample> data;
    for (const auto& c : pick_set(sets, cfg_.classifier_set).members) {
      const auto* l = labels.find(c.surface);
      if (!l || (l->status != LabelStatus::kAwt && l->status != LabelStatus::kNawt)) continue;
      auto records = table.contextual(c.surface, Layer::kLast);
      if (records.empty()) records = table.contextual(c.surface);
      if (records.empty()) continue;
      TermExample t;
      t.term = c.surface;
      t.label = l->status == LabelStatus::kAwt ? 1 : 0;
      for (size_t i = 0; i < records.size() && i < cfg_.classifier.contexts_per_term; ++i) {
        t.contexts.emplace_back(records[i].second->begin(), records[i].second->end());
      }
      data.push_back(std::move(t));
    }
    auto split = split_terms(data.size(), derive_seed(stage_seed("classify"), 1), cfg_.train_fraction,
                             cfg_.dev_fraction);
    if (split.train.empty()) throw Error(ErrorCode::kInvalidArgument, "classifier training split is empty");
    std::vector<TermExample> train_set;
    for (size_t i : split.train) train_set.push_back(data[i]);
    TrainConfig tc = cfg_.classifier;
    tc.seed = stage_seed("classify");
    auto trained = train(train_set, tc);
    trained.net.write(out_ / "classifier_model.json");
    {
      std::ofstream out(out_ / "classifier_loss.csv", std::ios::binary | std::ios::trunc);
      write_loss_trace(out, trained.loss_trace);
    }
    std::vector<std::string> split_of(data.size(), "test");
    for (size_t i : split.train) split_of[i] = "train";
    for (size_t i : split.dev) split_of[i] = "dev";
    std::ofstream out(out_ / "classifier_predictions.tsv", std::ios::binary | std::ios::trunc);
    out << "term\tlabel\tsplit\tmean_score\tpredicted\n";
    char buf[64];
    for (size_t i = 0; i < data.size(); ++i) {
      auto p = predict_term(trained.net, data[i].contexts, cfg_.classifier_threshold,
                            cfg_.classifier.contexts_per_term);
      std::snprintf(buf, sizeof buf, "%.17g", p.mean_score);
      out << data[i].term << '\t' << (data[i].label ? "AWT" : "NAWT") << '\t' << split_of[i] << '\t' << buf << '\t'
          << (p.ambiguous ? "AWT" : "NAWT") << '\n';
    }
    say("classify", std::to_string(data.size()) + " terms, " + std::to_string(split.train.size()) + " for training");
    return {"classifier_loss.csv", "classifier_model.json", "classifier_predictions.tsv"};
  }

  std::vector<std::string> cluster() {
    auto store = load_store();
    auto sets = load_sets();
    auto labels = load_labels();
    const CandidateSet& base = cfg_.cluster_n == 1 ? sets.lnnp1 : cfg_.cluster_n == 2 ? sets.lnnp2 : sets.lnnp3;
    auto aug = build_augmented_set(base, labels, store, cfg_.aug_min_freq);
    if (aug.augmented.members.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "augmented set " + aug.augmented.name + " is empty");
    }
    WordFormLexicon lexicon = cfg_.lexicon ? WordFormLexicon::load(*cfg_.lexicon) : WordFormLexicon{};
    std::optional<EmbeddingTable> static_table, contextual_table;
    const ClusterMode mode = cfg_.clustering.mode;
    if (mode == ClusterMode::kStaticAgg || mode == ClusterMode::kStaticHar) {
      if (!cfg_.static_embeddings) {
        throw Error(ErrorCode::kMissingDependency, "stage 'cluster' requires inputs.static_embeddings");
      }
      static_table = EmbeddingTable::read(*cfg_.static_embeddings);
    } else if (mode == ClusterMode::kContextualHar) {
      if (!cfg_.contextual_embeddings) {
        throw Error(ErrorCode::kMissingDependency, "stage 'cluster' requires inputs.contextual_embeddings");
      }
      contextual_table = EmbeddingTable::read(*cfg_.contextual_embeddings);
    }

    ClusteringInputs in;
    for (const auto& c : aug.augmented.members) in.surfaces.push_back(c.surface);
    in.lexicon = &lexicon;
    in.static_table = static_table ? &*static_table : nullptr;
    in.contextual_table = contextual_table ? &*contextual_table : nullptr;
    in.store = &store;

    std::map<std::string, std::vector<std::string>> by_title;
    for (const auto& s : in.surfaces) {
      const auto* l = labels.find(s);
      by_title[l && l->canonical_title ? *l->canonical_title : "\x01" + s].push_back(s);
    }
    ClusteringOptions opts = cfg_.clustering;
    opts.k = cfg_.cluster_k.value_or(by_title.size());
    opts.seed = stage_seed("cluster");
    auto solution = run_clustering(in, opts);
    solution.write(out_ / "clusters.json");

    std::set<std::string> clustered;
    for (const auto& c : solution.clusters) clustered.insert(c.begin(), c.end());
    Partition gold;
    for (auto& [_, members] : by_title) {
      std::vector<std::string> kept;
      for (const auto& m : members) {
        if (clustered.count(m)) kept.push_back(m);
      }
      gold.push_back(std::move(kept));
    }
    write_partition_file(out_ / "gold_clusters.json", canonical_partition(std::move(gold)), "labels");
    say("cluster", std::to_string(in.surfaces.size()) + " surfaces into " + std::to_string(solution.clusters.size()) +
                       " clusters, " + std::to_string(solution.filtered.size()) + " filtered");
    return {"clusters.json", "gold_clusters.json"};
  }

  std::vector<std::string> rank() {
    auto store = load_store();
    auto labels = load_labels();
    auto solution = ClusteringSolution::read(out_ / "clusters.json");
    auto ranked = rank_by_frequency(solution.clusters, store);
    attach_inlinks(ranked, labels);
    write_ranked_tsv(out_ / "ranking.tsv", ranked);
    return {"ranking.tsv"};
  }

  EvalReport report(const std::string& task, const std::string& method) const {
    EvalReport r;
    r.task = task;
    r.method = method;
    r.config_digest = config_digest_;
    return r;
  }

  std::vector<std::string> evaluate() {
    auto labels = load_labels();
    std::vector<EvalReport> reports;

    for (Measure m : cfg_.measures) {
      if (!available("score", score_file(m))) continue;
      {
        auto table = read_score_table(out_ / score_file(m));
        // Termhood: NAWT positive, non-WT negative; everything else is out.
        ScoreTable term_table{table.measure, table.direction, {}};
        std::map<std::string, bool> positive;
        std::vector<double> wt_scores, wt_ambiguous;
        for (const auto& [surface, score] : table.scores) {
          const auto* l = labels.find(surface);
          if (!l) continue;
          if (l->status == LabelStatus::kNawt || l->status == LabelStatus::kNonWt) {
            term_table.scores.emplace(surface, score);
            positive.emplace(surface, l->status == LabelStatus::kNawt);
          }
          if (l->status == LabelStatus::kNawt || l->status == LabelStatus::kAwt) {
            wt_scores.push_back(score);
            wt_ambiguous.push_back(l->status == LabelStatus::kAwt ? 1.0 : 0.0);
          }
        }
        EvalReport r = report("termhood", std::string(measure_name(m)));
        for (const auto& [_, p] : positive) (p ? r.n_pos : r.n_neg) += 1;
        if (!term_table.scores.empty()) {
          Confusion c = confusion_at_k(term_table, positive);
          r.k = r.n_pos;
          r.metrics["accuracy"] = c.accuracy();
          r.metrics["tp"] = static_cast<double>(c.tp);
          r.metrics["fp"] = static_cast<double>(c.fp);
          r.metrics["tn"] = static_cast<double>(c.tn);
          r.metrics["fn"] = static_cast<double>(c.fn);
          EvalReport base = report("termhood", std::string(measure_name(m)) + "/majority");
          base.n_pos = r.n_pos;
          base.n_neg = r.n_neg;
          base.metrics["accuracy"] = majority_baseline(r.n_pos, r.n_neg);
          reports.push_back(r);
          reports.push_back(base);
        }
        if (m == Measure::kContextVariance && wt_scores.size() >= 2) {
          EvalReport amb = report("ambiguity", "CV");
          for (double a : wt_ambiguous) (a > 0 ? amb.n_pos : amb.n_neg) += 1;
          try {
            amb.metrics["spearman"] = spearman(wt_scores, wt_ambiguous);
            reports.push_back(amb);
          } catch (const Error& e) {
            say("eval", std::string("CV spearman skipped: ") + e.what());
          }
        }
      }
    }

    if (available("classify", "classifier_predictions.tsv")) {
      std::ifstream in(out_ / "classifier_predictions.tsv");
      std::string line;
      std::getline(in, line);
      size_t correct = 0, total = 0, pos = 0;
      while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string term, gold, split, score, predicted;
        std::getline(ls, term, '\t');
        std::getline(ls, gold, '\t');
        std::getline(ls, split, '\t');
        std::getline(ls, score, '\t');
        std::getline(ls, predicted, '\t');
        if (split != "test") continue;
        ++total;
        pos += gold == "AWT" ? 1 : 0;
        correct += gold == predicted ? 1 : 0;
      }
      if (total > 0) {
        EvalReport r = report("ambiguity", "DeepSets");
        r.n_pos = pos;
        r.n_neg = total - pos;
        r.metrics["accuracy"] = static_cast<double>(correct) / static_cast<double>(total);
        EvalReport base = report("ambiguity", "majority");
        base.n_pos = r.n_pos;
        base.n_neg = r.n_neg;
        base.metrics["accuracy"] = majority_baseline(pos, total - pos);
        reports.push_back(r);
        reports.push_back(base);
      }
    }

    if (available("cluster", "clusters.json") && fs::exists(out_ / "gold_clusters.json")) {
      auto solution = ClusteringSolution::read(out_ / "clusters.json");
      auto gold = read_partition_file(out_ / "gold_clusters.json");
      EvalReport r = report("clustering", std::string(cluster_mode_name(solution.mode)));
      r.k = solution.k;
      r.metrics["ari"] = adjusted_rand_index(solution.clusters, gold);
      auto b = bcubed(solution.clusters, gold);
      r.metrics["bcubed_precision"] = b.precision;
      r.metrics["bcubed_recall"] = b.recall;
      r.metrics["bcubed_f1"] = b.f1;
      reports.push_back(r);
    }

    if (available("rank", "ranking.tsv")) {
      auto store = load_store();
      auto solution = ClusteringSolution::read(out_ / "clusters.json");
      auto ranked = rank_by_frequency(solution.clusters, store);
      try {
        EvalReport r = report("ranking", "frequency");
        r.metrics["inlink_spearman"] = inlink_correlation(ranked, labels);
        reports.push_back(r);
      } catch (const Error& e) {
        say("eval", std::string("inlink correlation skipped: ") + e.what());
      }
    }

    std::ostringstream js, txt;
    write_reports_json(js, reports);
    write_reports_text(txt, reports);
    write_file_atomic(out_ / "report.json", js.str());
    write_file_atomic(out_ / "report.txt", txt.str());
    return {"report.json", "report.txt"};
  }

  const PipelineConfig& cfg_;
  fs::path out_;
  std::ostream* log_;
  bool single_ = false;
  std::string config_digest_;
  PipelineResult result_;
};

}  // namespace

bool PipelineConfig::stage_enabled(std::string_view stage) const {
  return std::find(disabled_stages.begin(), disabled_stages.end(), stage) == disabled_stages.end();
}

PipelineConfig PipelineConfig::from_json_text(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"seed", "out", "inputs", "ingest", "thresholds", "score", "classifier", "clustering", "labels", "stages"});
  PipelineConfig c;
  read_key(j, "seed", c.seed, "config");
  std::optional<fs::path> out;
  read_path(j, "out", out, base_dir, "config");
  if (out) c.out = *out;

  if (j.contains("inputs")) {
    const json& in = j.at("inputs");
    check_keys(in, "inputs",
               {"corpus", "np_annotations", "stopwords", "snapshot", "fixture_wiki", "endpoint", "static_embeddings",
                "contextual_embeddings", "lexicon"});
    std::optional<fs::path> corpus;
    read_path(in, "corpus", corpus, base_dir, "inputs");
    if (corpus) c.corpus = *corpus;
    read_path(in, "np_annotations", c.np_annotations, base_dir, "inputs");
    read_path(in, "stopwords", c.stopwords, base_dir, "inputs");
    read_path(in, "snapshot", c.snapshot, base_dir, "inputs");
    read_path(in, "fixture_wiki", c.fixture_wiki, base_dir, "inputs");
    std::string endpoint;
    read_key(in, "endpoint", endpoint, "inputs");
    if (!endpoint.empty()) c.endpoint = endpoint;
    read_path(in, "static_embeddings", c.static_embeddings, base_dir, "inputs");
    read_path(in, "contextual_embeddings", c.contextual_embeddings, base_dir, "inputs");
    read_path(in, "lexicon", c.lexicon, base_dir, "inputs");
  }
  if (j.contains("ingest")) {
    const json& s = j.at("ingest");
    check_keys(s, "ingest", {"sample_size", "min_tokens"});
    read_key(s, "sample_size", c.sample_size, "ingest");
    read_key(s, "min_tokens", c.min_tokens, "ingest");
  }
  if (j.contains("thresholds")) {
    const json& s = j.at("thresholds");
    check_keys(s, "thresholds", {"unigram", "bigram", "trigram", "aug"});
    read_key(s, "unigram", c.thresholds.unigram, "thresholds");
    read_key(s, "bigram", c.thresholds.bigram, "thresholds");
    read_key(s, "trigram", c.thresholds.trigram, "thresholds");
    read_key(s, "aug", c.aug_min_freq, "thresholds");
  }
  if (j.contains("score")) {
    const json& s = j.at("score");
    check_keys(s, "score", {"measures", "cv_sample_size"});
    if (s.contains("measures")) {
      if (!s.at("measures").is_array()) config_error("score.measures must be an array");
      c.measures.clear();
      for (const auto& m : s.at("measures")) {
        if (!m.is_string()) config_error("score.measures entries must be strings");
        try {
          c.measures.push_back(parse_measure(m.get<std::string>()));
        } catch (const Error& e) {
          config_error(e.what());
        }
      }
    }
    read_key(s, "cv_sample_size", c.cv_sample_size, "score");
  }
  if (j.contains("classifier")) {
    const json& s = j.at("classifier");
    check_keys(s, "classifier",
               {"set", "learning_rate", "epochs", "batch_size", "contexts_per_term", "hidden", "activation",
                "momentum", "threshold", "train_fraction", "dev_fraction"});
    read_key(s, "set", c.classifier_set, "classifier");
    read_key(s, "learning_rate", c.classifier.learning_rate, "classifier");
    read_key(s, "epochs", c.classifier.epochs, "classifier");
    read_key(s, "batch_size", c.classifier.batch_size, "classifier");
    read_key(s, "contexts_per_term", c.classifier.contexts_per_term, "classifier");
    read_key(s, "hidden", c.classifier.hidden, "classifier");
    std::string act;
    read_key(s, "activation", act, "classifier");
    if (!act.empty()) {
      try {
        c.classifier.activation = parse_activation(act);
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
    read_key(s, "momentum", c.classifier.momentum, "classifier");
    read_key(s, "threshold", c.classifier_threshold, "classifier");
    read_key(s, "train_fraction", c.train_fraction, "classifier");
    read_key(s, "dev_fraction", c.dev_fraction, "classifier");
  }
  if (j.contains("clustering")) {
    const json& s = j.at("clustering");
    check_keys(s, "clustering", {"mode", "k", "restarts", "n", "contextual_sentences", "tf_contexts", "tf_features"});
    std::string mode;
    read_key(s, "mode", mode, "clustering");
    if (!mode.empty()) {
      try {
        c.clustering.mode = parse_cluster_mode(mode);
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
    if (s.contains("k")) {
      const json& k = s.at("k");
      if (k.is_string() && k.get<std::string>() == "gold") c.cluster_k.reset();
      else if (k.is_number_unsigned() && k.get<size_t>() > 0) c.cluster_k = k.get<size_t>();
      else config_error("clustering.k must be a positive integer or \"gold\"");
    }
    read_key(s, "restarts", c.clustering.restarts, "clustering");
    read_key(s, "n", c.cluster_n, "clustering");
    read_key(s, "contextual_sentences", c.clustering.contextual_sentences, "clustering");
    read_key(s, "tf_contexts", c.clustering.tf_contexts, "clustering");
    read_key(s, "tf_features", c.clustering.tf_features, "clustering");
  }
  if (j.contains("labels")) {
    const json& s = j.at("labels");
    check_keys(s, "labels", {"created_at", "concurrency", "requests_per_second"});
    read_key(s, "created_at", c.created_at, "labels");
    read_key(s, "concurrency", c.label_concurrency, "labels");
    read_key(s, "requests_per_second", c.label_rps, "labels");
  }
  if (j.contains("stages")) {
    const json& s = j.at("stages");
    if (!s.is_object()) config_error("stages must be an object");
    for (auto it = s.begin(); it != s.end(); ++it) {
      const auto& names = pipeline_stages();
      if (std::find(names.begin(), names.end(), it.key()) == names.end()) {
        config_error("unknown stage '" + it.key() + "'");
      }
      if (!it.value().is_boolean()) config_error("stages." + it.key() + " must be a boolean");
      if (!it.value().get<bool>()) c.disabled_stages.push_back(it.key());
    }
  }

  if (c.cluster_n < 1 || c.cluster_n > 3) config_error("clustering.n must be 1, 2 or 3");
  if (c.classifier.epochs == 0 || c.classifier.batch_size == 0 || c.classifier.contexts_per_term == 0 ||
      c.classifier.hidden == 0 || !(c.classifier.learning_rate > 0)) {
    config_error("classifier settings must be positive");
  }
  if (c.clustering.restarts == 0) config_error("clustering.restarts must be positive");
  if (c.sample_size == 0) config_error("ingest.sample_size must be positive");
  try {
    (void)pick_set(LnnpSets{}, c.classifier_set);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    config_error("cannot read config " + path.string());
  }
  return from_json_text(text, fs::absolute(path).parent_path());
}

void PipelineConfig::validate(std::optional<std::string_view> only_stage) const {
  if (out.empty()) config_error("no output directory configured");
  auto runs = [&](std::string_view stage) { return only_stage ? *only_stage == stage : stage_enabled(stage); };
  auto need = [](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::exists(*p)) config_error(std::string(what) + " not found: " + p->string());
  };
  if (runs("ingest")) {
    if (corpus.empty()) config_error("inputs.corpus is required");
    need(corpus, "inputs.corpus");
  }
  need(np_annotations, "inputs.np_annotations");
  need(stopwords, "inputs.stopwords");
  need(snapshot, "inputs.snapshot");
  need(fixture_wiki, "inputs.fixture_wiki");
  need(static_embeddings, "inputs.static_embeddings");
  need(contextual_embeddings, "inputs.contextual_embeddings");
  need(lexicon, "inputs.lexicon");
  if (runs("label") && !snapshot && !fixture_wiki && !endpoint) {
    config_error("stage 'label' needs inputs.snapshot, inputs.fixture_wiki or inputs.endpoint");
  }
}

std::string PipelineConfig::canonical_json() const {
  ojson j;
  j["seed"] = seed;
  ojson in;
  in["corpus"] = nullable(corpus.empty() ? std::nullopt : file_digest(corpus));
  in["np_annotations"] = nullable(file_digest(np_annotations));
  in["stopwords"] = nullable(file_digest(stopwords));
  in["snapshot"] = nullable(file_digest(snapshot));
  in["fixture_wiki"] = nullable(file_digest(fixture_wiki));
  in["endpoint"] = nullable(endpoint);
  in["static_embeddings"] = nullable(file_digest(static_embeddings));
  in["contextual_embeddings"] = nullable(file_digest(contextual_embeddings));
  in["lexicon"] = nullable(file_digest(lexicon));
  j["inputs"] = std::move(in);
  j["ingest"] = {{"sample_size", sample_size}, {"min_tokens", min_tokens}};
  j["thresholds"] = {{"unigram", thresholds.unigram},
                     {"bigram", thresholds.bigram},
                     {"trigram", thresholds.trigram},
                     {"aug", aug_min_freq}};
  ojson measures = ojson::array();
  for (Measure m : this->measures) measures.push_back(measure_name(m));
  j["score"] = {{"measures", measures}, {"cv_sample_size", cv_sample_size}};
  j["classifier"] = {{"set", classifier_set},
                     {"learning_rate", classifier.learning_rate},
                     {"epochs", classifier.epochs},
                     {"batch_size", classifier.batch_size},
                     {"contexts_per_term", classifier.contexts_per_term},
                     {"hidden", classifier.hidden},
                     {"activation", activation_name(classifier.activation)},
                     {"momentum", classifier.momentum},
                     {"threshold", classifier_threshold},
                     {"train_fraction", train_fraction},
                     {"dev_fraction", dev_fraction}};
  j["clustering"] = {{"mode", cluster_mode_name(clustering.mode)},
                     {"k", cluster_k ? ojson(*cluster_k) : ojson("gold")},
                     {"restarts", clustering.restarts},
                     {"n", cluster_n},
                     {"contextual_sentences", clustering.contextual_sentences},
                     {"tf_contexts", clustering.tf_contexts},
                     {"tf_features", clustering.tf_features}};
  j["labels"] = {{"created_at", created_at}, {"concurrency", label_concurrency}};
  ojson stages;
  for (const auto& s : pipeline_stages()) stages[s] = stage_enabled(s);
  j["stages"] = std::move(stages);
  return j.dump();
}

std::string PipelineConfig::digest() const { return sha256_hex(canonical_json()); }

std::string_view stage_status_name(StageStatus s) {
  switch (s) {
    case StageStatus::kRan:
      return "ran";
    case StageStatus::kCached:
      return "cached";
    case StageStatus::kDisabled:
      return "disabled";
    case StageStatus::kFailed:
      return "failed";
  }
  return "?";
}

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log) {
  config.validate();
  fs::create_directories(config.out);
  DirLock lock(config.out / ".lock");
  Runner runner(config, log);
  return runner.run();
}

std::vector<ManifestEntry> run_single_stage(const PipelineConfig& config, std::string_view stage,
                                            std::ostream* log) {
  const auto& names = pipeline_stages();
  if (std::find(names.begin(), names.end(), stage) == names.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown stage '" + std::string(stage) + "'");
  }
  config.validate(stage);
  fs::create_directories(config.out);
  DirLock lock(config.out / ".lock");
  Runner runner(config, log, true);
  return runner.run_one(std::string(stage));
}

Partition read_partition_file(const fs::path& path) {
  try {
    json j = json::parse(read_file(path));
    const json& arr = j.is_array() ? j : j.at("clusters");
    return canonical_partition(arr.get<Partition>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

void write_partition_file(const fs::path& path, const Partition& partition, std::string_view source) {
  ojson j;
  j["source"] = source;
  j["clusters"] = partition;
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace termforge
