#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "termforge/error.h"
#include "termforge/random.h"
#include "termforge/surface_clustering.h"

namespace termforge {
namespace {

struct Group {
  std::vector<std::string> members;
};

void normalize_rows(std::vector<std::vector<double>>& rows) {
  for (auto& r : rows) {
    double norm = std::sqrt(squared_norm(r));
    if (norm > 0) {
      for (auto& x : r) x /= norm;
    }
  }
}

// Vectors per group for the embedding-based modes. Groups whose members
// all lack vectors are dropped and their members reported.
void embed_groups(const std::vector<RbcCluster>& groups, const ClusteringInputs& inputs,
                  const ClusteringOptions& options, std::vector<Group>& kept,
                  std::vector<std::vector<double>>& vectors,
                  std::vector<FilteredCandidate>& filtered) {
  const bool contextual = options.mode == ClusterMode::kContextualHar;
  const EmbeddingTable* table = contextual ? inputs.contextual_table : inputs.static_table;
  if (!table) {
    throw Error(ErrorCode::kMissingDependency,
                std::string(contextual ? "contextual" : "static") + " embedding table is required for " +
                    std::string(cluster_mode_name(options.mode)));
  }
  for (const auto& g : groups) {
    std::vector<CandidateVector> member_vectors;
    Group group;
    for (const auto& surface : g.members) {
      try {
        if (contextual) {
          auto records = table->contextual(surface, options.contextual_layer);
          if (records.empty()) records = table->contextual(surface);
          std::vector<const std::vector<float>*> ptrs;
          for (size_t i = 0; i < records.size() && i < options.contextual_sentences; ++i) {
            ptrs.push_back(records[i].second);
          }
          member_vectors.push_back(compose_contextual(surface, ptrs));
        } else {
          Candidate c{surface, 0, 0};
          member_vectors.push_back(compose_static(c, *table));
        }
        group.members.push_back(surface);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMissingDependency && e.code() != ErrorCode::kNoContext) throw;
        filtered.push_back({surface, e.what()});
      }
    }
    if (member_vectors.empty()) continue;
    CandidateVector merged = merge_cluster_vectors(member_vectors);
    if (squared_norm(merged.vector) == 0) {
      for (const auto& s : group.members) filtered.push_back({s, "zero vector"});
      continue;
    }
    kept.push_back(std::move(group));
    vectors.push_back(std::move(merged.vector));
  }
}

}  // namespace

std::string_view cluster_method_name(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::kAggCosine: return "AGG_COSINE";
    case ClusterMethod::kHartigan: return "HARTIGAN";
    case ClusterMethod::kSib: return "SIB";
  }
  return "";
}

std::string_view cluster_mode_name(ClusterMode m) {
  switch (m) {
    case ClusterMode::kStaticAgg: return "STATIC_AGG";
    case ClusterMode::kStaticHar: return "STATIC_HAR";
    case ClusterMode::kTfSib: return "TF_SIB";
    case ClusterMode::kContextualHar: return "CONTEXTUAL_HAR";
  }
  return "";
}

ClusterMode parse_cluster_mode(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = (c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "STATIC_AGG") return ClusterMode::kStaticAgg;
  if (upper == "STATIC_HAR") return ClusterMode::kStaticHar;
  if (upper == "TF_SIB") return ClusterMode::kTfSib;
  if (upper == "CONTEXTUAL_HAR") return ClusterMode::kContextualHar;
  throw Error(ErrorCode::kInvalidArgument, "unknown clustering mode '" + std::string(name) + "'");
}

namespace {
ClusterMethod parse_method(std::string_view name) {
  if (name == "AGG_COSINE") return ClusterMethod::kAggCosine;
  if (name == "HARTIGAN") return ClusterMethod::kHartigan;
  if (name == "SIB") return ClusterMethod::kSib;
  throw Error(ErrorCode::kFormat, "unknown clustering method '" + std::string(name) + "'");
}
}  // namespace

Partition canonical_partition(Partition partition) {
  for (auto& c : partition) std::sort(c.begin(), c.end());
  partition.erase(std::remove_if(partition.begin(), partition.end(),
                                 [](const auto& c) { return c.empty(); }),
                  partition.end());
  std::sort(partition.begin(), partition.end());
  return partition;
}

void ClusteringSolution::write(std::ostream& out) const {
  nlohmann::ordered_json j;
  j["method"] = cluster_method_name(method);
  j["mode"] = cluster_mode_name(mode);
  j["k"] = k;
  j["seed"] = seed;
  j["restarts"] = restarts;
  j["clusters"] = clusters;
  nlohmann::ordered_json f = nlohmann::ordered_json::array();
  for (const auto& x : filtered) f.push_back({{"surface", x.surface}, {"reason", x.reason}});
  j["filtered"] = std::move(f);
  out << j.dump(2) << '\n';
}

void ClusteringSolution::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write(out);
}

ClusteringSolution ClusteringSolution::read(std::istream& in) {
  ClusteringSolution s;
  try {
    auto j = nlohmann::json::parse(in);
    s.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("mode")) s.mode = parse_cluster_mode(j["mode"].get<std::string>());
    s.k = j.at("k").get<size_t>();
    s.seed = j.at("seed").get<uint64_t>();
    s.restarts = j.value("restarts", size_t{0});
    s.clusters = j.at("clusters").get<Partition>();
    if (j.contains("filtered")) {
      for (const auto& f : j["filtered"]) {
        s.filtered.push_back({f.at("surface").get<std::string>(), f.value("reason", "")});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("clustering solution: ") + e.what());
  }
  return s;
}

ClusteringSolution ClusteringSolution::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read(in);
}

ClusteringSolution run_clustering(const ClusteringInputs& inputs, const ClusteringOptions& options) {
  if (options.k == 0) throw Error(ErrorCode::kDomain, "k must be at least 1");
  std::vector<RbcCluster> groups = rbc_merge(inputs.surfaces, inputs.lexicon);

  ClusteringSolution sol;
  sol.mode = options.mode;
  sol.seed = options.seed;
  sol.restarts = options.restarts;

  std::vector<Group> kept;
  Assignment labels;
  size_t k = options.k;

  if (options.mode == ClusterMode::kTfSib) {
    if (!inputs.store) throw Error(ErrorCode::kMissingDependency, "TF_SIB needs a sentence store");
    sol.method = ClusterMethod::kSib;
    std::vector<std::vector<std::vector<std::string>>> contexts;
    for (const auto& g : groups) {
      // Any member may stand in for the group; take the first that occurs.
      std::vector<std::vector<std::string>> sentences;
      for (const auto& surface : g.members) {
        if (inputs.store->frequency(surface) == 0) continue;
        ContextSet ctx = inputs.store->sample_contexts(surface, options.tf_contexts,
                                                       derive_seed(options.seed, surface));
        for (SentenceId id : ctx.ids) sentences.push_back(inputs.store->tokens(id));
        break;
      }
      if (sentences.empty()) {
        for (const auto& s : g.members) sol.filtered.push_back({s, "no context sentence"});
        continue;
      }
      kept.push_back({g.members});
      contexts.push_back(std::move(sentences));
    }
    if (kept.empty()) throw Error(ErrorCode::kNoContext, "no clusterable candidate");
    k = std::min(k, kept.size());
    TfFeatureSpace space = information_gain_features(contexts, options.tf_features);
    SibOptions sib;
    sib.k = k;
    sib.seed = options.seed;
    sib.restarts = options.restarts;
    // Zero-mass rows are filtered by sib_cluster; k cannot exceed the rest.
    size_t nonzero = 0;
    for (const auto& row : space.tf) {
      for (uint32_t c : row) {
        if (c) {
          ++nonzero;
          break;
        }
      }
    }
    if (nonzero == 0) throw Error(ErrorCode::kDegenerateContext, "every TF vector is empty");
    sib.k = k = std::min(k, nonzero);
    SibResult r = sib_cluster(space.tf, sib);
    for (size_t idx : r.filtered) {
      for (const auto& s : kept[idx].members) sol.filtered.push_back({s, "zero-mass TF vector"});
    }
    labels = std::move(r.labels);
  } else {
    std::vector<std::vector<double>> vectors;
    embed_groups(groups, inputs, options, kept, vectors, sol.filtered);
    if (kept.empty()) throw Error(ErrorCode::kMissingDependency, "no candidate has a vector");
    k = std::min(k, kept.size());
    if (options.mode == ClusterMode::kStaticAgg) {
      sol.method = ClusterMethod::kAggCosine;
      labels = agglomerative_cosine(vectors, k).labels;
    } else {
      sol.method = ClusterMethod::kHartigan;
      // Unit vectors make squared Euclidean distance a cosine distance.
      normalize_rows(vectors);
      HartiganOptions har;
      har.k = k;
      har.seed = options.seed;
      har.restarts = options.restarts;
      labels = hartigan_kmeans(vectors, har).labels;
    }
  }

  sol.k = k;
  Partition clusters(k);
  for (size_t g = 0; g < kept.size(); ++g) {
    if (labels[g] == kUnassigned) continue;
    auto& c = clusters[labels[g]];
    c.insert(c.end(), kept[g].members.begin(), kept[g].members.end());
  }
  sol.clusters = canonical_partition(std::move(clusters));
  std::sort(sol.filtered.begin(), sol.filtered.end(),
            [](const auto& a, const auto& b) { return a.surface < b.surface; });
  return sol;
}

}  // namespace termforge
