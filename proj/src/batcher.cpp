#include "authcurr/batcher.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "authcurr/error.hpp"

namespace authcurr {

BatchStrategy parse_batch_strategy(const std::string& name) {
  if (name == "hard") return BatchStrategy::hard;
  if (name == "random") return BatchStrategy::random;
  throw ConfigError("unknown batching strategy '" + name + "' (expected hard|random)");
}

std::string to_string(BatchStrategy strategy) {
  return strategy == BatchStrategy::hard ? "hard" : "random";
}

void BatchConfig::validate() const {
  if (clusters_per_batch < 1) throw ConfigError("clusters_per_batch must be >= 1");
  if (batch_size < clusters_per_batch) {
    throw ConfigError("batch_size must be >= clusters_per_batch");
  }
  if (neighbor_cap < 1) throw ConfigError("neighbor_cap must be >= 1");
}

std::size_t BatchConfig::cluster_capacity() const {
  return (batch_size + clusters_per_batch - 1) / clusters_per_batch;
}

PlanDimensions plan_dimensions(std::size_t num_authors, const BatchConfig& config) {
  config.validate();
  const std::size_t batches = (num_authors + config.batch_size - 1) / config.batch_size;
  return {batches, batches * config.clusters_per_batch};
}

void LabeledVectors::add(const std::string& doc_id, const std::string& author_id,
                         std::span<const double> vector) {
  unit.add_row(doc_id, l2_normalize(vector));
  author_of.push_back(author_id);
}

std::size_t BatchPlan::num_authors() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.size();
  return n;
}

namespace {

std::size_t nearest_row(std::span<const double> unit_query, const VectorMatrix& unit_rows) {
  std::size_t best = 0;
  double best_sim = -2.0;
  for (std::size_t i = 0; i < unit_rows.rows(); ++i) {
    const double s = dot(unit_query, unit_rows.row(i));
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  return best;
}

struct Claim {
  std::size_t owner;
  std::size_t item;
};

struct RoundRobin {
  std::vector<std::vector<Claim>> claims;
  std::vector<bool> stalled;
  std::vector<bool> owner_taken;
};

// Every seed repeatedly claims the owner of its nearest unclaimed item, one
// claim per visit, until a full pass over the seeds claims nothing.
RoundRobin round_robin_grow(const std::vector<Vector>& unit_seeds, const VectorMatrix& unit_items,
                            const std::vector<std::size_t>& owner_of, std::size_t num_owners,
                            std::size_t capacity, std::size_t cap) {
  const std::size_t k = unit_seeds.size();
  std::vector<std::vector<Neighbor>> lists(k);
  for (std::size_t s = 0; s < k; ++s) lists[s] = topk_by_dot(unit_seeds[s], unit_items, cap);

  RoundRobin rr{std::vector<std::vector<Claim>>(k), std::vector<bool>(k, false),
                std::vector<bool>(num_owners, false)};
  std::vector<std::size_t> cursor(k, 0);
  bool added = true;
  while (added) {
    added = false;
    for (std::size_t s = 0; s < k; ++s) {
      if (rr.claims[s].size() >= capacity || rr.stalled[s]) continue;
      const auto& list = lists[s];
      std::size_t& pos = cursor[s];
      while (pos < list.size() && rr.owner_taken[owner_of[list[pos].row]]) ++pos;
      if (pos == list.size()) {
        rr.stalled[s] = true;
        continue;
      }
      const std::size_t owner = owner_of[list[pos].row];
      rr.owner_taken[owner] = true;
      rr.claims[s].push_back({owner, list[pos].row});
      ++pos;
      added = true;
    }
  }
  return rr;
}

std::size_t pick_open_slot(const std::vector<double>& score, const std::vector<std::size_t>& size,
                           std::vector<std::size_t>& capacity, std::size_t& relax_cursor) {
  const std::size_t k = score.size();
  std::size_t best = k;
  for (std::size_t c = 0; c < k; ++c) {
    if (size[c] >= capacity[c]) continue;
    if (best == k || score[c] > score[best]) best = c;
  }
  if (best == k) {
    best = relax_cursor % k;
    ++relax_cursor;
    ++capacity[best];
  }
  return best;
}

}  // namespace

std::vector<Centroid> seed_centroids(const LabeledVectors& docs, std::size_t num_centroids,
                                     std::uint64_t seed) {
  std::unordered_set<std::string> authors(docs.author_of.begin(), docs.author_of.end());
  if (num_centroids > authors.size()) {
    throw DataError("seed_centroids: " + std::to_string(num_centroids) + " centroids but only " +
                    std::to_string(authors.size()) + " authors");
  }
  const KMeansResult km = kmeans(docs.unit, num_centroids, seed);
  std::vector<Centroid> out;
  out.reserve(num_centroids);
  for (const Vector& c : km.centroids) {
    const Vector unit = l2_normalize(c);
    out.push_back({c, docs.author_of[nearest_row(unit, docs.unit)]});
  }
  return out;
}

std::vector<Centroid> dedupe_centroids(std::vector<Centroid> centroids,
                                       const LabeledVectors& docs) {
  std::unordered_set<std::string> anchors;
  for (const Centroid& c : centroids) anchors.insert(c.anchor_author);
  std::unordered_set<std::string> seen;
  for (Centroid& c : centroids) {
    if (seen.insert(c.anchor_author).second) continue;
    const Vector unit = l2_normalize(c.vector);
    std::size_t best = docs.rows();
    double best_sim = -2.0;
    for (std::size_t i = 0; i < docs.rows(); ++i) {
      if (anchors.count(docs.author_of[i])) continue;
      const double s = dot(unit, docs.unit.row(i));
      if (s > best_sim) {
        best_sim = s;
        best = i;
      }
    }
    if (best == docs.rows()) {
      throw DataError("dedupe_centroids: fewer authors than centroids");
    }
    const auto row = docs.unit.row(best);
    c.vector.assign(row.begin(), row.end());
    c.anchor_author = docs.author_of[best];
    anchors.insert(c.anchor_author);
    seen.insert(c.anchor_author);
  }
  return centroids;
}

GrowthResult grow_clusters(const std::vector<Centroid>& centroids, const LabeledVectors& docs,
                           const BatchConfig& config) {
  config.validate();
  std::unordered_map<std::string, std::size_t> owner_index;
  std::vector<std::string> owners;
  std::vector<std::size_t> owner_of(docs.rows());
  for (std::size_t i = 0; i < docs.rows(); ++i) {
    auto [it, fresh] = owner_index.emplace(docs.author_of[i], owners.size());
    if (fresh) owners.push_back(docs.author_of[i]);
    owner_of[i] = it->second;
  }

  std::vector<Vector> seeds;
  seeds.reserve(centroids.size());
  for (const Centroid& c : centroids) seeds.push_back(l2_normalize(c.vector));

  const std::size_t capacity = config.cluster_capacity();
  RoundRobin rr =
      round_robin_grow(seeds, docs.unit, owner_of, owners.size(), capacity, config.neighbor_cap);

  GrowthResult result;
  result.clusters.reserve(centroids.size());
  for (std::size_t s = 0; s < centroids.size(); ++s) {
    ClusterSpec spec;
    spec.centroid = centroids[s].vector;
    spec.capacity = capacity;
    spec.stalled = rr.stalled[s];
    for (const Claim& claim : rr.claims[s]) {
      spec.member_authors.push_back(owners[claim.owner]);
      spec.center_docs.push_back(docs.unit.id(claim.item));
    }
    result.clusters.push_back(std::move(spec));
  }
  for (std::size_t o = 0; o < owners.size(); ++o) {
    if (!rr.owner_taken[o]) result.unassigned.push_back(owners[o]);
  }
  return result;
}

std::vector<ClusterSpec> assign_leftovers(std::vector<ClusterSpec> clusters,
                                          const std::vector<std::string>& unassigned_authors,
                                          const LabeledVectors& docs) {
  if (unassigned_authors.empty()) return clusters;
  if (clusters.empty()) throw DataError("assign_leftovers: no clusters to place authors into");

  std::unordered_map<std::string, std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < docs.rows(); ++i) rows_of[docs.author_of[i]].push_back(i);

  const std::size_t k = clusters.size();
  std::vector<Vector> unit_centroids;
  unit_centroids.reserve(k);
  for (const ClusterSpec& c : clusters) unit_centroids.push_back(l2_normalize(c.centroid));

  std::vector<std::size_t> capacity(k), size(k);
  for (std::size_t c = 0; c < k; ++c) {
    capacity[c] = clusters[c].capacity;
    size[c] = clusters[c].member_authors.size();
  }
  std::size_t relax_cursor = 0;
  std::vector<double> score(k);
  std::vector<std::size_t> best_doc(k);
  for (const std::string& author : unassigned_authors) {
    auto it = rows_of.find(author);
    if (it == rows_of.end()) throw DataError("assign_leftovers: no vectors for author " + author);
    for (std::size_t c = 0; c < k; ++c) {
      score[c] = -2.0;
      for (std::size_t row : it->second) {
        const double s = dot(unit_centroids[c], docs.unit.row(row));
        if (s > score[c]) {
          score[c] = s;
          best_doc[c] = row;
        }
      }
    }
    const std::size_t c = pick_open_slot(score, size, capacity, relax_cursor);
    clusters[c].member_authors.push_back(author);
    clusters[c].center_docs.push_back(docs.unit.id(best_doc[c]));
    clusters[c].capacity = capacity[c];
    ++size[c];
  }
  return clusters;
}

std::vector<std::vector<std::string>> rebalance_batches(
    const std::vector<std::vector<std::string>>& groups, std::size_t batch_size) {
  std::vector<std::vector<std::string>> out;
  for (const auto& group : groups) {
    for (const std::string& author : group) {
      if (out.empty() || out.back().size() == batch_size) {
        out.emplace_back();
        out.back().reserve(batch_size);
      }
      out.back().push_back(author);
    }
  }
  return out;
}

BatchPlan group_into_batches(const std::vector<ClusterSpec>& clusters, const BatchConfig& config,
                             std::uint64_t seed) {
  config.validate();
  BatchPlan plan;
  if (clusters.empty()) return plan;
  std::size_t total = 0;
  for (const ClusterSpec& c : clusters) total += c.member_authors.size();
  const std::size_t k = clusters.size();
  const std::size_t num_batches = std::min(plan_dimensions(total, config).num_batches, k);

  VectorMatrix unit_centroids;
  for (std::size_t c = 0; c < k; ++c) {
    unit_centroids.add_row(std::to_string(c), l2_normalize(clusters[c].centroid));
  }
  std::vector<std::size_t> identity(k);
  std::iota(identity.begin(), identity.end(), 0);

  const KMeansResult km = kmeans(unit_centroids, std::max<std::size_t>(num_batches, 1), seed);
  std::vector<Vector> seeds;
  for (const Vector& c : km.centroids) seeds.push_back(l2_normalize(c));

  // Row ids are decimal strings, so tie-breaking inside topk compares them
  // lexicographically; harmless since every cluster ends up placed.
  RoundRobin rr = round_robin_grow(seeds, unit_centroids, identity, k,
                                   config.clusters_per_batch, k);
  std::vector<std::vector<std::size_t>> members(seeds.size());
  std::vector<std::size_t> size(seeds.size()), capacity(seeds.size(), config.clusters_per_batch);
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (const Claim& claim : rr.claims[s]) members[s].push_back(claim.owner);
    size[s] = members[s].size();
  }
  std::size_t relax_cursor = 0;
  std::vector<double> score(seeds.size());
  for (std::size_t c = 0; c < k; ++c) {
    if (rr.owner_taken[c]) continue;
    for (std::size_t s = 0; s < seeds.size(); ++s) score[s] = dot(seeds[s], unit_centroids.row(c));
    const std::size_t s = pick_open_slot(score, size, capacity, relax_cursor);
    members[s].push_back(c);
    ++size[s];
  }

  std::vector<std::vector<std::string>> groups(seeds.size());
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (std::size_t c : members[s]) {
      const ClusterSpec& spec = clusters[c];
      groups[s].insert(groups[s].end(), spec.member_authors.begin(), spec.member_authors.end());
      for (std::size_t m = 0; m < spec.member_authors.size() && m < spec.center_docs.size(); ++m) {
        plan.center_docs[spec.member_authors[m]] = spec.center_docs[m];
      }
    }
  }
  plan.batches = rebalance_batches(groups, config.batch_size);
  return plan;
}

std::string plan_source(std::size_t epoch) {
  if (epoch <= 1) return "untrained-projection";
  return "model-after-epoch-" + std::to_string(epoch - 1);
}

BatchPlan random_batch_plan(const std::vector<TrainingPair>& pairs, const BatchConfig& config,
                            std::size_t epoch) {
  config.validate();
  std::vector<std::string> authors;
  authors.reserve(pairs.size());
  for (const TrainingPair& p : pairs) authors.push_back(p.author_id);
  std::mt19937_64 rng(derive_seed(config.seed, epoch));
  std::shuffle(authors.begin(), authors.end(), rng);
  BatchPlan plan;
  plan.epoch = epoch;
  plan.source = "shuffle";
  plan.batches = rebalance_batches({authors}, config.batch_size);
  return plan;
}

BatchPlan build_epoch_plan(const std::vector<TrainingPair>& pairs,
                           const VectorMatrix& vectors_for_epoch, const BatchConfig& config,
                           std::size_t epoch) {
  config.validate();
  if (epoch < 1) throw ConfigError("epoch numbering starts at 1");
  if (config.strategy == BatchStrategy::random) return random_batch_plan(pairs, config, epoch);

  std::unordered_map<std::string, std::size_t> row_of;
  row_of.reserve(vectors_for_epoch.rows());
  for (std::size_t i = 0; i < vectors_for_epoch.rows(); ++i) row_of[vectors_for_epoch.id(i)] = i;

  LabeledVectors docs;
  for (const TrainingPair& p : pairs) {
    for (const std::string* doc : {&p.doc_a, &p.doc_b}) {
      auto it = row_of.find(*doc);
      if (it == row_of.end()) {
        throw DataError("no epoch vector for document '" + *doc + "' of author " + p.author_id);
      }
      docs.add(*doc, p.author_id, vectors_for_epoch.row(it->second));
    }
  }

  BatchPlan plan;
  plan.epoch = epoch;
  plan.source = plan_source(epoch);
  if (pairs.empty()) return plan;

  const PlanDimensions dims = plan_dimensions(pairs.size(), config);
  const std::size_t num_centroids = std::min(dims.num_centroids, pairs.size());
  const std::uint64_t epoch_seed = derive_seed(config.seed, epoch);

  auto centroids = dedupe_centroids(seed_centroids(docs, num_centroids, epoch_seed), docs);
  for (const Centroid& c : centroids) plan.anchors.push_back(c.anchor_author);
  GrowthResult grown = grow_clusters(centroids, docs, config);
  auto clusters = assign_leftovers(std::move(grown.clusters), grown.unassigned, docs);
  BatchPlan grouped = group_into_batches(clusters, config, derive_seed(epoch_seed, "batches"));
  plan.batches = std::move(grouped.batches);
  plan.center_docs = std::move(grouped.center_docs);
  return plan;
}

void write_plan(std::ostream& out, const BatchPlan& plan, const BatchConfig& config) {
  out << "# epoch=" << plan.epoch << " seed=" << config.seed
      << " batch_size=" << config.batch_size
      << " clusters_per_batch=" << config.clusters_per_batch
      << " neighbor_cap=" << config.neighbor_cap << " strategy=" << to_string(config.strategy)
      << " source=" << plan.source << '\n';
  for (const auto& batch : plan.batches) {
    for (std::size_t i = 0; i < batch.size(); ++i) out << (i ? " " : "") << batch[i];
    out << '\n';
  }
}

}  // namespace authcurr
