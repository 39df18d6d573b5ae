#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "authcurr/geometry.hpp"
#include "authcurr/miner.hpp"

namespace authcurr {

enum class BatchStrategy { hard, random };

BatchStrategy parse_batch_strategy(const std::string& name);
std::string to_string(BatchStrategy strategy);

struct BatchConfig {
  std::size_t batch_size = 74;
  std::size_t clusters_per_batch = 5;
  std::size_t neighbor_cap = 2024;
  std::uint64_t seed = 42;
  BatchStrategy strategy = BatchStrategy::hard;

  void validate() const;
  // ceil(batch_size / clusters_per_batch): C clusters fill one batch.
  std::size_t cluster_capacity() const;
};

struct PlanDimensions {
  std::size_t num_batches = 0;
  std::size_t num_centroids = 0;
};

PlanDimensions plan_dimensions(std::size_t num_authors, const BatchConfig& config);

// Unit-norm document vectors with the owning author of each row.
struct LabeledVectors {
  VectorMatrix unit;                   // row ids are doc ids
  std::vector<std::string> author_of;  // parallel to rows

  void add(const std::string& doc_id, const std::string& author_id,
           std::span<const double> vector);
  std::size_t rows() const { return unit.rows(); }
};

struct Centroid {
  Vector vector;
  std::string anchor_author;
};

// k-means over all documents; each centroid is anchored to the author of its
// nearest document (by cosine). Anchors may repeat until dedupe_centroids.
std::vector<Centroid> seed_centroids(const LabeledVectors& docs, std::size_t num_centroids,
                                     std::uint64_t seed);

// Walks the list in order; a centroid whose anchor is already taken moves to
// the nearest document of an author that anchors no centroid.
std::vector<Centroid> dedupe_centroids(std::vector<Centroid> centroids,
                                       const LabeledVectors& docs);

struct ClusterSpec {
  Vector centroid;
  std::vector<std::string> member_authors;
  // Per member: the document that brought the author in (nearest the centre).
  std::vector<std::string> center_docs;
  std::size_t capacity = 0;
  // Set when the neighbour list ran out before the cluster filled.
  bool stalled = false;
};

struct GrowthResult {
  std::vector<ClusterSpec> clusters;
  // Authors no cluster reached, in first-appearance order of `docs`.
  std::vector<std::string> unassigned;
};

GrowthResult grow_clusters(const std::vector<Centroid>& centroids, const LabeledVectors& docs,
                           const BatchConfig& config);

// Places each leftover in the open cluster whose centroid is closest to either
// of the author's documents; when every cluster is full, capacities are raised
// by one in round-robin order.
std::vector<ClusterSpec> assign_leftovers(std::vector<ClusterSpec> clusters,
                                          const std::vector<std::string>& unassigned_authors,
                                          const LabeledVectors& docs);

struct BatchPlan {
  std::vector<std::vector<std::string>> batches;
  std::size_t epoch = 1;
  std::string source;
  // author -> document on the cluster side (hard strategy only).
  std::map<std::string, std::string> center_docs;
  // Anchor author of every centroid after deduplication (hard strategy only).
  std::vector<std::string> anchors;

  std::size_t num_authors() const;
};

// Chunks the concatenation of `groups` into batches of exactly batch_size
// (the last may be short). Overflow spills into the following batch and
// underflow pulls from it.
std::vector<std::vector<std::string>> rebalance_batches(
    const std::vector<std::vector<std::string>>& groups, std::size_t batch_size);

BatchPlan group_into_batches(const std::vector<ClusterSpec>& clusters, const BatchConfig& config,
                             std::uint64_t seed);

// Provenance label of the vectors used to plan `epoch`.
std::string plan_source(std::size_t epoch);

BatchPlan random_batch_plan(const std::vector<TrainingPair>& pairs, const BatchConfig& config,
                            std::size_t epoch);

// Full plan for one epoch from `vectors_for_epoch` (row ids are doc ids).
// Dispatches on config.strategy.
BatchPlan build_epoch_plan(const std::vector<TrainingPair>& pairs,
                           const VectorMatrix& vectors_for_epoch, const BatchConfig& config,
                           std::size_t epoch);

void write_plan(std::ostream& out, const BatchPlan& plan, const BatchConfig& config);

}  // namespace authcurr
