#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "authcurr/corpus.hpp"
#include "authcurr/projection.hpp"

namespace authcurr {

enum class TaskMode { per_genre, cross_genre };

TaskMode parse_task_mode(const std::string& name);
std::string to_string(TaskMode mode);

struct Query {
  std::string query_id;
  std::string author_id;
  std::vector<std::string> doc_ids;
};

// Queries, their target sets, and the shared haystack. The haystack is kept
// sorted by doc_id.
struct RetrievalTask {
  TaskMode mode = TaskMode::per_genre;
  std::vector<Query> queries;
  std::map<std::string, std::set<std::string>> targets;  // query_id -> doc ids
  std::vector<std::string> haystack;

  // Stable fingerprint of mode, queries, targets and haystack.
  std::string signature() const;
};

// One query per eligible author, split with a per-author seeded draw.
// per_genre: `min_query_docs` documents of one genre query, the remaining
// documents of that genre are targets. cross_genre: all documents of one
// genre query, the author's documents in every other genre are targets.
// Every non-query document is in the haystack.
RetrievalTask build_task(const Corpus& corpus, TaskMode mode, std::uint64_t seed,
                         std::size_t min_query_docs = 1);

// Throws DataError when a task invariant does not hold against `corpus`.
void validate_task(const RetrievalTask& task, const Corpus& corpus);

// Mean of the query documents' projected unit vectors, renormalised.
Vector query_vector(const ProjectionModel& model, const Corpus& corpus,
                    std::span<const std::string> query_docs);

// Haystack by cosine to the query vector, descending, ties by doc_id.
std::vector<std::string> rank_haystack(const ProjectionModel& model, const Corpus& corpus,
                                       std::span<const std::string> query_docs,
                                       std::span<const std::string> haystack);

int success_at_k(std::span<const std::string> ranking, const std::set<std::string>& targets,
                 std::size_t k = 8);
double mrr(std::span<const std::string> ranking, const std::set<std::string>& targets);

struct QueryOutcome {
  std::string query_id;
  std::string author_id;
  std::string genre;  // genre of the query documents (first one if mixed)
  double success_at_8 = 0.0;
  double reciprocal_rank = 0.0;
};

struct MetricsReport {
  std::string mode;
  std::string task_signature;
  double success_at_8 = 0.0;
  double mrr = 0.0;
  std::size_t num_queries = 0;
  std::vector<QueryOutcome> per_query;

  // Means restricted to queries of each genre.
  std::map<std::string, std::pair<double, double>> by_genre() const;
};

MetricsReport evaluate(const ProjectionModel& model, const Corpus& corpus,
                       const RetrievalTask& task);

// Field-wise mean; every report must come from the same task.
MetricsReport average_runs(std::span<const MetricsReport> reports);

// One JSON record per line: aggregate rows, then per-genre rows.
void write_metrics(std::ostream& out, const MetricsReport& report, const std::string& label);

// Aligned table: one row per genre plus an "average" row.
void print_metrics_table(std::ostream& out, const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace authcurr
