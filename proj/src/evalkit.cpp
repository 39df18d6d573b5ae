#include "authcurr/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "authcurr/error.hpp"
#include "authcurr/miner.hpp"

namespace authcurr {

TaskMode parse_task_mode(const std::string& name) {
  if (name == "per_genre" || name == "per") return TaskMode::per_genre;
  if (name == "cross_genre" || name == "cross") return TaskMode::cross_genre;
  throw ConfigError("unknown task mode '" + name + "' (expected per_genre|cross_genre)");
}

std::string to_string(TaskMode mode) {
  return mode == TaskMode::per_genre ? "per_genre" : "cross_genre";
}

std::string RetrievalTask::signature() const {
  std::uint64_t h = derive_seed(0, to_string(mode));
  for (const Query& q : queries) {
    h = derive_seed(h, q.query_id);
    for (const auto& d : q.doc_ids) h = derive_seed(h, d);
    auto it = targets.find(q.query_id);
    if (it != targets.end()) {
      for (const auto& t : it->second) h = derive_seed(h, t);
    }
  }
  h = derive_seed(h, haystack.size());
  for (const auto& d : haystack) h = derive_seed(h, d);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Documents of one author grouped by genre; genres sorted, documents in
// corpus order.
std::map<std::string, std::vector<std::string>> docs_by_genre(const Corpus& corpus,
                                                              const std::string& author) {
  std::map<std::string, std::vector<std::string>> out;
  for (const Document* d : corpus.author_documents(author)) out[d->genre].push_back(d->doc_id);
  return out;
}

}  // namespace

RetrievalTask build_task(const Corpus& corpus, TaskMode mode, std::uint64_t seed,
                         std::size_t min_query_docs) {
  if (min_query_docs < 1) throw ConfigError("min_query_docs must be >= 1");
  RetrievalTask task;
  task.mode = mode;
  std::set<std::string> query_docs;
  for (const auto& [author, positions] : corpus.author_index()) {
    if (positions.size() < 2) continue;
    const auto genres = docs_by_genre(corpus, author);
    std::vector<std::string> candidates;
    for (const auto& [genre, docs] : genres) {
      const bool ok = mode == TaskMode::per_genre
                          ? docs.size() >= min_query_docs + 1
                          : genres.size() >= 2 && docs.size() >= min_query_docs;
      if (ok) candidates.push_back(genre);
    }
    if (candidates.empty()) continue;

    std::mt19937_64 rng(derive_seed(seed, author));
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::string& genre = candidates[pick(rng)];

    Query q{"q:" + author, author, {}};
    std::set<std::string> targets;
    if (mode == TaskMode::per_genre) {
      std::vector<std::string> docs = genres.at(genre);
      std::shuffle(docs.begin(), docs.end(), rng);
      q.doc_ids.assign(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(min_query_docs));
      targets.insert(docs.begin() + static_cast<std::ptrdiff_t>(min_query_docs), docs.end());
    } else {
      q.doc_ids = genres.at(genre);
      for (const auto& [g, docs] : genres) {
        if (g != genre) targets.insert(docs.begin(), docs.end());
      }
    }
    std::sort(q.doc_ids.begin(), q.doc_ids.end());
    query_docs.insert(q.doc_ids.begin(), q.doc_ids.end());
    task.targets.emplace(q.query_id, std::move(targets));
    task.queries.push_back(std::move(q));
  }
  if (task.queries.empty()) {
    throw DataError("no authors eligible for a " + to_string(mode) + " task");
  }
  for (const Document& d : corpus.documents()) {
    if (!query_docs.count(d.doc_id)) task.haystack.push_back(d.doc_id);
  }
  std::sort(task.haystack.begin(), task.haystack.end());
  return task;
}

void validate_task(const RetrievalTask& task, const Corpus& corpus) {
  if (!std::is_sorted(task.haystack.begin(), task.haystack.end())) {
    throw DataError("task haystack is not sorted");
  }
  auto in_haystack = [&task](const std::string& id) {
    return std::binary_search(task.haystack.begin(), task.haystack.end(), id);
  };
  for (const std::string& id : task.haystack) corpus.at(id);
  for (const Query& q : task.queries) {
    if (q.doc_ids.empty()) throw DataError("query " + q.query_id + " has no documents");
    std::set<std::string> query_genres;
    for (const std::string& id : q.doc_ids) {
      const Document& d = corpus.at(id);
      if (in_haystack(id)) throw DataError("query document " + id + " is in the haystack");
      if (d.author_id != q.author_id) {
        throw DataError("query document " + id + " is not by " + q.author_id);
      }
      query_genres.insert(d.genre);
    }
    auto it = task.targets.find(q.query_id);
    if (it == task.targets.end() || it->second.empty()) {
      throw DataError("query " + q.query_id + " has no targets");
    }
    for (const std::string& id : it->second) {
      const Document& d = corpus.at(id);
      if (!in_haystack(id)) throw DataError("target " + id + " is not in the haystack");
      if (d.author_id != q.author_id) throw DataError("target " + id + " is not by " + q.author_id);
      const bool shares = query_genres.count(d.genre) > 0;
      if (task.mode == TaskMode::per_genre && (!shares || query_genres.size() != 1)) {
        throw DataError("per-genre target " + id + " does not share the query genre");
      }
      if (task.mode == TaskMode::cross_genre && shares) {
        throw DataError("cross-genre target " + id + " shares a genre with its query");
      }
    }
  }
}

namespace {

Vector unit_projection(const ProjectionModel& model, const Document& doc) {
  return l2_normalize(project(model, doc.base_embedding));
}

Vector mean_direction(const std::vector<Vector>& unit_vectors) {
  Vector mean(unit_vectors.front().size(), 0.0);
  for (const Vector& v : unit_vectors) {
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (double& x : mean) x /= static_cast<double>(unit_vectors.size());
  return l2_normalize(mean);
}

}  // namespace

Vector query_vector(const ProjectionModel& model, const Corpus& corpus,
                    std::span<const std::string> query_docs) {
  if (query_docs.empty()) throw DataError("query has no documents");
  std::vector<Vector> units;
  for (const std::string& id : query_docs) units.push_back(unit_projection(model, corpus.at(id)));
  return mean_direction(units);
}

std::vector<std::string> rank_haystack(const ProjectionModel& model, const Corpus& corpus,
                                       std::span<const std::string> query_docs,
                                       std::span<const std::string> haystack) {
  if (haystack.empty()) throw DataError("empty haystack");
  const Vector q = query_vector(model, corpus, query_docs);
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(haystack.size());
  for (const std::string& id : haystack) {
    scored.emplace_back(dot(q, unit_projection(model, corpus.at(id))), &id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(*s.second);
  return out;
}

int success_at_k(std::span<const std::string> ranking, const std::set<std::string>& targets,
                 std::size_t k) {
  if (k < 1) throw ConfigError("success_at_k: k must be >= 1");
  const std::size_t n = std::min(k, ranking.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (targets.count(ranking[i])) return 1;
  }
  return 0;
}

double mrr(std::span<const std::string> ranking, const std::set<std::string>& targets) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (targets.count(ranking[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

std::map<std::string, std::pair<double, double>> MetricsReport::by_genre() const {
  std::map<std::string, std::pair<double, double>> sums;
  std::map<std::string, std::size_t> counts;
  for (const QueryOutcome& q : per_query) {
    auto& s = sums[q.genre];
    s.first += q.success_at_8;
    s.second += q.reciprocal_rank;
    ++counts[q.genre];
  }
  for (auto& [genre, s] : sums) {
    s.first /= static_cast<double>(counts[genre]);
    s.second /= static_cast<double>(counts[genre]);
  }
  return sums;
}

MetricsReport evaluate(const ProjectionModel& model, const Corpus& corpus,
                       const RetrievalTask& task) {
  validate_task(task, corpus);
  const std::size_t h = task.haystack.size();
  if (h == 0) throw DataError("empty haystack");

  std::vector<Vector> hay;
  hay.reserve(h);
  for (const std::string& id : task.haystack) hay.push_back(unit_projection(model, corpus.at(id)));

  MetricsReport report;
  report.mode = to_string(task.mode);
  report.task_signature = task.signature();
  std::vector<double> sims(h);
  for (const Query& q : task.queries) {
    const Vector qv = query_vector(model, corpus, q.doc_ids);
    for (std::size_t j = 0; j < h; ++j) sims[j] = dot(qv, hay[j]);

    // Rank of the best target under (similarity desc, doc_id asc); the
    // haystack is sorted by doc_id so index order is id order.
    const auto& targets = task.targets.at(q.query_id);
    std::size_t best = h;
    for (const std::string& t : targets) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(task.haystack.begin(), task.haystack.end(), t) - task.haystack.begin());
      if (best == h || sims[pos] > sims[best] || (sims[pos] == sims[best] && pos < best)) {
        best = pos;
      }
    }
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < h; ++j) {
      if (sims[j] > sims[best] || (sims[j] == sims[best] && j < best)) ++ahead;
    }
    const std::size_t rank = ahead + 1;
    QueryOutcome outcome{q.query_id, q.author_id, corpus.at(q.doc_ids.front()).genre,
                         rank <= 8 ? 1.0 : 0.0, 1.0 / static_cast<double>(rank)};
    report.success_at_8 += outcome.success_at_8;
    report.mrr += outcome.reciprocal_rank;
    report.per_query.push_back(std::move(outcome));
  }
  report.num_queries = task.queries.size();
  if (report.num_queries > 0) {
    report.success_at_8 /= static_cast<double>(report.num_queries);
    report.mrr /= static_cast<double>(report.num_queries);
  }
  return report;
}

MetricsReport average_runs(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw DataError("average_runs needs at least one report");
  MetricsReport out = reports.front();
  for (const MetricsReport& r : reports.subspan(1)) {
    if (r.task_signature != out.task_signature || r.per_query.size() != out.per_query.size()) {
      throw DataError("average_runs: reports come from different tasks");
    }
  }
  const double n = static_cast<double>(reports.size());
  out.success_at_8 = 0.0;
  out.mrr = 0.0;
  for (auto& q : out.per_query) q.success_at_8 = q.reciprocal_rank = 0.0;
  for (const MetricsReport& r : reports) {
    out.success_at_8 += r.success_at_8;
    out.mrr += r.mrr;
    for (std::size_t i = 0; i < r.per_query.size(); ++i) {
      out.per_query[i].success_at_8 += r.per_query[i].success_at_8;
      out.per_query[i].reciprocal_rank += r.per_query[i].reciprocal_rank;
    }
  }
  out.success_at_8 /= n;
  out.mrr /= n;
  for (auto& q : out.per_query) {
    q.success_at_8 /= n;
    q.reciprocal_rank /= n;
  }
  return out;
}

void write_metrics(std::ostream& out, const MetricsReport& report, const std::string& label) {
  using nlohmann::json;
  out << json{{"label", label},
              {"mode", report.mode},
              {"scope", "all"},
              {"success_at_8", report.success_at_8},
              {"mrr", report.mrr},
              {"num_queries", report.num_queries},
              {"task", report.task_signature}}
             .dump()
      << '\n';
  for (const auto& [genre, m] : report.by_genre()) {
    out << json{{"label", label},
                {"mode", report.mode},
                {"scope", genre},
                {"success_at_8", m.first},
                {"mrr", m.second},
                {"task", report.task_signature}}
               .dump()
        << '\n';
  }
}

void print_metrics_table(std::ostream& out,
                         const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::size_t label_w = 5;
  for (const auto& [label, r] : rows) label_w = std::max(label_w, label.size());
  auto line = [&](const std::string& label, const std::string& mode, const std::string& genre,
                  const std::string& queries, const std::string& s8, const std::string& mrr_s) {
    out << std::left << std::setw(static_cast<int>(label_w) + 2) << label << std::setw(13) << mode
        << std::setw(12) << genre << std::right << std::setw(8) << queries << std::setw(11) << s8
        << std::setw(9) << mrr_s << '\n';
  };
  auto fixed3 = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << v;
    return s.str();
  };
  line("label", "mode", "genre", "queries", "Success@8", "MRR");
  for (const auto& [label, r] : rows) {
    std::map<std::string, std::size_t> counts;
    for (const auto& q : r.per_query) ++counts[q.genre];
    for (const auto& [genre, m] : r.by_genre()) {
      line(label, r.mode, genre, std::to_string(counts[genre]), fixed3(m.first), fixed3(m.second));
    }
    line(label, r.mode, "average", std::to_string(r.num_queries), fixed3(r.success_at_8),
         fixed3(r.mrr));
  }
}

}  // namespace authcurr
