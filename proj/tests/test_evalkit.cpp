#include <doctest.h>

#include <cmath>
#include <sstream>

#include "authcurr/error.hpp"
#include "authcurr/evalkit.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace authcurr;
using testutil::Rng;
using testutil::doc;

namespace {

// Identity on the first D/2 coordinates of a D-dimensional input.
ProjectionModel leading_coordinates(std::size_t input_dim) {
  Matrix w(input_dim / 2, input_dim);
  for (std::size_t i = 0; i < input_dim / 2; ++i) w(i, i) = 1.0;
  return ProjectionModel(w);
}

std::vector<std::string> ids(std::initializer_list<const char*> list) {
  return {list.begin(), list.end()};
}

MetricsReport report_with(double s8, double mrr_value, const std::string& sig = "t") {
  MetricsReport r;
  r.task_signature = sig;
  r.success_at_8 = s8;
  r.mrr = mrr_value;
  return r;
}

}  // namespace

TEST_CASE("cross-genre task needs two genres") {
  const Corpus c({doc("a", "x", "g", {1, 0}), doc("b", "x", "g", {0, 1})});
  CHECK_THROWS_AS(build_task(c, TaskMode::cross_genre, 1), DataError);
  CHECK_THROWS_AS(build_task(c, TaskMode::per_genre, 1, 0), ConfigError);
}

TEST_CASE("cross-genre split of a three-document author") {
  const Corpus c({doc("a", "x", "g1", {1, 0}), doc("b", "x", "g1", {0, 1}),
                  doc("c", "x", "g2", {1, 1})});
  std::set<std::vector<std::string>> seen;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const RetrievalTask t = build_task(c, TaskMode::cross_genre, seed);
    REQUIRE(t.queries.size() == 1);
    const auto& q = t.queries[0];
    seen.insert(q.doc_ids);
    if (q.doc_ids == ids({"c"})) {
      CHECK(t.targets.at(q.query_id) == std::set<std::string>{"a", "b"});
      CHECK(t.haystack == ids({"a", "b"}));
    } else {
      CHECK(q.doc_ids == ids({"a", "b"}));
      CHECK(t.targets.at(q.query_id) == std::set<std::string>{"c"});
      CHECK(t.haystack == ids({"c"}));
    }
    validate_task(t, c);
  }
  CHECK(seen.size() == 2);
}

TEST_CASE("per-genre split with two documents") {
  const Corpus c({doc("a", "x", "g", {1, 0}), doc("b", "x", "g", {0, 1}), doc("z", "y", "g", {1, 1})});
  const RetrievalTask t = build_task(c, TaskMode::per_genre, 3);
  REQUIRE(t.queries.size() == 1);
  CHECK(t.queries[0].doc_ids.size() == 1);
  CHECK(t.targets.at(t.queries[0].query_id).size() == 1);
  // The lone document of y is a distractor.
  CHECK(t.haystack.size() == 2);
  CHECK(std::binary_search(t.haystack.begin(), t.haystack.end(), "z"));
}

TEST_CASE("property: tasks satisfy their invariants") {
  Rng rng(404);
  for (int t = 0; t < 60; ++t) {
    const Corpus c = testutil::random_corpus({.authors = 30, .max_docs = 8}, rng);
    for (TaskMode mode : {TaskMode::per_genre, TaskMode::cross_genre}) {
      const std::uint64_t seed = rng();
      RetrievalTask task;
      try {
        task = build_task(c, mode, seed, t % 2 ? 1 : 2);
      } catch (const DataError&) {
        continue;
      }
      CHECK_NOTHROW(validate_task(task, c));
      CHECK(task.signature() == build_task(c, mode, seed, t % 2 ? 1 : 2).signature());
      std::set<std::string> query_docs;
      for (const auto& q : task.queries) query_docs.insert(q.doc_ids.begin(), q.doc_ids.end());
      CHECK(query_docs.size() + task.haystack.size() == c.size());
    }
  }
}

TEST_CASE("validate_task rejects broken tasks") {
  const Corpus c({doc("a", "x", "g1", {1, 0}), doc("b", "x", "g1", {0, 1}),
                  doc("c", "x", "g2", {1, 1}), doc("d", "y", "g1", {1, 2})});
  const RetrievalTask good = build_task(c, TaskMode::cross_genre, 1);
  validate_task(good, c);
  const std::string qid = good.queries[0].query_id;

  RetrievalTask t = good;
  t.targets[qid].clear();
  CHECK_THROWS_AS(validate_task(t, c), DataError);

  t = good;
  t.haystack.push_back(good.queries[0].doc_ids[0]);
  std::sort(t.haystack.begin(), t.haystack.end());
  CHECK_THROWS_AS(validate_task(t, c), DataError);

  t = good;
  t.targets[qid].insert("d");
  CHECK_THROWS_AS(validate_task(t, c), DataError);

  t = good;
  t.queries[0].doc_ids = {"missing"};
  CHECK_THROWS_AS(validate_task(t, c), DataError);

  t = good;
  t.mode = TaskMode::per_genre;
  CHECK_THROWS_AS(validate_task(t, c), DataError);

  t = good;
  std::reverse(t.haystack.begin(), t.haystack.end());
  if (t.haystack.size() > 1) CHECK_THROWS_AS(validate_task(t, c), DataError);
}

TEST_CASE("ranking examples") {
  const Corpus c({doc("q", "x", "g", {1, 2, 0, 0}), doc("dup", "x", "g", {2, 4, 9, 9}),
                  doc("e1", "y", "g", {1, 0, 0, 0}), doc("e2", "y", "g", {0, 1, 0, 0}),
                  doc("e3", "y", "g", {-1, -1, 0, 0})});
  const ProjectionModel m = leading_coordinates(4);
  const auto r = rank_haystack(m, c, ids({"q"}), ids({"e1", "e3", "dup", "e2"}));
  CHECK(r.front() == "dup");
  CHECK(r.back() == "e3");

  const Vector qv = query_vector(m, c, ids({"e1", "e2"}));
  CHECK(qv[0] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(qv[1] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK_THROWS_AS(rank_haystack(m, c, ids({"q"}), std::vector<std::string>{}), DataError);
  CHECK_THROWS_AS(rank_haystack(m, c, ids({"nope"}), ids({"e1"})), DataError);
}

TEST_CASE("ranking matches the full-sort oracle on twenty documents") {
  Rng rng(20);
  const Corpus c = testutil::random_corpus({.authors = 5, .min_docs = 4, .max_docs = 4, .dim = 6}, rng);
  REQUIRE(c.size() == 20);
  const ProjectionModel m = ProjectionModel::initialize(6, 2);
  std::vector<std::string> hay;
  for (std::size_t i = 2; i < c.size(); ++i) hay.push_back(c.documents()[i].doc_id);
  std::sort(hay.begin(), hay.end());
  const std::vector<std::string> query{c.documents()[0].doc_id, c.documents()[1].doc_id};
  CHECK(rank_haystack(m, c, query, hay) == oracle::full_sort_ranking(m, c, query, hay));
}

TEST_CASE("success_at_k and mrr examples") {
  std::vector<std::string> ranking;
  for (int i = 1; i <= 60; ++i) ranking.push_back("r" + std::to_string(i));
  CHECK(success_at_k(ranking, {"r1"}) == 1);
  CHECK(success_at_k(ranking, {"r9"}) == 0);
  CHECK(success_at_k(ranking, {"r9"}, 9) == 1);
  CHECK(success_at_k(ranking, {"r2", "r50", "r51"}) == 1);
  CHECK(success_at_k(ranking, {"absent"}) == 0);
  CHECK(success_at_k(std::vector<std::string>{"a"}, {"a"}, 8) == 1);
  CHECK_THROWS_AS(success_at_k(ranking, {"r1"}, 0), ConfigError);
  CHECK(mrr(ranking, {"r3"}) == doctest::Approx(1.0 / 3));
  CHECK(mrr(ranking, {"absent"}) == 0.0);
  CHECK(mrr(ranking, {"r4", "r2"}) == 0.5);
}

TEST_CASE("evaluate averages over queries") {
  // Query x hits its target first; query y's only target sits behind nine
  // closer distractors.
  std::vector<Document> docs{doc("xq", "x", "g", {1, 0, 0, 0}), doc("xt", "x", "g", {1, 0, 0, 0}),
                             doc("yq", "y", "g", {0, 1, 0, 0}), doc("yt", "y", "g", {0, -1, 0, 0})};
  for (int i = 0; i < 9; ++i) {
    docs.push_back(doc("z" + std::to_string(i), "z" + std::to_string(i), "g", {0.1, 1, 0, 0}));
  }
  const Corpus c(docs);
  RetrievalTask t;
  t.queries = {{"q:x", "x", {"xq"}}, {"q:y", "y", {"yq"}}};
  t.targets = {{"q:x", {"xt"}}, {"q:y", {"yt"}}};
  for (const auto& d : docs) {
    if (d.doc_id != "xq" && d.doc_id != "yq") t.haystack.push_back(d.doc_id);
  }
  std::sort(t.haystack.begin(), t.haystack.end());
  const MetricsReport r = evaluate(leading_coordinates(4), c, t);
  CHECK(r.num_queries == 2);
  CHECK(r.per_query[0].success_at_8 == 1.0);
  CHECK(r.per_query[1].success_at_8 == 0.0);
  CHECK(r.success_at_8 == 0.5);
  CHECK(r.per_query[1].reciprocal_rank == doctest::Approx(1.0 / 11));
  const MetricsReport again = evaluate(leading_coordinates(4), c, t);
  CHECK(again.success_at_8 == r.success_at_8);
  CHECK(again.mrr == r.mrr);
  CHECK(again.task_signature == r.task_signature);
}

TEST_CASE("average_runs") {
  const std::vector<MetricsReport> two{report_with(0.6, 0.2), report_with(0.4, 0.4)};
  CHECK(average_runs(two).success_at_8 == doctest::Approx(0.5));
  CHECK(average_runs(two).mrr == doctest::Approx(0.3));
  const std::vector<MetricsReport> one{report_with(0.7, 0.1)};
  CHECK(average_runs(one).success_at_8 == 0.7);
  const std::vector<MetricsReport> three{report_with(0.3, 0), report_with(0.3, 0), report_with(0.9, 0)};
  CHECK(average_runs(three).success_at_8 == doctest::Approx(0.5));
  const std::vector<MetricsReport> mixed{report_with(0.3, 0, "a"), report_with(0.3, 0, "b")};
  CHECK_THROWS_AS(average_runs(mixed), DataError);
  CHECK_THROWS_AS(average_runs(std::vector<MetricsReport>{}), DataError);
}

TEST_CASE("property: evaluate matches full-sort brute force on 200 documents") {
  Rng rng(200);
  for (int t = 0; t < 10; ++t) {
    const std::size_t dim = testutil::uniform(rng, 4, 12);
    const Corpus c = testutil::random_corpus(
        {.authors = 50, .min_docs = 4, .max_docs = 4, .dim = dim, .genres = 3}, rng);
    REQUIRE(c.size() == 200);
    const ProjectionModel m = ProjectionModel::initialize(dim, rng());
    for (TaskMode mode : {TaskMode::per_genre, TaskMode::cross_genre}) {
      const RetrievalTask task = build_task(c, mode, rng());
      const MetricsReport r = evaluate(m, c, task);
      double s8 = 0.0, rr = 0.0;
      for (std::size_t i = 0; i < task.queries.size(); ++i) {
        const Query& q = task.queries[i];
        const auto ranking = oracle::full_sort_ranking(m, c, q.doc_ids, task.haystack);
        CHECK(rank_haystack(m, c, q.doc_ids, task.haystack) == ranking);
        const auto& targets = task.targets.at(q.query_id);
        CHECK(r.per_query[i].success_at_8 == oracle::success_at(ranking, targets, 8));
        CHECK(r.per_query[i].reciprocal_rank == oracle::reciprocal_rank(ranking, targets));
        s8 += oracle::success_at(ranking, targets, 8);
        rr += oracle::reciprocal_rank(ranking, targets);
      }
      CHECK(r.success_at_8 == doctest::Approx(s8 / task.queries.size()).epsilon(1e-15));
      CHECK(r.mrr == doctest::Approx(rr / task.queries.size()).epsilon(1e-15));
    }
  }
}

TEST_CASE("property: success_at_k is monotone in k") {
  Rng rng(100);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = testutil::uniform(rng, 1, 40);
    std::vector<std::string> ranking;
    for (std::size_t i = 0; i < n; ++i) ranking.push_back("d" + std::to_string(i));
    std::shuffle(ranking.begin(), ranking.end(), rng);
    std::set<std::string> targets;
    const std::size_t m = testutil::uniform(rng, 0, 3);
    for (std::size_t i = 0; i < m; ++i) targets.insert("d" + std::to_string(testutil::uniform(rng, 0, n + 5)));
    int previous = 0;
    for (std::size_t k = 1; k <= n + 2; ++k) {
      const int v = success_at_k(ranking, targets, k);
      CHECK(v >= previous);
      previous = v;
    }
  }
}

TEST_CASE("property: metrics are invariant to rescaling the model") {
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    const Corpus c = testutil::random_corpus({.authors = 30, .min_docs = 3, .dim = 8}, rng);
    const RetrievalTask task = build_task(c, TaskMode::per_genre, rng());
    const ProjectionModel m = ProjectionModel::initialize(8, rng());
    ProjectionModel scaled = m;
    for (double& x : scaled.weight.data) x *= 4.0;
    const MetricsReport a = evaluate(m, c, task);
    const MetricsReport b = evaluate(scaled, c, task);
    CHECK(a.success_at_8 == b.success_at_8);
    CHECK(a.mrr == doctest::Approx(b.mrr).epsilon(1e-12));
  }
}

TEST_CASE("metrics output") {
  MetricsReport r = report_with(0.5, 0.25, "abc");
  r.mode = "per_genre";
  r.num_queries = 2;
  r.per_query = {{"q:a", "a", "news", 1.0, 0.5}, {"q:b", "b", "blog", 0.0, 0.0}};
  std::ostringstream out;
  write_metrics(out, r, "run");
  std::istringstream lines(out.str());
  std::string first;
  std::getline(lines, first);
  CHECK(first ==
        "{\"label\":\"run\",\"mode\":\"per_genre\",\"mrr\":0.25,\"num_queries\":2,\"scope\":\"all\","
        "\"success_at_8\":0.5,\"task\":\"abc\"}");
  std::size_t count = 1;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == 3);
  std::ostringstream table;
  print_metrics_table(table, {{"run", r}});
  CHECK(table.str().find("average") != std::string::npos);
  CHECK(table.str().find("0.500") != std::string::npos);
}
