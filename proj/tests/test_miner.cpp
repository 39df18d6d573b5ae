#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "authcurr/error.hpp"
#include "authcurr/miner.hpp"
#include "support.hpp"

using namespace authcurr;
using testutil::Rng;
using testutil::doc;

namespace {

std::vector<const Document*> pointers(const std::vector<Document>& docs) {
  std::vector<const Document*> out;
  for (const Document& d : docs) out.push_back(&d);
  return out;
}

// Three unit vectors with prescribed pairwise cosines, via the Cholesky
// factor of their Gram matrix.
std::vector<Vector> with_cosines(double ab, double ac, double bc) {
  const Vector a{1, 0, 0};
  const Vector b{ab, std::sqrt(1 - ab * ab), 0};
  const double c1 = ac;
  const double c2 = (bc - ab * ac) / b[1];
  return {a, b, {c1, c2, std::sqrt(1 - c1 * c1 - c2 * c2)}};
}

// Brute-force oracle: every unordered pair, cosine from the definition.
TrainingPair oracle_pair(const std::string& author, std::vector<const Document*> docs) {
  std::sort(docs.begin(), docs.end(),
            [](const Document* x, const Document* y) { return x->doc_id < y->doc_id; });
  TrainingPair best{author, "", "", 2.0};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = i + 1; j < docs.size(); ++j) {
      const auto& u = docs[i]->base_embedding;
      const auto& v = docs[j]->base_embedding;
      double uv = 0, uu = 0, vv = 0;
      for (std::size_t d = 0; d < u.size(); ++d) {
        uv += u[d] * v[d];
        uu += u[d] * u[d];
        vv += v[d] * v[d];
      }
      const double sim = std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
      // Strict < keeps the lexicographically first pair among equals.
      if (sim < best.base_similarity) best = {author, docs[i]->doc_id, docs[j]->doc_id, sim};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("two documents always form the pair") {
  const std::vector<Document> docs{doc("z", "a", "g", {1, 0}), doc("y", "a", "g", {1, 0.1})};
  const PairChoice p = min_similarity_pair(pointers(docs));
  CHECK(p.doc_a == "y");
  CHECK(p.doc_b == "z");
  CHECK(p.similarity > 0.99);
}

TEST_CASE("least similar of three pairs") {
  const auto v = with_cosines(0.9, 0.1, 0.5);
  const std::vector<Document> docs{doc("a", "x", "g", v[0]), doc("b", "x", "g", v[1]),
                                   doc("c", "x", "g", v[2])};
  const PairChoice p = min_similarity_pair(pointers(docs));
  CHECK(p.doc_a == "a");
  CHECK(p.doc_b == "c");
  CHECK(p.similarity == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("equal similarities resolve to the lexicographically first pair") {
  const std::vector<Document> docs{doc("d3", "x", "g", {1, 1}), doc("d1", "x", "g", {1, 1}),
                                   doc("d4", "x", "g", {1, 1}), doc("d2", "x", "g", {1, 1})};
  const PairChoice p = min_similarity_pair(pointers(docs));
  CHECK(p.doc_a == "d1");
  CHECK(p.doc_b == "d2");
}

TEST_CASE("a single document cannot form a pair") {
  const std::vector<Document> docs{doc("a", "x", "g", {1})};
  CHECK_THROWS_AS(min_similarity_pair(pointers(docs)), DataError);
}

TEST_CASE("hard mode excludes authors above the ceiling") {
  const auto v = with_cosines(0.35, 0.6, 0.7);
  const Corpus c({doc("x1", "x", "g", v[0]), doc("x2", "x", "g", v[1]), doc("x3", "x", "g", v[2]),
                  doc("y1", "y", "g", {1, 0, 0}), doc("y2", "y", "g", {0, 1, 0})});
  const auto pairs = select_training_pairs(c, {MinerMode::hard, 0.2, 1});
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].author_id == "y");
  const auto all = select_training_pairs(c, {MinerMode::hard, 1.0, 1});
  REQUIRE(all.size() == 2);
  CHECK(all[0].author_id == "x");
  CHECK(all[0].base_similarity == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("ceiling comparison is inclusive") {
  const Corpus c({doc("p", "x", "g", {1, 0.3}), doc("q", "x", "g", {0.2, 1})});
  const double s = min_similarity_pair(c.author_documents("x")).similarity;
  CHECK(select_training_pairs(c, {MinerMode::hard, s, 1}).size() == 1);
  CHECK(select_training_pairs(c, {MinerMode::hard, std::nextafter(s, 0.0), 1}).empty());
}

TEST_CASE("random mode is seeded and picks a real pair") {
  const Corpus c({doc("a", "x", "g", {1, 0}), doc("b", "x", "g", {0, 1}), doc("c", "x", "g", {1, 1}),
                  doc("s", "lone", "g", {1, 0})});
  std::set<std::pair<std::string, std::string>> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const auto p1 = select_training_pairs(c, {MinerMode::random, 0.2, seed});
    const auto p2 = select_training_pairs(c, {MinerMode::random, 0.2, seed});
    REQUIRE(p1.size() == 1);
    CHECK(p1 == p2);
    CHECK(p1[0].doc_a < p1[0].doc_b);
    seen.emplace(p1[0].doc_a, p1[0].doc_b);
  }
  CHECK(seen == std::set<std::pair<std::string, std::string>>{{"a", "b"}, {"a", "c"}, {"b", "c"}});
}

TEST_CASE("miner config validation") {
  CHECK_THROWS_AS((MinerConfig{MinerMode::hard, 0.0, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((MinerConfig{MinerMode::hard, 1.5, 1}.validate()), ConfigError);
  CHECK_NOTHROW((MinerConfig{MinerMode::random, 0.0, 1}.validate()));
  CHECK(parse_miner_mode("random") == MinerMode::random);
  CHECK_THROWS_AS(parse_miner_mode("easy"), ConfigError);
}

TEST_CASE("property: hard mode equals the brute-force oracle") {
  Rng rng(2024);
  for (int t = 0; t < 40; ++t) {
    const Corpus c = testutil::random_corpus(
        {.authors = 25, .min_docs = 1, .max_docs = 50, .dim = testutil::uniform(rng, 2, 8)}, rng);
    const auto pairs = select_training_pairs(c, {MinerMode::hard, 1.0, 0});
    std::size_t eligible = 0;
    auto it = pairs.begin();
    for (const auto& [author, positions] : c.author_index()) {
      if (positions.size() < 2) continue;
      ++eligible;
      REQUIRE(it != pairs.end());
      const TrainingPair want = oracle_pair(author, c.author_documents(author));
      CHECK(*it == want);
      ++it;
    }
    CHECK(pairs.size() == eligible);
  }
}

TEST_CASE("property: raising the ceiling only adds authors") {
  Rng rng(7);
  const double ceilings[] = {0.05, 0.1, 0.2, 0.4, 0.6, 0.9, 1.0};
  for (int t = 0; t < 30; ++t) {
    const Corpus c = testutil::random_corpus({.authors = 40, .min_docs = 2, .dim = 3}, rng);
    std::set<std::string> previous;
    for (double ceiling : ceilings) {
      std::set<std::string> current;
      for (const auto& p : select_training_pairs(c, {MinerMode::hard, ceiling, 0})) {
        CHECK(current.insert(p.author_id).second);
        CHECK(c.at(p.doc_a).author_id == p.author_id);
        CHECK(c.at(p.doc_b).author_id == p.author_id);
        CHECK(p.doc_a < p.doc_b);
        CHECK(p.base_similarity <= ceiling);
      }
      CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
      previous = std::move(current);
    }
  }
}

TEST_CASE("pairs round trip through the line format") {
  const std::vector<TrainingPair> pairs{{"a", "a1", "a2", 0.125}, {"b", "b0", "b9", -0.3}};
  std::ostringstream out;
  write_pairs(out, pairs);
  std::istringstream in(out.str());
  CHECK(read_pairs(in) == pairs);
  std::istringstream bad("{\"author_id\":\"a\"}\n");
  CHECK_THROWS_AS(read_pairs(bad), DataError);
}

TEST_CASE("derived seeds are stable and key-sensitive") {
  CHECK(derive_seed(42, "alice") == derive_seed(42, "alice"));
  CHECK(derive_seed(42, "alice") != derive_seed(42, "bob"));
  CHECK(derive_seed(42, "alice") != derive_seed(43, "alice"));
  CHECK(derive_seed(1, std::uint64_t{2}) != derive_seed(1, std::uint64_t{3}));
}
