#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "authcurr/error.hpp"
#include "authcurr/miner.hpp"
#include "authcurr/synth.hpp"
#include "oracles.hpp"

using namespace authcurr;

namespace {

std::string serialised(const Corpus& c) {
  std::ostringstream out;
  write_corpus(out, c);
  return out.str();
}

SynthConfig small(double alpha, double noise) {
  SynthConfig c;
  c.num_authors = 30;
  c.docs_per_author = 4;
  c.dim = 8;
  c.style_weight = alpha;
  c.noise_sigma = noise;
  return c;
}

}  // namespace

TEST_CASE("style-only corpus without noise") {
  const Corpus c = generate(small(1.0, 0.0));
  for (const auto& [author, positions] : c.author_index()) {
    const auto docs = c.author_documents(author);
    for (const Document* d : docs) CHECK(d->base_embedding == docs[0]->base_embedding);
    CHECK(min_similarity_pair(docs).similarity == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(select_training_pairs(c, {MinerMode::hard, 0.2, 1}).empty());
}

TEST_CASE("topic-only corpus without noise") {
  const Corpus c = generate(small(0.0, 0.0));
  std::map<std::string, Vector> by_topic;
  for (const Document& d : c.documents()) {
    auto [it, fresh] = by_topic.emplace(d.genre, d.base_embedding);
    if (!fresh) CHECK(it->second == d.base_embedding);
  }
  CHECK(by_topic.size() > 1);
}

TEST_CASE("same-topic documents of an author are closer than cross-topic ones") {
  SynthConfig cfg = small(0.5, 0.05);
  cfg.num_authors = 200;
  const Corpus c = generate(cfg);
  double same = 0.0, cross = 0.0;
  std::size_t n_same = 0, n_cross = 0;
  for (const auto& [author, positions] : c.author_index()) {
    const auto docs = c.author_documents(author);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      for (std::size_t j = i + 1; j < docs.size(); ++j) {
        const double s = oracle::dot(docs[i]->base_embedding, docs[j]->base_embedding);
        if (docs[i]->genre == docs[j]->genre) {
          same += s;
          ++n_same;
        } else {
          cross += s;
          ++n_cross;
        }
      }
    }
  }
  REQUIRE(n_same > 0);
  REQUIRE(n_cross > 0);
  CHECK(cross / n_cross < same / n_same);
}

TEST_CASE("generation is deterministic and unit norm") {
  const SynthConfig cfg = small(0.6, 0.1);
  const std::string a = serialised(generate(cfg));
  CHECK(a == serialised(generate(cfg)));
  SynthConfig other = cfg;
  other.seed = 43;
  CHECK(a != serialised(generate(other)));
  const Corpus c = generate(cfg);
  for (const Document& d : c.documents()) {
    CHECK(std::abs(std::sqrt(oracle::dot(d.base_embedding, d.base_embedding)) - 1.0) < 1e-6);
    CHECK(d.word_count > cfg.min_words);
    CHECK(d.word_count <= cfg.min_words + 1000);
  }
  CHECK(c.size() == 120);
}

TEST_CASE("nearest-neighbour attribution on raw embeddings beats chance") {
  SynthConfig cfg = small(0.7, 0.05);
  cfg.num_authors = 100;
  cfg.dim = 16;
  const Corpus c = generate(cfg);
  std::size_t hits = 0;
  for (const Document& d : c.documents()) {
    double best = -2.0;
    const Document* nearest = nullptr;
    for (const Document& e : c.documents()) {
      if (&e == &d) continue;
      const double s = oracle::dot(d.base_embedding, e.base_embedding);
      if (s > best) {
        best = s;
        nearest = &e;
      }
    }
    hits += nearest->author_id == d.author_id;
  }
  const double accuracy = static_cast<double>(hits) / static_cast<double>(c.size());
  // Chance is 3 same-author documents out of 399.
  CHECK(accuracy > 10.0 * 3.0 / 399.0);
}

TEST_CASE("primary topic share") {
  SynthConfig cfg;
  cfg.num_authors = 50;
  cfg.docs_per_author = 10;
  cfg.num_topics = 4;
  cfg.topics_per_author = 2;
  cfg.primary_topic_share = 0.8;
  const Corpus c = generate(cfg);
  for (const auto& [author, positions] : c.author_index()) {
    std::map<std::string, int> counts;
    for (const Document* d : c.author_documents(author)) ++counts[d->genre];
    REQUIRE(counts.size() == 2);
    std::vector<int> sizes;
    for (const auto& [g, n] : counts) sizes.push_back(n);
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>{2, 8});
  }

  // Even cycling when the share is 0.
  cfg.primary_topic_share = 0.0;
  const Corpus even = generate(cfg);
  for (const auto& [author, positions] : even.author_index()) {
    std::map<std::string, int> counts;
    for (const Document* d : even.author_documents(author)) ++counts[d->genre];
    for (const auto& [g, n] : counts) CHECK(n == 5);
  }

  // Every secondary topic keeps at least one document.
  cfg.topics_per_author = 4;
  cfg.docs_per_author = 4;
  cfg.primary_topic_share = 0.9;
  const Corpus tight = generate(cfg);
  for (const auto& [author, positions] : tight.author_index()) {
    std::set<std::string> genres;
    for (const Document* d : tight.author_documents(author)) genres.insert(d->genre);
    CHECK(genres.size() == 4);
  }
}

TEST_CASE("synth config validation") {
  auto bad = [](auto mutate) {
    SynthConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(generate(bad([](SynthConfig& c) { c.num_authors = 0; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig& c) { c.docs_per_author = 1; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig& c) { c.topics_per_author = 5; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig& c) { c.style_weight = 1.5; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig& c) { c.noise_sigma = -1; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig& c) { c.primary_topic_share = 1.0; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig& c) { c.dim = 1; })), ConfigError);
}
