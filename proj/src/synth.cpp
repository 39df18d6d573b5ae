#include "authcurr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>

#include "authcurr/error.hpp"
#include "authcurr/miner.hpp"

namespace authcurr {

void SynthConfig::validate() const {
  if (num_authors < 1) throw ConfigError("synth: num_authors must be >= 1");
  if (docs_per_author < 2) throw ConfigError("synth: docs_per_author must be >= 2");
  if (num_topics < 1) throw ConfigError("synth: num_topics must be >= 1");
  if (topics_per_author < 1 || topics_per_author > num_topics) {
    throw ConfigError("synth: topics_per_author must lie in [1, num_topics]");
  }
  if (dim < 2) throw ConfigError("synth: dim must be >= 2");
  if (!(style_weight >= 0.0 && style_weight <= 1.0)) {
    throw ConfigError("synth: style_weight must lie in [0, 1]");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("synth: noise_sigma must be >= 0");
  if (!(primary_topic_share >= 0.0 && primary_topic_share < 1.0)) {
    throw ConfigError("synth: primary_topic_share must lie in [0, 1)");
  }
}

namespace {

Vector gaussian_direction(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (;;) {
    for (double& x : v) x = normal(rng);
    if (norm(v) > 1e-12) return l2_normalize(v);
  }
}

std::string padded(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, value);
  return buf;
}

// Topic slot (index into the author's shuffled topics) of document j.
std::size_t topic_slot(const SynthConfig& config, std::size_t j) {
  const std::size_t m = config.docs_per_author;
  const std::size_t t = config.topics_per_author;
  if (config.primary_topic_share <= 0.0 || t == 1) return j % t;
  const auto wanted = static_cast<std::size_t>(
      std::llround(config.primary_topic_share * static_cast<double>(m)));
  const std::size_t primary = std::clamp<std::size_t>(wanted, 1, m > t - 1 ? m - (t - 1) : 1);
  if (j < primary) return 0;
  return 1 + (j - primary) % (t - 1);
}

}  // namespace

Corpus generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 topic_rng(derive_seed(config.seed, "topics"));
  std::vector<Vector> topics;
  topics.reserve(config.num_topics);
  for (std::size_t t = 0; t < config.num_topics; ++t) {
    topics.push_back(gaussian_direction(config.dim, topic_rng));
  }

  const int author_width = static_cast<int>(std::to_string(config.num_authors - 1).size());
  const int doc_width = static_cast<int>(std::to_string(config.docs_per_author - 1).size());
  const double alpha = config.style_weight;

  std::vector<Document> docs;
  docs.reserve(config.num_authors * config.docs_per_author);
  std::vector<std::size_t> topic_order(config.num_topics);
  for (std::size_t a = 0; a < config.num_authors; ++a) {
    std::mt19937_64 rng(derive_seed(config.seed, a + 1));
    const Vector style = gaussian_direction(config.dim, rng);
    std::iota(topic_order.begin(), topic_order.end(), 0);
    std::shuffle(topic_order.begin(), topic_order.end(), rng);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> extra_words(1, 1000);
    const std::string author = "a" + padded(a, author_width);

    for (std::size_t j = 0; j < config.docs_per_author; ++j) {
      const std::size_t topic = topic_order[topic_slot(config, j)];
      Vector e(config.dim);
      for (std::size_t d = 0; d < config.dim; ++d) {
        e[d] = alpha * style[d] + (1.0 - alpha) * topics[topic][d] +
               config.noise_sigma * noise(rng);
      }
      if (norm(e) == 0.0) throw DataError("synth: degenerate zero embedding for " + author);
      Document doc;
      doc.doc_id = author + "-" + padded(j, doc_width);
      doc.author_id = author;
      doc.genre = "g" + std::to_string(topic);
      doc.word_count = config.min_words + extra_words(rng);
      doc.base_embedding = l2_normalize(e);
      docs.push_back(std::move(doc));
    }
  }
  return Corpus(std::move(docs));
}

}  // namespace authcurr
