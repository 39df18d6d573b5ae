#pragma once

#include <cstddef>
#include <cstdint>

#include "authcurr/corpus.hpp"

namespace authcurr {

// Author/topic mixture geometry. Each document embeds as
//   normalize(style_weight * s_author + (1 - style_weight) * u_topic + noise)
// with unit style and topic directions and isotropic Gaussian noise. A
// document's genre is its topic.
struct SynthConfig {
  std::size_t num_authors = 100;
  std::size_t docs_per_author = 4;
  std::size_t num_topics = 4;
  std::size_t dim = 32;
  double style_weight = 0.6;
  double noise_sigma = 0.05;
  std::size_t topics_per_author = 2;
  std::uint64_t seed = 42;
  // Word counts are drawn from (min_words, min_words + 1000].
  std::size_t min_words = 350;
  // Fraction of an author's documents written in its first topic; the rest
  // cycle over its other topics. 0 cycles evenly over all of them.
  double primary_topic_share = 0.0;

  void validate() const;
};

// Deterministic per seed; authors draw from per-author derived streams.
Corpus generate(const SynthConfig& config);

}  // namespace authcurr
