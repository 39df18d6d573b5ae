#pragma once

// Hand-rolled generators shared by the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "authcurr/corpus.hpp"
#include "authcurr/geometry.hpp"

namespace testutil {

using Rng = std::mt19937_64;

inline std::vector<double> gaussian(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = n(rng);
  return v;
}

inline std::vector<double> unit(std::size_t dim, Rng& rng) {
  for (;;) {
    auto v = gaussian(dim, rng);
    double s = 0.0;
    for (double x : v) s += x * x;
    if (s > 1e-12) {
      for (double& x : v) x /= std::sqrt(s);
      return v;
    }
  }
}

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline authcurr::Document doc(std::string id, std::string author, std::string genre,
                              std::vector<double> embedding, std::size_t words = 1000) {
  authcurr::Document d;
  d.doc_id = std::move(id);
  d.author_id = std::move(author);
  d.genre = std::move(genre);
  d.word_count = words;
  d.base_embedding = std::move(embedding);
  return d;
}

struct CorpusShape {
  std::size_t authors = 20;
  std::size_t min_docs = 1;
  std::size_t max_docs = 6;
  std::size_t dim = 6;
  std::size_t genres = 3;
};

// Random authors with random unit embeddings, random genres, and word counts
// straddling the 350-word filter.
inline authcurr::Corpus random_corpus(const CorpusShape& shape, Rng& rng) {
  std::vector<authcurr::Document> docs;
  for (std::size_t a = 0; a < shape.authors; ++a) {
    const std::size_t m = uniform(rng, shape.min_docs, shape.max_docs);
    for (std::size_t j = 0; j < m; ++j) {
      docs.push_back(doc("a" + std::to_string(a) + "-d" + std::to_string(j),
                         "a" + std::to_string(a),
                         "g" + std::to_string(uniform(rng, 0, shape.genres - 1)),
                         unit(shape.dim, rng), uniform(rng, 300, 400)));
    }
  }
  // Shuffle so corpus order is not author order.
  std::shuffle(docs.begin(), docs.end(), rng);
  return authcurr::Corpus(std::move(docs));
}

inline authcurr::VectorMatrix random_matrix(std::size_t rows, std::size_t dim, Rng& rng) {
  authcurr::VectorMatrix m(dim);
  for (std::size_t i = 0; i < rows; ++i) m.add_row("r" + std::to_string(i), gaussian(dim, rng));
  return m;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("authcurr-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
