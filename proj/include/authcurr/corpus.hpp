#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "authcurr/geometry.hpp"

namespace authcurr {

struct Document {
  std::string doc_id;
  std::string author_id;
  std::string genre;
  std::size_t word_count = 0;
  Vector base_embedding;
  std::optional<std::string> text;
};

// Immutable, insertion-ordered collection of documents sharing one embedding
// dimension, indexed by author.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  // Dimension of every base embedding; nullopt for an empty corpus.
  std::optional<std::size_t> dimension() const { return dimension_; }

  // author_id -> positions into documents(), in insertion order.
  const std::map<std::string, std::vector<std::size_t>>& author_index() const {
    return author_index_;
  }

  // Position of `doc_id`, or nullopt.
  std::optional<std::size_t> find(const std::string& doc_id) const;
  const Document& at(const std::string& doc_id) const;

  // Documents of one author in insertion order.
  std::vector<const Document*> author_documents(const std::string& author_id) const;

 private:
  std::vector<Document> documents_;
  std::map<std::string, std::vector<std::size_t>> author_index_;
  std::map<std::string, std::size_t> id_index_;
  std::optional<std::size_t> dimension_;
};

// Parses line-delimited JSON records. Blank lines are skipped. Errors carry
// the 1-based line number.
Corpus read_corpus(std::istream& in, const std::string& source_name = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Keeps documents with strictly more than `min_words` words.
Corpus filter_min_words(const Corpus& corpus, std::size_t min_words = 350);

// Documents of the listed authors, in corpus order.
Corpus select_authors(const Corpus& corpus, const std::set<std::string>& authors);

struct CorpusSplit {
  Corpus train;
  Corpus validation;
  Corpus test;
};

// Disjoint author split: a seeded shuffle of author ids assigns the first
// fractions to validation and test, the rest to training.
CorpusSplit split_by_author(const Corpus& corpus, double validation_fraction,
                            double test_fraction, std::uint64_t seed);

}  // namespace authcurr
