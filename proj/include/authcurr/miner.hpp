#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "authcurr/corpus.hpp"

namespace authcurr {

enum class MinerMode { hard, random };

MinerMode parse_miner_mode(const std::string& name);
std::string to_string(MinerMode mode);

struct MinerConfig {
  MinerMode mode = MinerMode::hard;
  // Upper bound on the chosen pair's base cosine similarity (hard mode).
  double ceiling = 0.2;
  std::uint64_t seed = 42;

  void validate() const;
};

// One author's two training documents; doc_a < doc_b.
struct TrainingPair {
  std::string author_id;
  std::string doc_a;
  std::string doc_b;
  double base_similarity = 0.0;

  bool operator==(const TrainingPair&) const = default;
};

struct PairChoice {
  std::string doc_a;
  std::string doc_b;
  double similarity = 0.0;
};

// Least similar pair of base embeddings; ties go to the lexicographically
// smallest (doc_a, doc_b). Requires at least two documents.
PairChoice min_similarity_pair(std::span<const Document* const> author_docs);

// One pair per author with two or more documents, sorted by author_id. Hard
// mode keeps an author only when its least similar pair is <= ceiling.
std::vector<TrainingPair> select_training_pairs(const Corpus& corpus, const MinerConfig& config);

void write_pairs(std::ostream& out, const std::vector<TrainingPair>& pairs);
std::vector<TrainingPair> read_pairs(std::istream& in);
void save_pairs(const std::filesystem::path& path, const std::vector<TrainingPair>& pairs);
std::vector<TrainingPair> load_pairs(const std::filesystem::path& path);

// Stable 64-bit mix of a seed and a string (FNV-1a + splitmix finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

}  // namespace authcurr
