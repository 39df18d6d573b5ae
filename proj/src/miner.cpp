#include "authcurr/miner.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "authcurr/error.hpp"

namespace authcurr {

using nlohmann::json;

MinerMode parse_miner_mode(const std::string& name) {
  if (name == "hard") return MinerMode::hard;
  if (name == "random") return MinerMode::random;
  throw ConfigError("unknown miner mode '" + name + "' (expected hard|random)");
}

std::string to_string(MinerMode mode) { return mode == MinerMode::hard ? "hard" : "random"; }

void MinerConfig::validate() const {
  if (mode == MinerMode::hard && !(ceiling > 0.0 && ceiling <= 1.0)) {
    throw ConfigError("ceiling must lie in (0, 1], got " + std::to_string(ceiling));
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t z = seed ^ (key + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(seed, h);
}

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

PairChoice min_similarity_pair(std::span<const Document* const> author_docs) {
  if (author_docs.size() < 2) {
    throw DataError("min_similarity_pair needs at least 2 documents, got " +
                    std::to_string(author_docs.size()));
  }
  PairChoice best;
  bool have = false;
  for (std::size_t i = 0; i < author_docs.size(); ++i) {
    for (std::size_t j = i + 1; j < author_docs.size(); ++j) {
      const double sim = cosine(author_docs[i]->base_embedding, author_docs[j]->base_embedding);
      auto [a, b] = ordered(author_docs[i]->doc_id, author_docs[j]->doc_id);
      if (!have || sim < best.similarity ||
          (sim == best.similarity && std::tie(a, b) < std::tie(best.doc_a, best.doc_b))) {
        best = {std::move(a), std::move(b), sim};
        have = true;
      }
    }
  }
  return best;
}

std::vector<TrainingPair> select_training_pairs(const Corpus& corpus, const MinerConfig& config) {
  config.validate();
  std::vector<TrainingPair> out;
  for (const auto& [author, positions] : corpus.author_index()) {
    if (positions.size() < 2) continue;
    const auto docs = corpus.author_documents(author);
    if (config.mode == MinerMode::hard) {
      PairChoice pick = min_similarity_pair(docs);
      if (pick.similarity <= config.ceiling) {
        out.push_back({author, std::move(pick.doc_a), std::move(pick.doc_b), pick.similarity});
      }
      continue;
    }
    const std::size_t m = docs.size();
    std::mt19937_64 rng(derive_seed(config.seed, author));
    std::uniform_int_distribution<std::size_t> pick(0, m * (m - 1) / 2 - 1);
    std::size_t index = pick(rng);
    std::size_t i = 0;
    while (index >= m - 1 - i) {
      index -= m - 1 - i;
      ++i;
    }
    const std::size_t j = i + 1 + index;
    auto [a, b] = ordered(docs[i]->doc_id, docs[j]->doc_id);
    out.push_back({author, a, b, cosine(docs[i]->base_embedding, docs[j]->base_embedding)});
  }
  return out;
}

void write_pairs(std::ostream& out, const std::vector<TrainingPair>& pairs) {
  for (const TrainingPair& p : pairs) {
    json record = {{"author_id", p.author_id},
                   {"doc_a", p.doc_a},
                   {"doc_b", p.doc_b},
                   {"base_similarity", p.base_similarity}};
    out << record.dump() << '\n';
  }
}

std::vector<TrainingPair> read_pairs(std::istream& in) {
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json r = json::parse(line);
      pairs.push_back({r.at("author_id").get<std::string>(), r.at("doc_a").get<std::string>(),
                       r.at("doc_b").get<std::string>(), r.at("base_similarity").get<double>()});
    } catch (const std::exception& e) {
      throw DataError("pairs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

void save_pairs(const std::filesystem::path& path, const std::vector<TrainingPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write pairs file " + path.string());
  write_pairs(out, pairs);
}

std::vector<TrainingPair> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read pairs file " + path.string());
  return read_pairs(in);
}

}  // namespace authcurr
