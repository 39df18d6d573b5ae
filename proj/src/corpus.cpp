#include "authcurr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include <json.hpp>

#include "authcurr/error.hpp"

namespace authcurr {

using nlohmann::json;

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const Document& doc = documents_[i];
    if (!dimension_) dimension_ = doc.base_embedding.size();
    if (doc.base_embedding.size() != *dimension_) {
      throw DataError("document '" + doc.doc_id + "' has embedding dimension " +
                      std::to_string(doc.base_embedding.size()) + ", expected " +
                      std::to_string(*dimension_));
    }
    if (!id_index_.emplace(doc.doc_id, i).second) {
      throw DataError("duplicate doc_id '" + doc.doc_id + "'");
    }
    author_index_[doc.author_id].push_back(i);
  }
}

std::optional<std::size_t> Corpus::find(const std::string& doc_id) const {
  auto it = id_index_.find(doc_id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

const Document& Corpus::at(const std::string& doc_id) const {
  auto pos = find(doc_id);
  if (!pos) throw DataError("unknown doc_id '" + doc_id + "'");
  return documents_[*pos];
}

std::vector<const Document*> Corpus::author_documents(const std::string& author_id) const {
  std::vector<const Document*> out;
  auto it = author_index_.find(author_id);
  if (it == author_index_.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t pos : it->second) out.push_back(&documents_[pos]);
  return out;
}

namespace {

Document parse_record(const std::string& line) {
  const json record = json::parse(line);
  if (!record.is_object()) throw std::runtime_error("record is not an object");
  auto require = [&record](const char* key) -> const json& {
    auto it = record.find(key);
    if (it == record.end()) throw std::runtime_error(std::string("missing key '") + key + "'");
    return *it;
  };
  Document doc;
  doc.doc_id = require("doc_id").get<std::string>();
  doc.author_id = require("author_id").get<std::string>();
  doc.genre = require("genre").get<std::string>();
  const json& words = require("word_count");
  if (!words.is_number_integer() || words.get<long long>() < 0) {
    throw std::runtime_error("word_count must be a non-negative integer");
  }
  doc.word_count = words.get<std::size_t>();
  const json& embedding = require("embedding");
  if (!embedding.is_array()) throw std::runtime_error("embedding must be an array");
  doc.base_embedding.reserve(embedding.size());
  for (const json& x : embedding) {
    if (!x.is_number()) throw std::runtime_error("embedding holds a non-number");
    doc.base_embedding.push_back(x.get<double>());
  }
  if (auto it = record.find("text"); it != record.end() && !it->is_null()) {
    doc.text = it->get<std::string>();
  }
  return doc;
}

}  // namespace

Corpus read_corpus(std::istream& in, const std::string& source_name) {
  std::vector<Document> docs;
  std::map<std::string, std::size_t> seen;
  std::optional<std::size_t> dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    Document doc;
    try {
      doc = parse_record(line);
    } catch (const std::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
    if (!dim) dim = doc.base_embedding.size();
    if (doc.base_embedding.size() != *dim) {
      throw DataError(where + ": embedding dimension " +
                      std::to_string(doc.base_embedding.size()) + " does not match " +
                      std::to_string(*dim));
    }
    if (!seen.emplace(doc.doc_id, line_no).second) {
      throw DataError(where + ": duplicate doc_id '" + doc.doc_id + "' (first seen on line " +
                      std::to_string(seen[doc.doc_id]) + ")");
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read corpus file " + path.string());
  return read_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const Document& doc : corpus.documents()) {
    json record = {{"doc_id", doc.doc_id},
                   {"author_id", doc.author_id},
                   {"genre", doc.genre},
                   {"word_count", doc.word_count},
                   {"embedding", doc.base_embedding}};
    if (doc.text) record["text"] = *doc.text;
    out << record.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  write_corpus(out, corpus);
}

Corpus filter_min_words(const Corpus& corpus, std::size_t min_words) {
  std::vector<Document> kept;
  for (const Document& doc : corpus.documents()) {
    if (doc.word_count > min_words) kept.push_back(doc);
  }
  return Corpus(std::move(kept));
}

Corpus select_authors(const Corpus& corpus, const std::set<std::string>& authors) {
  std::vector<Document> kept;
  for (const Document& doc : corpus.documents()) {
    if (authors.count(doc.author_id)) kept.push_back(doc);
  }
  return Corpus(std::move(kept));
}

CorpusSplit split_by_author(const Corpus& corpus, double validation_fraction,
                            double test_fraction, std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && test_fraction >= 0.0 &&
        validation_fraction + test_fraction <= 1.0)) {
    throw ConfigError("split fractions must be non-negative and sum to at most 1");
  }
  std::vector<std::string> authors;
  for (const auto& entry : corpus.author_index()) authors.push_back(entry.first);
  std::mt19937_64 rng(seed);
  std::shuffle(authors.begin(), authors.end(), rng);
  const auto n = static_cast<double>(authors.size());
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * n));
  const auto n_test = std::min(authors.size() - n_val,
                               static_cast<std::size_t>(std::llround(test_fraction * n)));
  std::set<std::string> val(authors.begin(), authors.begin() + n_val);
  std::set<std::string> test(authors.begin() + n_val, authors.begin() + n_val + n_test);
  std::set<std::string> train(authors.begin() + n_val + n_test, authors.end());
  return {select_authors(corpus, train), select_authors(corpus, val), select_authors(corpus, test)};
}

}  // namespace authcurr
