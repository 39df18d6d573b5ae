#include "authcurr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "authcurr/error.hpp"

namespace authcurr {

RunOutcome run_pipeline(const CorpusSplit& split, const RunSpec& spec) {
  const Corpus train = filter_min_words(split.train, spec.min_words);
  RunOutcome out;
  const auto pairs = select_training_pairs(train, spec.miner);
  out.num_pairs = pairs.size();
  if (pairs.size() < 2) throw DataError("fewer than two training authors survived mining");

  const RetrievalTask validation =
      build_task(split.validation, spec.validation_mode, spec.task_seed);
  out.training = run_training(train, pairs, spec.batch, spec.train, split.validation, validation);

  const ProjectionModel& model = out.training.best.model;
  out.per_genre = evaluate(model, split.test, build_task(split.test, TaskMode::per_genre,
                                                         spec.task_seed));
  out.cross_genre = evaluate(model, split.test, build_task(split.test, TaskMode::cross_genre,
                                                           spec.task_seed));
  return out;
}

SeedAveraged run_seeds(const CorpusSplit& split, RunSpec spec,
                       std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  SeedAveraged out;
  std::vector<MetricsReport> per, cross;
  for (std::uint64_t seed : seeds) {
    spec.miner.seed = seed;
    spec.batch.seed = seed;
    spec.train.seed = seed;
    out.runs.push_back(run_pipeline(split, spec));
    per.push_back(out.runs.back().per_genre);
    cross.push_back(out.runs.back().cross_genre);
  }
  out.per_genre = average_runs(per);
  out.cross_genre = average_runs(cross);
  return out;
}

double min_pair_similarity_quantile(const Corpus& corpus, double quantile) {
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw ConfigError("quantile must lie in [0, 1]");
  std::vector<double> sims;
  for (const auto& [author, positions] : corpus.author_index()) {
    if (positions.size() < 2) continue;
    sims.push_back(min_similarity_pair(corpus.author_documents(author)).similarity);
  }
  if (sims.empty()) throw DataError("no author has two documents");
  std::sort(sims.begin(), sims.end());
  // Nearest-rank quantile.
  const auto rank = static_cast<std::size_t>(
      std::ceil(quantile * static_cast<double>(sims.size())));
  return sims[std::clamp<std::size_t>(rank, 1, sims.size()) - 1];
}

namespace {

AblationCell run_cell(const CorpusSplit& split, const RunSpec& spec,
                      std::span<const std::uint64_t> seeds, std::string label) {
  SeedAveraged avg = run_seeds(split, spec, seeds);
  AblationCell cell;
  cell.label = std::move(label);
  cell.miner = spec.miner.mode;
  cell.batching = spec.batch.strategy;
  cell.ceiling = spec.miner.ceiling;
  cell.num_pairs = avg.runs.front().num_pairs;
  cell.per_genre = std::move(avg.per_genre);
  cell.cross_genre = std::move(avg.cross_genre);
  return cell;
}

}  // namespace

std::vector<AblationCell> run_curriculum_grid(const CorpusSplit& split, const RunSpec& base,
                                              std::span<const std::uint64_t> seeds) {
  std::vector<AblationCell> cells;
  for (MinerMode miner : {MinerMode::hard, MinerMode::random}) {
    for (BatchStrategy batching : {BatchStrategy::hard, BatchStrategy::random}) {
      RunSpec spec = base;
      spec.miner.mode = miner;
      spec.batch.strategy = batching;
      cells.push_back(run_cell(split, spec, seeds,
                               "pairs=" + to_string(miner) + ",batches=" + to_string(batching)));
    }
  }
  return cells;
}

std::vector<AblationCell> run_ceiling_sweep(const CorpusSplit& split, const RunSpec& base,
                                            std::span<const double> ceilings,
                                            std::span<const std::uint64_t> seeds) {
  std::vector<AblationCell> cells;
  for (double ceiling : ceilings) {
    RunSpec spec = base;
    spec.miner.mode = MinerMode::hard;
    spec.miner.ceiling = ceiling;
    std::ostringstream label;
    label << "ceiling<=" << ceiling;
    cells.push_back(run_cell(split, spec, seeds, label.str()));
  }
  return cells;
}

SynthConfig benchmark_corpus_config() {
  SynthConfig config;
  config.num_authors = 2000;
  config.docs_per_author = 10;
  config.num_topics = 4;
  config.topics_per_author = 2;
  config.dim = 32;
  config.style_weight = 0.6;
  config.noise_sigma = 0.1;
  config.primary_topic_share = 0.8;
  config.seed = 42;
  return config;
}

CorpusSplit benchmark_split(const Corpus& corpus) { return split_by_author(corpus, 0.1, 0.2, 99); }

RunSpec benchmark_run_spec(const Corpus& train) {
  RunSpec spec;
  spec.train.learning_rate = benchmark_learning_rate;
  spec.miner.mode = MinerMode::hard;
  spec.miner.ceiling =
      min_pair_similarity_quantile(filter_min_words(train, spec.min_words), 0.25);
  return spec;
}

}  // namespace authcurr
