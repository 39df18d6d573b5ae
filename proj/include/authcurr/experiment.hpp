#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "authcurr/batcher.hpp"
#include "authcurr/corpus.hpp"
#include "authcurr/evalkit.hpp"
#include "authcurr/miner.hpp"
#include "authcurr/synth.hpp"
#include "authcurr/trainer.hpp"

namespace authcurr {

struct RunSpec {
  MinerConfig miner;
  BatchConfig batch;
  TrainConfig train;
  std::size_t min_words = 350;
  TaskMode validation_mode = TaskMode::cross_genre;
  std::uint64_t task_seed = 7;
};

struct RunOutcome {
  std::size_t num_pairs = 0;
  TrainingResult training;
  MetricsReport per_genre;
  MetricsReport cross_genre;
};

// filter -> mine -> train (with validation model selection) -> evaluate the
// selected model on per-genre and cross-genre test tasks.
RunOutcome run_pipeline(const CorpusSplit& split, const RunSpec& spec);

struct SeedAveraged {
  std::vector<RunOutcome> runs;
  MetricsReport per_genre;
  MetricsReport cross_genre;
};

// One run per seed (the seed drives mining, batching and initialisation);
// metrics averaged across runs.
SeedAveraged run_seeds(const CorpusSplit& split, RunSpec spec,
                       std::span<const std::uint64_t> seeds);

// Hard-mode ceiling at the given quantile of per-author least-similar-pair
// similarities over authors with two or more documents.
double min_pair_similarity_quantile(const Corpus& corpus, double quantile);

// One cell of a curriculum ablation.
struct AblationCell {
  std::string label;
  MinerMode miner = MinerMode::hard;
  BatchStrategy batching = BatchStrategy::hard;
  double ceiling = 0.0;
  std::size_t num_pairs = 0;  // from the first seed
  MetricsReport per_genre;
  MetricsReport cross_genre;
};

// miner {hard, random} x batching {hard, random}, in that order.
std::vector<AblationCell> run_curriculum_grid(const CorpusSplit& split, const RunSpec& base,
                                              std::span<const std::uint64_t> seeds);

// Hard mining with base.batch at each ceiling.
std::vector<AblationCell> run_ceiling_sweep(const CorpusSplit& split, const RunSpec& base,
                                            std::span<const double> ceilings,
                                            std::span<const std::uint64_t> seeds);

// Reference synthetic benchmark: 2,000 authors, 4 topics, two per author,
// style weight 0.6. Each author writes 8 of its 10 documents in a primary
// topic, so a random same-author pair usually shares a topic.
SynthConfig benchmark_corpus_config();

// 10% validation, 20% test authors, split seed 99.
CorpusSplit benchmark_split(const Corpus& corpus);

inline constexpr double benchmark_learning_rate = 0.02;

// Defaults with benchmark_learning_rate and hard mining at the 25th-percentile
// least-similar-pair similarity of `train`.
RunSpec benchmark_run_spec(const Corpus& train);

}  // namespace authcurr
