#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "authcurr/batcher.hpp"
#include "authcurr/corpus.hpp"
#include "authcurr/evalkit.hpp"
#include "authcurr/miner.hpp"
#include "authcurr/projection.hpp"

namespace authcurr {

struct TrainConfig {
  std::size_t epochs = 4;
  std::size_t shards_per_step = 4;
  double temperature = 0.07;
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;

  void validate() const;
};

// Supervised contrastive loss over L2-normalised rows of `projected`. Each
// label must occur exactly twice and there must be at least four rows.
double supcon_loss(const Matrix& projected, std::span<const std::size_t> labels,
                   double temperature);

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;  // d loss / d projected, same shape as the input
};

LossAndGradient supcon_loss_and_grad(const Matrix& projected, std::span<const std::size_t> labels,
                                     double temperature);
Matrix supcon_grad(const Matrix& projected, std::span<const std::size_t> labels,
                   double temperature);

// d loss / d weight for rows base -> project -> supcon.
LossAndGradient weight_loss_and_grad(const ProjectionModel& model, const Matrix& base,
                                     std::span<const std::size_t> labels, double temperature);

// One planned batch: two base vectors per author, labels index authors.
struct Shard {
  Matrix base;
  std::vector<std::size_t> labels;
};

enum class Execution { sequential, concurrent };

struct StepResult {
  ProjectionModel model;
  double loss = 0.0;  // sum of shard losses
};

// Shard gradients are computed independently (optionally on worker threads),
// summed in shard order, and applied in one descent update.
StepResult train_step(const ProjectionModel& model, std::span<const Shard> shards,
                      const TrainConfig& config, Execution execution = Execution::sequential);

struct EpochState {
  std::size_t epoch = 0;
  ProjectionModel model;
  double mean_train_loss = 0.0;
  double validation_score = 0.0;
  std::string plan_source;
  std::size_t num_batches = 0;
};

struct TrainingResult {
  EpochState best;
  std::vector<EpochState> history;
  // Sum-of-shard loss of every step, in order.
  std::vector<double> step_losses;
};

// Projects the two training documents of every pair.
VectorMatrix epoch_vectors(const ProjectionModel& model, const Corpus& corpus,
                           const std::vector<TrainingPair>& pairs);

std::vector<Shard> make_shards(const BatchPlan& plan, const Corpus& corpus,
                               const std::vector<TrainingPair>& pairs);

// Each epoch plans batches from the previous epoch's model (epoch 1: the
// untrained projection), trains on every batch, and scores Success@8 on the
// validation task. The best epoch wins; ties go to the earliest.
TrainingResult run_training(const Corpus& corpus, const std::vector<TrainingPair>& pairs,
                            const BatchConfig& batch_config, const TrainConfig& train_config,
                            const Corpus& validation_corpus, const RetrievalTask& validation_task,
                            Execution execution = Execution::sequential);

void write_history(std::ostream& out, const std::vector<EpochState>& history);

}  // namespace authcurr
