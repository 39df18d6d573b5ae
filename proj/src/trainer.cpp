#include "authcurr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "authcurr/error.hpp"

namespace authcurr {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (shards_per_step < 1) throw ConfigError("shards_per_step must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
}

namespace {

// partner[i] is the other row carrying label[i].
std::vector<std::size_t> pair_partners(std::size_t n, std::span<const std::size_t> labels) {
  if (labels.size() != n) {
    throw DataError("supcon: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(n) + " rows");
  }
  if (n < 4) throw DataError("supcon: need at least 4 rows, got " + std::to_string(n));
  std::unordered_map<std::size_t, std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < n; ++i) rows_of[labels[i]].push_back(i);
  std::vector<std::size_t> partner(n);
  for (const auto& [label, rows] : rows_of) {
    if (rows.size() != 2) {
      throw DataError("supcon: label " + std::to_string(label) + " occurs " +
                      std::to_string(rows.size()) + " times, expected 2");
    }
    partner[rows[0]] = rows[1];
    partner[rows[1]] = rows[0];
  }
  return partner;
}

struct Normalised {
  Matrix unit;
  std::vector<double> norms;
};

Normalised normalise_rows(const Matrix& z) {
  Normalised out{Matrix(z.rows, z.cols), std::vector<double>(z.rows)};
  for (std::size_t i = 0; i < z.rows; ++i) {
    const double n = norm(z.row(i));
    if (n == 0.0) throw DataError("supcon: zero-norm row " + std::to_string(i));
    out.norms[i] = n;
    for (std::size_t j = 0; j < z.cols; ++j) out.unit(i, j) = z(i, j) / n;
  }
  return out;
}

LossAndGradient supcon_impl(const Matrix& projected, std::span<const std::size_t> labels,
                            double temperature, bool want_grad) {
  if (!(temperature > 0.0)) throw DataError("supcon: temperature must be positive");
  const std::size_t n = projected.rows;
  const std::vector<std::size_t> partner = pair_partners(n, labels);
  const Normalised z = normalise_rows(projected);

  // logits(i, j) = <u_i, u_j> / tau; the softmax for anchor i excludes j = i.
  Matrix logits(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = dot(z.unit.row(i), z.unit.row(j)) / temperature;
      logits(i, j) = s;
      logits(j, i) = s;
    }
  }

  LossAndGradient out;
  // coeff(i, j) = d loss / d logits(i, j), accumulated before the chain rule.
  Matrix coeff(want_grad ? n : 0, want_grad ? n : 0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double peak = -INFINITY;
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i) peak = std::max(peak, logits(i, a));
    }
    double denom = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i) denom += std::exp(logits(i, a) - peak);
    }
    const double log_denom = peak + std::log(denom);
    out.loss += (log_denom - logits(i, partner[i])) * inv_n;
    if (want_grad) {
      for (std::size_t a = 0; a < n; ++a) {
        if (a == i) continue;
        coeff(i, a) = std::exp(logits(i, a) - log_denom) * inv_n;
      }
      coeff(i, partner[i]) -= inv_n;
    }
  }
  if (!want_grad) return out;

  // d loss / d u_i = sum_j (coeff(i,j) + coeff(j,i)) u_j / tau, then project
  // onto the tangent space of the sphere and divide by the row norm.
  out.gradient = Matrix(n, projected.cols);
  std::vector<double> g(projected.cols);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = (coeff(i, j) + coeff(j, i)) / temperature;
      const auto uj = z.unit.row(j);
      for (std::size_t d = 0; d < g.size(); ++d) g[d] += w * uj[d];
    }
    const auto ui = z.unit.row(i);
    const double radial = dot(g, ui);
    auto gi = out.gradient.row(i);
    for (std::size_t d = 0; d < g.size(); ++d) gi[d] = (g[d] - radial * ui[d]) / z.norms[i];
  }
  return out;
}

}  // namespace

double supcon_loss(const Matrix& projected, std::span<const std::size_t> labels,
                   double temperature) {
  return supcon_impl(projected, labels, temperature, false).loss;
}

LossAndGradient supcon_loss_and_grad(const Matrix& projected, std::span<const std::size_t> labels,
                                     double temperature) {
  return supcon_impl(projected, labels, temperature, true);
}

Matrix supcon_grad(const Matrix& projected, std::span<const std::size_t> labels,
                   double temperature) {
  return supcon_impl(projected, labels, temperature, true).gradient;
}

LossAndGradient weight_loss_and_grad(const ProjectionModel& model, const Matrix& base,
                                     std::span<const std::size_t> labels, double temperature) {
  const Matrix z = project_rows(model, base);
  LossAndGradient dz = supcon_loss_and_grad(z, labels, temperature);
  LossAndGradient out{dz.loss, Matrix(model.output_dim, model.input_dim)};
  for (std::size_t i = 0; i < base.rows; ++i) {
    const auto x = base.row(i);
    const auto gz = dz.gradient.row(i);
    for (std::size_t r = 0; r < model.output_dim; ++r) {
      auto wr = out.gradient.row(r);
      for (std::size_t c = 0; c < model.input_dim; ++c) wr[c] += gz[r] * x[c];
    }
  }
  return out;
}

StepResult train_step(const ProjectionModel& model, std::span<const Shard> shards,
                      const TrainConfig& config, Execution execution) {
  config.validate();
  if (shards.empty() || shards.size() > config.shards_per_step) {
    throw DataError("train_step: " + std::to_string(shards.size()) + " shards, expected 1.." +
                    std::to_string(config.shards_per_step));
  }
  std::vector<LossAndGradient> parts(shards.size());
  if (execution == Execution::concurrent && shards.size() > 1) {
    std::vector<std::future<LossAndGradient>> futures;
    futures.reserve(shards.size());
    for (const Shard& shard : shards) {
      futures.push_back(std::async(std::launch::async, [&model, &shard, &config] {
        return weight_loss_and_grad(model, shard.base, shard.labels, config.temperature);
      }));
    }
    for (std::size_t s = 0; s < futures.size(); ++s) parts[s] = futures[s].get();
  } else {
    for (std::size_t s = 0; s < shards.size(); ++s) {
      parts[s] = weight_loss_and_grad(model, shards[s].base, shards[s].labels, config.temperature);
    }
  }

  StepResult result{model, 0.0};
  Matrix total(model.output_dim, model.input_dim);
  for (const LossAndGradient& part : parts) {
    result.loss += part.loss;
    for (std::size_t k = 0; k < total.data.size(); ++k) total.data[k] += part.gradient.data[k];
  }
  for (std::size_t k = 0; k < total.data.size(); ++k) {
    result.model.weight.data[k] -= config.learning_rate * total.data[k];
  }
  return result;
}

VectorMatrix epoch_vectors(const ProjectionModel& model, const Corpus& corpus,
                           const std::vector<TrainingPair>& pairs) {
  VectorMatrix out(model.output_dim);
  out.reserve(2 * pairs.size());
  for (const TrainingPair& p : pairs) {
    out.add_row(p.doc_a, project(model, corpus.at(p.doc_a).base_embedding));
    out.add_row(p.doc_b, project(model, corpus.at(p.doc_b).base_embedding));
  }
  return out;
}

std::vector<Shard> make_shards(const BatchPlan& plan, const Corpus& corpus,
                               const std::vector<TrainingPair>& pairs) {
  std::unordered_map<std::string, const TrainingPair*> by_author;
  for (const TrainingPair& p : pairs) by_author[p.author_id] = &p;
  const std::size_t dim = corpus.dimension().value_or(0);
  std::vector<Shard> shards;
  for (const auto& batch : plan.batches) {
    // A lone author has no negatives: its loss and gradient are identically 0.
    if (batch.size() < 2) continue;
    Shard shard{Matrix(2 * batch.size(), dim), {}};
    shard.labels.reserve(2 * batch.size());
    for (std::size_t a = 0; a < batch.size(); ++a) {
      auto it = by_author.find(batch[a]);
      if (it == by_author.end()) throw DataError("planned author " + batch[a] + " has no pair");
      const auto& ea = corpus.at(it->second->doc_a).base_embedding;
      const auto& eb = corpus.at(it->second->doc_b).base_embedding;
      std::copy(ea.begin(), ea.end(), shard.base.row(2 * a).begin());
      std::copy(eb.begin(), eb.end(), shard.base.row(2 * a + 1).begin());
      shard.labels.push_back(a);
      shard.labels.push_back(a);
    }
    shards.push_back(std::move(shard));
  }
  return shards;
}

TrainingResult run_training(const Corpus& corpus, const std::vector<TrainingPair>& pairs,
                            const BatchConfig& batch_config, const TrainConfig& train_config,
                            const Corpus& validation_corpus, const RetrievalTask& validation_task,
                            Execution execution) {
  train_config.validate();
  batch_config.validate();
  if (!corpus.dimension()) throw DataError("training corpus is empty");

  std::unordered_set<std::string> training_authors;
  for (const TrainingPair& p : pairs) training_authors.insert(p.author_id);
  auto check_author = [&](const std::string& doc_id) {
    const std::string& author = validation_corpus.at(doc_id).author_id;
    if (training_authors.count(author)) {
      throw DataError("validation task shares author " + author + " with the training pairs");
    }
  };
  for (const Query& q : validation_task.queries) {
    for (const auto& d : q.doc_ids) check_author(d);
  }
  for (const auto& d : validation_task.haystack) check_author(d);

  TrainingResult result;
  ProjectionModel model = ProjectionModel::initialize(*corpus.dimension(), train_config.seed);
  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    const BatchPlan plan =
        build_epoch_plan(pairs, epoch_vectors(model, corpus, pairs), batch_config, epoch);
    const std::vector<Shard> shards = make_shards(plan, corpus, pairs);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < shards.size(); start += train_config.shards_per_step) {
      const std::size_t count = std::min(train_config.shards_per_step, shards.size() - start);
      StepResult step = train_step(model, std::span(shards).subspan(start, count), train_config,
                                   execution);
      model = std::move(step.model);
      loss_sum += step.loss;
      result.step_losses.push_back(step.loss);
    }

    EpochState state;
    state.epoch = epoch;
    state.model = model;
    state.mean_train_loss = shards.empty() ? 0.0 : loss_sum / static_cast<double>(shards.size());
    state.validation_score = evaluate(model, validation_corpus, validation_task).success_at_8;
    state.plan_source = plan.source;
    state.num_batches = plan.batches.size();
    if (result.history.empty() || state.validation_score > result.best.validation_score) {
      result.best = state;
    }
    result.history.push_back(std::move(state));
  }
  return result;
}

void write_history(std::ostream& out, const std::vector<EpochState>& history) {
  for (const EpochState& e : history) {
    out << nlohmann::json{{"epoch", e.epoch},
                          {"mean_train_loss", e.mean_train_loss},
                          {"validation_success_at_8", e.validation_score}}
               .dump()
        << '\n';
  }
}

}  // namespace authcurr
