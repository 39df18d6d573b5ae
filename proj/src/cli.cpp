#include "authcurr/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "authcurr/batcher.hpp"
#include "authcurr/corpus.hpp"
#include "authcurr/error.hpp"
#include "authcurr/evalkit.hpp"
#include "authcurr/experiment.hpp"
#include "authcurr/miner.hpp"
#include "authcurr/projection.hpp"
#include "authcurr/synth.hpp"
#include "authcurr/trainer.hpp"

namespace authcurr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    std::replace(key.begin(), key.end(), '_', '-');
    if (!entries.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
  }
  return entries;
}

namespace {

// Everything any subcommand can bind to. Only the selected subcommand's
// options are ever filled in.
struct Args {
  std::string config;
  std::string corpus, out, out_dir, pairs, validation, checkpoint, label, summary;
  std::string preset = "default";
  std::string miner_mode = "hard";
  std::string strategy = "hard";
  std::string val_mode = "cross";
  std::string eval_mode = "both";
  SynthConfig synth;
  MinerConfig miner;
  BatchConfig batch;
  TrainConfig train;
  std::optional<double> ceiling_quantile;
  std::size_t min_words = 350;
  double val_frac = 0.1;
  double test_frac = 0.2;
  std::uint64_t split_seed = 99;
  std::uint64_t seed = 42;
  std::uint64_t task_seed = 7;
  std::size_t epoch = 1;
  std::size_t min_query_docs = 1;
  bool concurrent = false;
  bool benchmark = false;
  std::vector<std::uint64_t> seeds{42, 1234};
  std::vector<double> ceilings;
  std::vector<std::string> metrics_files;
};

void add_config_option(CLI::App* sub, Args& a) {
  sub->add_option("--config", a.config, "flat key = value file; flags override it");
}

void add_miner_options(CLI::App* sub, Args& a) {
  sub->add_option("--mode", a.miner_mode, "pair selection: hard | random")
      ->check(CLI::IsMember({"hard", "random"}))
      ->capture_default_str();
  sub->add_option("--ceiling", a.miner.ceiling, "hard-mode similarity ceiling")
      ->capture_default_str();
  sub->add_option("--ceiling-quantile", a.ceiling_quantile,
                  "set the ceiling to this quantile of least-similar-pair similarities");
  sub->add_option("--min-words", a.min_words, "keep documents with more words than this")
      ->capture_default_str();
}

void add_batch_options(CLI::App* sub, Args& a) {
  sub->add_option("--batch-size", a.batch.batch_size, "authors per batch")->capture_default_str();
  sub->add_option("--clusters", a.batch.clusters_per_batch, "clusters per batch")
      ->capture_default_str();
  sub->add_option("--neighbor-cap", a.batch.neighbor_cap, "neighbour list length per centroid")
      ->capture_default_str();
  sub->add_option("--strategy", a.strategy, "batching: hard | random")
      ->check(CLI::IsMember({"hard", "random"}))
      ->capture_default_str();
}

void add_train_options(CLI::App* sub, Args& a) {
  sub->add_option("--epochs", a.train.epochs, "training epochs")->capture_default_str();
  sub->add_option("--shards", a.train.shards_per_step, "batches accumulated per update")
      ->capture_default_str();
  sub->add_option("--tau", a.train.temperature, "loss temperature")->capture_default_str();
  sub->add_option("--lr", a.train.learning_rate, "learning rate")->capture_default_str();
  sub->add_flag("--concurrent", a.concurrent, "compute shard gradients on worker threads");
}

void add_split_options(CLI::App* sub, Args& a) {
  sub->add_option("--val-frac", a.val_frac, "fraction of authors held out for validation")
      ->capture_default_str();
  sub->add_option("--test-frac", a.test_frac, "fraction of authors held out for test")
      ->capture_default_str();
  sub->add_option("--split-seed", a.split_seed, "seed of the author split")->capture_default_str();
}

bool given(const CLI::App* sub, const std::string& name) { return sub->count(name) > 0; }

void require(const CLI::App* sub, const std::string& name) {
  if (!given(sub, name)) throw ConfigError(sub->get_name() + ": " + name + " is required");
}

// Config entries fill options the command line left unset.
void apply_config(CLI::App* app, CLI::App* sub, const std::map<std::string, std::string>& entries) {
  std::set<std::string> known;
  for (const CLI::App* s : app->get_subcommands({})) {
    for (const CLI::Option* opt : s->get_options()) {
      for (const std::string& name : opt->get_lnames()) known.insert(name);
    }
  }
  for (const auto& [key, value] : entries) {
    if (key == "config" || !known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

void check_distinct(const std::vector<std::string>& inputs, const std::vector<fs::path>& outputs) {
  for (const std::string& in : inputs) {
    if (in.empty()) continue;
    for (const fs::path& o : outputs) {
      if (fs::weakly_canonical(in) == fs::weakly_canonical(o)) {
        throw ConfigError("output " + o.string() + " would overwrite input " + in);
      }
    }
  }
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string fixed(double v, int precision = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

ProjectionModel model_for(const Args& a, const Corpus& corpus) {
  if (!a.checkpoint.empty()) {
    ProjectionModel model = load_checkpoint(a.checkpoint);
    if (corpus.dimension() && *corpus.dimension() != model.input_dim) {
      throw DataError("checkpoint expects dimension " + std::to_string(model.input_dim) +
                      ", corpus has " + std::to_string(*corpus.dimension()));
    }
    return model;
  }
  if (!corpus.dimension()) throw DataError("corpus is empty");
  return ProjectionModel::initialize(*corpus.dimension(), a.seed);
}

// --- subcommands -----------------------------------------------------------

int cmd_synth(const CLI::App* sub, Args& a, std::ostream& out) {
  require(sub, "--out");
  if (a.preset == "benchmark") {
    const SynthConfig b = benchmark_corpus_config();
    SynthConfig& s = a.synth;
    if (!given(sub, "--authors")) s.num_authors = b.num_authors;
    if (!given(sub, "--docs")) s.docs_per_author = b.docs_per_author;
    if (!given(sub, "--topics")) s.num_topics = b.num_topics;
    if (!given(sub, "--topics-per-author")) s.topics_per_author = b.topics_per_author;
    if (!given(sub, "--dim")) s.dim = b.dim;
    if (!given(sub, "--style-weight")) s.style_weight = b.style_weight;
    if (!given(sub, "--noise")) s.noise_sigma = b.noise_sigma;
    if (!given(sub, "--primary-share")) s.primary_topic_share = b.primary_topic_share;
  }
  a.synth.seed = a.seed;
  const Corpus corpus = generate(a.synth);
  auto file = open_output(a.out);
  write_corpus(file, corpus);
  out << "wrote " << corpus.size() << " documents by " << corpus.author_index().size()
      << " authors (dim " << a.synth.dim << ") to " << a.out << '\n';
  return 0;
}

int cmd_ingest(const CLI::App* sub, Args& a, std::ostream& out) {
  require(sub, "--corpus");
  require(sub, "--out-dir");
  const fs::path dir = a.out_dir;
  const std::vector<fs::path> outputs{dir / "train.jsonl", dir / "validation.jsonl",
                                      dir / "test.jsonl"};
  check_distinct({a.corpus}, outputs);
  const Corpus raw = load_corpus(a.corpus);
  const Corpus kept = filter_min_words(raw, a.min_words);
  const CorpusSplit split = split_by_author(kept, a.val_frac, a.test_frac, a.split_seed);
  const Corpus* parts[] = {&split.train, &split.validation, &split.test};
  for (std::size_t i = 0; i < 3; ++i) {
    auto file = open_output(outputs[i]);
    write_corpus(file, *parts[i]);
  }
  out << "read " << raw.size() << " documents, kept " << kept.size() << " with more than "
      << a.min_words << " words\n";
  out << "train " << split.train.author_index().size() << " authors, validation "
      << split.validation.author_index().size() << ", test " << split.test.author_index().size()
      << " -> " << dir.string() << '\n';
  return 0;
}

int cmd_mine(const CLI::App* sub, Args& a, std::ostream& out) {
  require(sub, "--corpus");
  require(sub, "--out");
  check_distinct({a.corpus}, {a.out});
  const Corpus corpus = filter_min_words(load_corpus(a.corpus), a.min_words);
  a.miner.mode = parse_miner_mode(a.miner_mode);
  a.miner.seed = a.seed;
  if (a.ceiling_quantile) a.miner.ceiling = min_pair_similarity_quantile(corpus, *a.ceiling_quantile);
  const auto pairs = select_training_pairs(corpus, a.miner);
  std::size_t eligible = 0;
  for (const auto& [author, docs] : corpus.author_index()) eligible += docs.size() >= 2;
  auto file = open_output(a.out);
  write_pairs(file, pairs);
  out << "mode " << to_string(a.miner.mode);
  if (a.miner.mode == MinerMode::hard) out << ", ceiling " << fixed(a.miner.ceiling, 4);
  out << ": " << pairs.size() << " of " << eligible << " authors kept, "
      << eligible - pairs.size() << " excluded -> " << a.out << '\n';
  return 0;
}

int cmd_plan(const CLI::App* sub, Args& a, std::ostream& out) {
  require(sub, "--corpus");
  require(sub, "--pairs");
  require(sub, "--out");
  check_distinct({a.corpus, a.pairs, a.checkpoint}, {a.out});
  const Corpus corpus = load_corpus(a.corpus);
  const auto pairs = load_pairs(a.pairs);
  a.batch.seed = a.seed;
  a.batch.strategy = parse_batch_strategy(a.strategy);
  const ProjectionModel model = model_for(a, corpus);
  const BatchPlan plan =
      build_epoch_plan(pairs, epoch_vectors(model, corpus, pairs), a.batch, a.epoch);
  auto file = open_output(a.out);
  write_plan(file, plan, a.batch);
  out << plan.batches.size() << " batches over " << plan.num_authors() << " authors (strategy "
      << a.strategy << ", epoch " << a.epoch << ") -> " << a.out << '\n';
  return 0;
}

int cmd_train(const CLI::App* sub, Args& a, std::ostream& out) {
  require(sub, "--corpus");
  require(sub, "--pairs");
  require(sub, "--validation");
  require(sub, "--out-dir");
  const fs::path dir = a.out_dir;
  const fs::path model_path = dir / "model.bin";
  const fs::path history_path = dir / "history.jsonl";
  check_distinct({a.corpus, a.pairs, a.validation}, {model_path, history_path});
  const Corpus corpus = load_corpus(a.corpus);
  const auto pairs = load_pairs(a.pairs);
  const Corpus validation = load_corpus(a.validation);
  a.batch.seed = a.seed;
  a.batch.strategy = parse_batch_strategy(a.strategy);
  a.train.seed = a.seed;
  const RetrievalTask task = build_task(validation, parse_task_mode(a.val_mode), a.task_seed);
  const TrainingResult result =
      run_training(corpus, pairs, a.batch, a.train, validation, task,
                   a.concurrent ? Execution::concurrent : Execution::sequential);

  fs::create_directories(dir);
  save_checkpoint(model_path, result.best.model,
                  {result.best.epoch, a.seed, a.train.temperature, a.train.learning_rate});
  auto history = open_output(history_path);
  write_history(history, result.history);

  out << std::left << std::setw(7) << "epoch" << std::setw(26) << "plan source" << std::right
      << std::setw(9) << "batches" << std::setw(12) << "train loss" << std::setw(15)
      << "val Success@8" << '\n';
  for (const EpochState& e : result.history) {
    out << std::left << std::setw(7) << e.epoch << std::setw(26) << e.plan_source << std::right
        << std::setw(9) << e.num_batches << std::setw(12) << fixed(e.mean_train_loss, 4)
        << std::setw(15) << fixed(e.validation_score) << '\n';
  }
  out << "selected epoch " << result.best.epoch << " -> " << model_path.string() << '\n';
  return 0;
}

int cmd_eval(const CLI::App* sub, Args& a, std::ostream& out) {
  require(sub, "--corpus");
  if (!a.out.empty()) check_distinct({a.corpus, a.checkpoint}, {a.out});
  const Corpus corpus = load_corpus(a.corpus);
  const ProjectionModel model = model_for(a, corpus);
  std::vector<TaskMode> modes;
  if (a.eval_mode == "both") {
    modes = {TaskMode::per_genre, TaskMode::cross_genre};
  } else {
    modes = {parse_task_mode(a.eval_mode)};
  }
  std::string label = a.label;
  if (label.empty()) label = a.checkpoint.empty() ? "untrained" : fs::path(a.checkpoint).stem().string();
  std::vector<std::pair<std::string, MetricsReport>> rows;
  for (TaskMode mode : modes) {
    rows.emplace_back(label, evaluate(model, corpus, build_task(corpus, mode, a.task_seed,
                                                                a.min_query_docs)));
  }
  print_metrics_table(out, rows);
  if (!a.out.empty()) {
    auto file = open_output(a.out);
    for (const auto& [l, report] : rows) write_metrics(file, report, l);
  }
  return 0;
}

int cmd_ablate(const CLI::App* sub, Args& a, std::ostream& out) {
  if (!a.benchmark) require(sub, "--corpus");
  if (!a.out.empty()) check_distinct({a.corpus}, {a.out});
  if (a.seeds.empty()) throw ConfigError("ablate: --seeds must list at least one seed");
  Corpus corpus;
  if (a.benchmark) {
    corpus = generate(benchmark_corpus_config());
    if (!given(sub, "--lr")) a.train.learning_rate = benchmark_learning_rate;
    if (!given(sub, "--ceiling") && !a.ceiling_quantile) a.ceiling_quantile = 0.25;
  } else {
    corpus = load_corpus(a.corpus);
  }
  const CorpusSplit split = split_by_author(corpus, a.val_frac, a.test_frac, a.split_seed);

  RunSpec spec;
  spec.min_words = a.min_words;
  spec.miner = a.miner;
  spec.miner.mode = parse_miner_mode(a.miner_mode);
  spec.batch = a.batch;
  spec.batch.strategy = parse_batch_strategy(a.strategy);
  spec.train = a.train;
  spec.validation_mode = parse_task_mode(a.val_mode);
  spec.task_seed = a.task_seed;
  if (a.ceiling_quantile) {
    spec.miner.ceiling =
        min_pair_similarity_quantile(filter_min_words(split.train, a.min_words), *a.ceiling_quantile);
  }

  const std::vector<AblationCell> cells =
      a.ceilings.empty() ? run_curriculum_grid(split, spec, a.seeds)
                         : run_ceiling_sweep(split, spec, a.ceilings, a.seeds);

  std::size_t label_w = 5;
  for (const auto& c : cells) label_w = std::max(label_w, c.label.size());
  out << std::left << std::setw(static_cast<int>(label_w) + 2) << "label" << std::right
      << std::setw(8) << "pairs" << std::setw(10) << "ceiling" << std::setw(12) << "per S@8"
      << std::setw(10) << "per MRR" << std::setw(12) << "cross S@8" << std::setw(11)
      << "cross MRR" << '\n';
  for (const auto& c : cells) {
    out << std::left << std::setw(static_cast<int>(label_w) + 2) << c.label << std::right
        << std::setw(8) << c.num_pairs << std::setw(10)
        << (c.miner == MinerMode::hard ? fixed(c.ceiling, 4) : std::string("-")) << std::setw(12)
        << fixed(c.per_genre.success_at_8) << std::setw(10) << fixed(c.per_genre.mrr)
        << std::setw(12) << fixed(c.cross_genre.success_at_8) << std::setw(11)
        << fixed(c.cross_genre.mrr) << '\n';
  }
  out << "averaged over " << a.seeds.size() << " seed(s)\n";
  if (!a.out.empty()) {
    auto file = open_output(a.out);
    for (const auto& c : cells) {
      write_metrics(file, c.per_genre, c.label);
      write_metrics(file, c.cross_genre, c.label);
    }
  }
  return 0;
}

struct MetricRow {
  std::string label, mode, scope;
  double success_at_8 = 0.0;
  double mrr = 0.0;
  std::optional<std::size_t> num_queries;
};

std::vector<MetricRow> read_metric_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read metrics file " + path);
  std::vector<MetricRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      MetricRow row;
      row.label = j.at("label").get<std::string>();
      row.mode = j.at("mode").get<std::string>();
      row.scope = j.at("scope").get<std::string>();
      row.success_at_8 = j.at("success_at_8").get<double>();
      row.mrr = j.at("mrr").get<double>();
      if (j.contains("num_queries")) row.num_queries = j["num_queries"].get<std::size_t>();
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed metrics row: " + e.what());
    }
  }
  return rows;
}

int cmd_report(const CLI::App* sub, Args& a, std::ostream& out) {
  if (a.metrics_files.empty()) throw ConfigError("report: at least one metrics file is required");
  if (!a.summary.empty()) check_distinct(a.metrics_files, {a.summary});
  (void)sub;
  std::vector<MetricRow> rows;
  for (const std::string& path : a.metrics_files) {
    auto part = read_metric_rows(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw DataError("no metric rows found");

  std::size_t label_w = 5, scope_w = 5;
  for (const auto& r : rows) {
    label_w = std::max(label_w, r.label.size());
    scope_w = std::max(scope_w, r.scope.size());
  }
  auto line = [&](const std::string& label, const std::string& mode, const std::string& scope,
                  const std::string& queries, const std::string& s8, const std::string& m) {
    out << std::left << std::setw(static_cast<int>(label_w) + 2) << label << std::setw(13) << mode
        << std::setw(static_cast<int>(scope_w) + 2) << scope << std::right << std::setw(8)
        << queries << std::setw(11) << s8 << std::setw(9) << m << '\n';
  };
  line("label", "mode", "scope", "queries", "Success@8", "MRR");
  for (const auto& r : rows) {
    line(r.label, r.mode, r.scope, r.num_queries ? std::to_string(*r.num_queries) : "",
         fixed(r.success_at_8), fixed(r.mrr));
  }

  json summary;
  summary["files"] = a.metrics_files;
  summary["rows"] = rows.size();
  std::vector<std::string> labels;
  for (const auto& r : rows) {
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  }
  summary["labels"] = labels;
  json modes = json::object();
  for (const auto& r : rows) {
    if (r.scope != "all") continue;
    json& m = modes[r.mode];
    if (m.is_null()) m = {{"runs", 0}, {"mean_success_at_8", 0.0}, {"mean_mrr", 0.0}};
    m["runs"] = m["runs"].get<int>() + 1;
    m["mean_success_at_8"] = m["mean_success_at_8"].get<double>() + r.success_at_8;
    m["mean_mrr"] = m["mean_mrr"].get<double>() + r.mrr;
    if (!m.contains("best_label") || r.success_at_8 > m["best_success_at_8"].get<double>()) {
      m["best_label"] = r.label;
      m["best_success_at_8"] = r.success_at_8;
    }
  }
  for (auto& [mode, m] : modes.items()) {
    const double runs = m["runs"].get<double>();
    m["mean_success_at_8"] = m["mean_success_at_8"].get<double>() / runs;
    m["mean_mrr"] = m["mean_mrr"].get<double>() / runs;
  }
  summary["modes"] = modes;
  out << summary.dump() << '\n';
  if (!a.summary.empty()) {
    auto file = open_output(a.summary);
    file << summary.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Args a;
  CLI::App app{"Authorship-attribution training curricula: synthetic data, hard-positive mining, "
               "hard-negative batching, contrastive training and retrieval evaluation.",
               "authcurr"};
  app.require_subcommand(1);

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_config_option(synth, a);
  synth->add_option("--out", a.out, "output corpus (JSONL)");
  synth->add_option("--preset", a.preset, "parameter preset: default | benchmark")
      ->check(CLI::IsMember({"default", "benchmark"}))
      ->capture_default_str();
  synth->add_option("--authors", a.synth.num_authors)->capture_default_str();
  synth->add_option("--docs", a.synth.docs_per_author, "documents per author")->capture_default_str();
  synth->add_option("--topics", a.synth.num_topics)->capture_default_str();
  synth->add_option("--topics-per-author", a.synth.topics_per_author)->capture_default_str();
  synth->add_option("--dim", a.synth.dim, "embedding dimension")->capture_default_str();
  synth->add_option("--style-weight", a.synth.style_weight)->capture_default_str();
  synth->add_option("--noise", a.synth.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  synth->add_option("--primary-share", a.synth.primary_topic_share,
                    "share of an author's documents in its first topic (0 = even)")
      ->capture_default_str();
  synth->add_option("--min-words", a.synth.min_words)->capture_default_str();
  synth->add_option("--seed", a.seed)->capture_default_str();

  CLI::App* ingest = app.add_subcommand("ingest", "validate, filter and split a corpus by author");
  add_config_option(ingest, a);
  ingest->add_option("--corpus", a.corpus, "input corpus (JSONL)");
  ingest->add_option("--out-dir", a.out_dir, "directory for train/validation/test.jsonl");
  ingest->add_option("--min-words", a.min_words)->capture_default_str();
  add_split_options(ingest, a);

  CLI::App* mine = app.add_subcommand("mine", "select one training pair per author");
  add_config_option(mine, a);
  mine->add_option("--corpus", a.corpus, "training corpus (JSONL)");
  mine->add_option("--out", a.out, "output pairs (JSONL)");
  add_miner_options(mine, a);
  mine->add_option("--seed", a.seed, "seed for random pairing")->capture_default_str();

  CLI::App* plan = app.add_subcommand("plan", "build one epoch's batch plan");
  add_config_option(plan, a);
  plan->add_option("--corpus", a.corpus, "training corpus (JSONL)");
  plan->add_option("--pairs", a.pairs, "pairs file from mine");
  plan->add_option("--out", a.out, "output plan (text)");
  plan->add_option("--checkpoint", a.checkpoint, "model whose projections drive the plan");
  plan->add_option("--epoch", a.epoch)->capture_default_str();
  plan->add_option("--seed", a.seed)->capture_default_str();
  add_batch_options(plan, a);

  CLI::App* train = app.add_subcommand("train", "train the projection head");
  add_config_option(train, a);
  train->add_option("--corpus", a.corpus, "training corpus (JSONL)");
  train->add_option("--pairs", a.pairs, "pairs file from mine");
  train->add_option("--validation", a.validation, "validation corpus (JSONL)");
  train->add_option("--out-dir", a.out_dir, "directory for model.bin and history.jsonl");
  train->add_option("--val-mode", a.val_mode, "validation task: per | cross")
      ->check(CLI::IsMember({"per", "cross", "per_genre", "cross_genre"}))
      ->capture_default_str();
  train->add_option("--task-seed", a.task_seed)->capture_default_str();
  train->add_option("--seed", a.seed)->capture_default_str();
  add_batch_options(train, a);
  add_train_options(train, a);

  CLI::App* eval = app.add_subcommand("eval", "score a model on retrieval tasks");
  add_config_option(eval, a);
  eval->add_option("--corpus", a.corpus, "evaluation corpus (JSONL)");
  eval->add_option("--checkpoint", a.checkpoint, "model file (default: untrained projection)");
  eval->add_option("--seed", a.seed, "initialisation seed when no checkpoint is given")
      ->capture_default_str();
  eval->add_option("--mode", a.eval_mode, "per | cross | both")
      ->check(CLI::IsMember({"per", "cross", "both", "per_genre", "cross_genre"}))
      ->capture_default_str();
  eval->add_option("--task-seed", a.task_seed)->capture_default_str();
  eval->add_option("--min-query-docs", a.min_query_docs, "per-genre query size")
      ->capture_default_str();
  eval->add_option("--label", a.label, "row label in the output");
  eval->add_option("--out", a.out, "metrics output (JSONL)");

  CLI::App* ablate = app.add_subcommand("ablate", "curriculum grid or ceiling sweep");
  add_config_option(ablate, a);
  ablate->add_option("--corpus", a.corpus, "full corpus (JSONL), split by author");
  ablate->add_flag("--benchmark", a.benchmark, "use the reference synthetic corpus");
  ablate->add_option("--ceilings", a.ceilings, "comma-separated ceilings for a sweep")
      ->delimiter(',');
  ablate->add_option("--seeds", a.seeds, "comma-separated seeds to average over")
      ->delimiter(',')
      ->capture_default_str();
  ablate->add_option("--val-mode", a.val_mode, "validation task: per | cross")
      ->check(CLI::IsMember({"per", "cross", "per_genre", "cross_genre"}))
      ->capture_default_str();
  ablate->add_option("--task-seed", a.task_seed)->capture_default_str();
  ablate->add_option("--out", a.out, "metrics output (JSONL)");
  add_split_options(ablate, a);
  add_miner_options(ablate, a);
  add_batch_options(ablate, a);
  add_train_options(ablate, a);

  CLI::App* report = app.add_subcommand("report", "tabulate metrics files");
  add_config_option(report, a);
  report->add_option("metrics", a.metrics_files, "metrics files (JSONL)");
  report->add_option("--summary", a.summary, "also write the summary record here");

  if (args.empty()) {
    err << app.help();
    return 1;
  }
  const std::string& first = args.front();
  if (!first.empty() && first[0] != '-' && app.get_subcommand_no_throw(first) == nullptr) {
    err << "error: unknown subcommand '" << first << "'\nrun 'authcurr --help' for usage\n";
    return 1;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun 'authcurr --help' for usage\n";
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!a.config.empty()) apply_config(&app, sub, read_config_file(a.config));
    const std::string name = sub->get_name();
    if (name == "synth") return cmd_synth(sub, a, out);
    if (name == "ingest") return cmd_ingest(sub, a, out);
    if (name == "mine") return cmd_mine(sub, a, out);
    if (name == "plan") return cmd_plan(sub, a, out);
    if (name == "train") return cmd_train(sub, a, out);
    if (name == "eval") return cmd_eval(sub, a, out);
    if (name == "ablate") return cmd_ablate(sub, a, out);
    return cmd_report(sub, a, out);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace authcurr
