#include "selfalign/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "selfalign/checkpoint.hpp"
#include "selfalign/errors.hpp"
#include "selfalign/ontology.hpp"
#include "selfalign/pairgen.hpp"
#include "selfalign/synth.hpp"
#include "selfalign/trainer.hpp"

namespace selfalign {

namespace fs = std::filesystem;

namespace {

const std::string& require(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("missing required setting '") + key + "'");
  return value;
}

fs::path prepare_out(const RunConfig& config, const char* command) {
  const fs::path dir = require(config.out, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), ec.message());
  write_resolved_config(config, dir / (std::string(command) + ".resolved.conf"));
  return dir;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// Pair file when given, otherwise generated from the dictionary.
PairList training_pairs(const RunConfig& config) {
  if (!config.pairs.empty()) return read_pairs(config.pairs);
  const Ontology dict = load_dictionary(require(config.dictionary, "pairs' or 'dictionary"));
  return generate_pairs(dict, config.train.pair_cap, config.seed);
}

void save_training(const fs::path& dir, const TrainResult& result, std::ostream& out) {
  save_checkpoint(dir / "model.ckpt", result.model, &result.optimizer);
  write_train_log(result.log, dir / "train_log.csv");
  out << "iterations=" << result.log.records.size();
  if (!result.log.records.empty()) out << " final_loss=" << fmt("%.6f", result.log.records.back().loss);
  out << " checkpoint=" << (dir / "model.ckpt").string() << '\n';
}

double last_epoch_mean(const TrainLog& log, std::size_t per_epoch) {
  if (log.records.empty() || per_epoch == 0) return 0.0;
  const std::size_t n = std::min(per_epoch, log.records.size());
  double total = 0.0;
  for (std::size_t i = log.records.size() - n; i < log.records.size(); ++i) total += log.records[i].loss;
  return total / static_cast<double>(n);
}

}  // namespace

EncoderModel load_or_init_model(const RunConfig& config) {
  if (config.untrained) return init_model(config.resolved_encoder());
  return load_checkpoint(require(config.checkpoint, "checkpoint")).model;
}

void cmd_prepare_pairs(const RunConfig& config, std::ostream& out) {
  const Ontology dict = load_dictionary(require(config.dictionary, "dictionary"));
  const fs::path dir = prepare_out(config, "prepare-pairs");
  const PairList pairs = generate_pairs(dict, config.train.pair_cap, config.seed);
  write_pairs(pairs, dir / "pairs.tsv");
  out << "pairs=" << pairs.size() << " concepts=" << dict.concepts().size() << " file=" << (dir / "pairs.tsv").string()
      << '\n';
}

void cmd_pretrain(const RunConfig& config, std::ostream& out) {
  const TrainConfig train = config.resolved_train();
  train.validate();
  const PairList pairs = training_pairs(config);
  const EncoderModel model = init_model(config.resolved_encoder());
  const fs::path dir = prepare_out(config, "pretrain");
  save_training(dir, pretrain(pairs, model, train), out);
}

void cmd_finetune(const RunConfig& config, std::ostream& out) {
  const TrainConfig train = config.resolved_train();
  train.validate();
  const MentionSet mentions = load_mentions(require(config.train_mentions, "train_mentions"));
  const Ontology dict = load_dictionary(require(config.dictionary, "dictionary"));
  EncoderModel model = load_checkpoint(require(config.checkpoint, "checkpoint")).model;
  const fs::path dir = prepare_out(config, "finetune");
  save_training(dir, finetune(mentions, dict, std::move(model), train), out);
}

EvalReport cmd_evaluate(const RunConfig& config, std::ostream& out) {
  const Ontology dict = load_dictionary(require(config.dictionary, "dictionary"));
  const MentionSet mentions = load_mentions(require(config.test_mentions, "test_mentions"));
  if (mentions.empty()) throw EmptyMentionSet();
  const EncoderModel model = load_or_init_model(config);
  const fs::path dir = prepare_out(config, "evaluate");
  const LinkIndex index = build_index(model, dict, config.index_batch);
  const EvalReport report = evaluate(index, mentions, model, config.ks);
  write_eval_json(report, dir / "eval.json");
  out << "acc@1=" << fmt("%.6f", report.acc_at_1) << " acc@5=" << fmt("%.6f", report.acc_at_5) << '\n';
  return report;
}

void cmd_query(const RunConfig& config, std::ostream& out) {
  const Ontology dict = load_dictionary(require(config.dictionary, "dictionary"));
  const EncoderModel model = load_or_init_model(config);
  const std::string text = normalize_name(require(config.query, "query"));
  const LinkIndex index = build_index(model, dict, config.index_batch);
  const Prediction p = topk(index, text, model, config.k);
  for (std::size_t r = 0; r < p.ranked.size(); ++r) {
    const auto& c = p.ranked[r];
    out << (r + 1) << '\t' << c.cui << '\t' << c.name << '\t' << fmt("%.17g", c.similarity) << '\n';
  }
}

void cmd_embed(const RunConfig& config, std::ostream& out) {
  const Ontology dict = load_dictionary(require(config.dictionary, "dictionary"));
  const EncoderModel model = load_or_init_model(config);
  const fs::path dir = prepare_out(config, "embed");
  const LinkIndex index = build_index(model, dict, config.index_batch);
  export_embeddings(index, dir / "embeddings.tsv");
  out << "names=" << index.size() << " file=" << (dir / "embeddings.tsv").string() << '\n';
}

void cmd_synth(const RunConfig& config, std::ostream& out) {
  const SyntheticData data = generate_synthetic(config.resolved_synth());
  const fs::path dir = prepare_out(config, "synth");
  write_synthetic(data, dir);
  out << "dictionary=" << data.dictionary.size() << " train_mentions=" << data.train.size()
      << " test_mentions=" << data.test.size() << " dir=" << dir.string() << '\n';
}

LossCompareResult cmd_losscompare(const RunConfig& config, std::ostream& out) {
  TrainConfig base = config.resolved_train();
  base.validate();
  const PairList pairs = training_pairs(config);
  const Ontology dict = load_dictionary(require(config.dictionary, "dictionary"));
  const MentionSet mentions = load_mentions(require(config.test_mentions, "test_mentions"));
  if (mentions.empty()) throw EmptyMentionSet();
  const EncoderModel initial = init_model(config.resolved_encoder());
  const fs::path dir = prepare_out(config, "loss-compare");

  const std::size_t per_epoch = batches_per_epoch(pairs.size(), base.batch_pairs);
  LossCompareResult result;
  {
    const EvalReport r = evaluate(build_index(initial, dict, config.index_batch), mentions, initial, config.ks);
    result.untrained_acc_at_1 = r.acc_at_1;
    result.untrained_acc_at_5 = r.acc_at_5;
  }
  for (LossKind kind : kAllLossKinds) {
    TrainConfig train = base;
    train.loss = default_loss_params(kind);
    const TrainResult trained = pretrain(pairs, initial, train);
    const EvalReport r =
        evaluate(build_index(trained.model, dict, config.index_batch), mentions, trained.model, config.ks);
    result.rows.push_back({kind, last_epoch_mean(trained.log, per_epoch), r.acc_at_1, r.acc_at_5});
  }

  std::string table;
  table += "# seed=" + std::to_string(config.seed) + " pairs=" + (config.pairs.empty() ? "(from dictionary)" : config.pairs) +
           " n_pairs=" + std::to_string(pairs.size()) + " dictionary=" + config.dictionary +
           " mentions=" + config.test_mentions + " iterations=" + std::to_string(per_epoch * base.epochs) + "\n";
  table += "# untrained acc@1=" + fmt("%.6f", result.untrained_acc_at_1) +
           " acc@5=" + fmt("%.6f", result.untrained_acc_at_5) + "\n";
  table += "kind\tfinal_loss\tacc@1\tacc@5\n";
  for (const auto& row : result.rows)
    table += std::string(to_string(row.kind)) + "\t" + fmt("%.6f", row.final_loss) + "\t" + fmt("%.6f", row.acc_at_1) +
             "\t" + fmt("%.6f", row.acc_at_5) + "\n";
  out << table;
  std::ofstream file(dir / "loss_compare.tsv", std::ios::binary | std::ios::trunc);
  if (!file) throw IoError((dir / "loss_compare.tsv").string(), "cannot open for writing");
  file << table;
  if (!file) throw IoError((dir / "loss_compare.tsv").string(), "write failed");
  return result;
}

}  // namespace selfalign
