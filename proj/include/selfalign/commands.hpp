#ifndef SELFALIGN_COMMANDS_HPP_
#define SELFALIGN_COMMANDS_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "selfalign/config.hpp"
#include "selfalign/encoder.hpp"
#include "selfalign/linker.hpp"

namespace selfalign {

// Each command reads its inputs from the resolved RunConfig, writes its files
// into config.out (created if missing) together with
// `<command>.resolved.conf`, and prints a short summary to `out`. Errors
// propagate as selfalign::Error.

/// -> pairs.tsv
void cmd_prepare_pairs(const RunConfig& config, std::ostream& out);
/// -> model.ckpt, train_log.csv
void cmd_pretrain(const RunConfig& config, std::ostream& out);
/// -> model.ckpt, train_log.csv (starts from config.checkpoint)
void cmd_finetune(const RunConfig& config, std::ostream& out);
/// -> eval.json; prints `acc@1=<v> acc@5=<v>`
EvalReport cmd_evaluate(const RunConfig& config, std::ostream& out);
/// Prints `rank<TAB>cui<TAB>name<TAB>similarity` per line. Writes nothing.
void cmd_query(const RunConfig& config, std::ostream& out);
/// -> embeddings.tsv
void cmd_embed(const RunConfig& config, std::ostream& out);
/// -> dictionary.tsv, train_mentions.tsv, test_mentions.tsv
void cmd_synth(const RunConfig& config, std::ostream& out);

struct LossCompareRow {
  LossKind kind;
  double final_loss;  // mean batch loss over the last epoch
  double acc_at_1;
  double acc_at_5;
};

struct LossCompareResult {
  double untrained_acc_at_1 = 0.0;
  double untrained_acc_at_5 = 0.0;
  std::vector<LossCompareRow> rows;  // one per registry kind, registry order
};

/// Trains one model per loss kind from the same initialization, seed and
/// pairs, each with that kind's registry defaults. -> loss_compare.tsv
LossCompareResult cmd_losscompare(const RunConfig& config, std::ostream& out);

/// Model named by config.checkpoint, or a fresh init when config.untrained.
EncoderModel load_or_init_model(const RunConfig& config);

}  // namespace selfalign

#endif  // SELFALIGN_COMMANDS_HPP_
