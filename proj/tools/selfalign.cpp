// selfalign: command-line front end. Exit codes: 0 ok, 1 usage, 2 data, 3 numeric.
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "selfalign/commands.hpp"
#include "selfalign/config.hpp"
#include "selfalign/errors.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct Sub {
  CLI::App* app;
  std::function<void(const selfalign::RunConfig&)> run;
};

// Binds a flag to a config key; values are applied after the config file.
void bind_key(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(flag, [&ov, key](const std::string& v) { ov.emplace_back(key, v); }, help);
}

void bind_switch(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                 const std::string& help) {
  app->add_flag_function(flag, [&ov, key](std::int64_t) { ov.emplace_back(key, "true"); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selfalign: synonym self-alignment pretraining and nearest-neighbour entity linking"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::vector<Sub> subs;

  auto add = [&](const std::string& name, const std::string& help, auto run) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "flat key = value config file");
    bind_key(sub, overrides, "--seed", "seed", "RNG seed (init, pairs, shuffling, synth)");
    bind_key(sub, overrides, "--out", "out", "output directory");
    sub->add_option_function<std::vector<std::string>>(
        "--set",
        [&](const std::vector<std::string>& kvs) {
          for (const auto& kv : kvs) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
            overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
          }
        },
        "override any config key (repeatable)");
    subs.push_back({sub, run});
    return sub;
  };

  auto* prep = add("prepare-pairs", "dictionary -> positive pair list",
                   [](const selfalign::RunConfig& c) { selfalign::cmd_prepare_pairs(c, std::cout); });
  bind_key(prep, overrides, "--dict", "dictionary", "dictionary TSV (cui<TAB>name)");
  bind_key(prep, overrides, "--cap", "pair_cap", "max pairs per concept");

  auto* pre = add("pretrain", "self-alignment pretraining on a pair list",
                  [](const selfalign::RunConfig& c) { selfalign::cmd_pretrain(c, std::cout); });
  bind_key(pre, overrides, "--pairs", "pairs", "pair TSV");
  bind_key(pre, overrides, "--dict", "dictionary", "dictionary TSV, used when --pairs is absent");
  bind_key(pre, overrides, "--loss", "loss", "loss kind");
  bind_key(pre, overrides, "--epochs", "epochs", "passes over the pair list");
  bind_key(pre, overrides, "--mining", "mining", "hard-pair mining on/off (true/false)");

  auto* fin = add("finetune", "fine-tune a checkpoint on labelled mentions",
                  [](const selfalign::RunConfig& c) { selfalign::cmd_finetune(c, std::cout); });
  bind_key(fin, overrides, "--mentions", "train_mentions", "mention TSV (mention<TAB>cui|cui)");
  bind_key(fin, overrides, "--dict", "dictionary", "dictionary TSV");
  bind_key(fin, overrides, "--checkpoint", "checkpoint", "starting checkpoint");
  bind_key(fin, overrides, "--epochs", "epochs", "passes over the pair list");

  auto* ev = add("evaluate", "Acc@k of nearest-neighbour linking",
                 [](const selfalign::RunConfig& c) { selfalign::cmd_evaluate(c, std::cout); });
  bind_key(ev, overrides, "--checkpoint", "checkpoint", "model checkpoint");
  bind_key(ev, overrides, "--dict", "dictionary", "dictionary TSV");
  bind_key(ev, overrides, "--mentions", "test_mentions", "mention TSV");
  bind_key(ev, overrides, "--ks", "ks", "comma-separated k values (1 and 5 always included)");
  bind_switch(ev, overrides, "--untrained", "untrained", "evaluate a freshly initialized encoder");

  auto* q = add("query", "rank dictionary names for one mention",
                [](const selfalign::RunConfig& c) { selfalign::cmd_query(c, std::cout); });
  bind_key(q, overrides, "--checkpoint", "checkpoint", "model checkpoint");
  bind_key(q, overrides, "--dict", "dictionary", "dictionary TSV");
  bind_key(q, overrides, "--mention", "query", "mention string");
  bind_key(q, overrides, "--k", "k", "number of candidates");
  bind_switch(q, overrides, "--untrained", "untrained", "use a freshly initialized encoder");

  auto* em = add("embed", "export unit embeddings of every dictionary name",
                 [](const selfalign::RunConfig& c) { selfalign::cmd_embed(c, std::cout); });
  bind_key(em, overrides, "--checkpoint", "checkpoint", "model checkpoint");
  bind_key(em, overrides, "--dict", "dictionary", "dictionary TSV");
  bind_switch(em, overrides, "--untrained", "untrained", "use a freshly initialized encoder");

  auto* sy = add("synth", "generate a synthetic synonym benchmark",
                 [](const selfalign::RunConfig& c) { selfalign::cmd_synth(c, std::cout); });
  bind_key(sy, overrides, "--concepts", "synth_concepts", "number of concepts");
  bind_key(sy, overrides, "--synonyms", "synth_synonyms", "synonyms per concept, held-out ones included");
  bind_key(sy, overrides, "--edit-ops", "synth_edit_ops", "edits per generated synonym");
  bind_key(sy, overrides, "--holdout", "synth_holdout", "held-out synonyms per concept");

  auto* lc = add("loss-compare", "train once per loss kind and tabulate Acc@1/Acc@5",
                 [](const selfalign::RunConfig& c) { selfalign::cmd_losscompare(c, std::cout); });
  bind_key(lc, overrides, "--pairs", "pairs", "pair TSV");
  bind_key(lc, overrides, "--dict", "dictionary", "dictionary TSV");
  bind_key(lc, overrides, "--mentions", "test_mentions", "mention TSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    selfalign::RunConfig config;
    if (!config_path.empty()) selfalign::apply_config_file(config, config_path);
    for (const auto& [key, value] : overrides) config.set(key, value);
    for (const auto& s : subs)
      if (s.app->parsed()) s.run(config);
    return 0;
  } catch (const selfalign::Error& e) {
    std::cerr << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
