// groundbridge: simulate -> train -> index -> synth-embeddings/ingest -> ground -> report

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groundbridge/corpus.hpp"
#include "groundbridge/csv.hpp"
#include "groundbridge/curriculum.hpp"
#include "groundbridge/datasim.hpp"
#include "groundbridge/error.hpp"
#include "groundbridge/lexicon.hpp"
#include "groundbridge/objindex.hpp"
#include "groundbridge/persist.hpp"
#include "groundbridge/report.hpp"
#include "groundbridge/seeding.hpp"
#include "groundbridge/trainer.hpp"

namespace fs = std::filesystem;
using namespace groundbridge;

namespace {

constexpr std::uint64_t kDefaultSeed = 7;
constexpr const char* kSeedEnv = "GROUND_BRIDGE_SEED";

// `key = value` lines, '#' comments. Keys use option names with '_' or '-'.
std::map<std::string, std::string> read_config(const fs::path& path) {
  std::map<std::string, std::string> out;
  auto in = csv::open_in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::config,
            path.string() + ":" + std::to_string(n) + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string config_key(const CLI::Option* opt) {
  std::string name = opt->get_name(false, false);
  while (!name.empty() && name.front() == '-') name.erase(name.begin());
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

// Fills options the command line left unset from the config file.
void apply_config(CLI::App& app, const std::map<std::string, std::string>& config) {
  for (CLI::Option* opt : app.get_options()) {
    const std::string key = config_key(opt);
    if (key == "seed" || key == "config" || key == "help" || opt->count() > 0) continue;
    const auto it = config.find(key);
    if (it == config.end()) continue;
    opt->add_result(it->second);
    opt->run_callback();
  }
}

// --seed beats GROUND_BRIDGE_SEED, which beats the config file.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value,
                           const std::map<std::string, std::string>& config,
                           std::uint64_t fallback = kDefaultSeed) {
  auto parse = [](const std::string& v, const std::string& where) {
    try {
      std::size_t used = 0;
      const auto s = std::stoull(v, &used, 10);
      require(used == v.size(), ErrorKind::config, "");
      return static_cast<std::uint64_t>(s);
    } catch (const std::exception&) {
      fail(ErrorKind::config, where + " seed '" + v + "' is not a non-negative integer");
    }
  };
  if (flag->count() > 0) return flag_value;
  if (const char* env = std::getenv(kSeedEnv); env && *env) return parse(env, kSeedEnv);
  if (const auto it = config.find("seed"); it != config.end()) return parse(it->second, "config");
  return fallback;
}

void require_inputs(std::initializer_list<std::pair<const char*, const fs::path*>> inputs) {
  for (const auto& [what, p] : inputs) {
    require(!p->empty(), ErrorKind::config, std::string("missing required input --") + what);
    require(fs::exists(*p), ErrorKind::config, std::string("--") + what + " '" + p->string() + "' does not exist");
  }
}

DatasetSplit load_split(const fs::path& data, std::uint64_t seed) {
  const auto samples = read_dataset_csv(data);
  return build_split(samples, SplitConfig{}, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground word vectors in a learned object-behaviour space"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::uint64_t seed_flag = kDefaultSeed;
  fs::path config_path;
  auto* seed_opt = app.add_option("--seed", seed_flag, "Global seed (env GROUND_BRIDGE_SEED; default 7)");
  app.add_option("--config", config_path, "key = value file supplying defaults for any option")
      ->check(CLI::ExistingFile);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic stacking dataset (CSV)");
  fs::path sim_out, sim_gen_config;
  GeneratorConfig gen;
  std::vector<std::string> sim_labels;
  sim->add_option("--out", sim_out, "Output CSV")->required();
  sim->add_option("--generator-config", sim_gen_config, "Generator key = value file")->check(CLI::ExistingFile);
  sim->add_option("--samples-per-class", gen.samples_per_class, "Samples per label")->capture_default_str();
  sim->add_option("--noise-scale", gen.noise_scale, "Bounded noise amplitude")->capture_default_str();
  sim->add_option("--placement-tolerance", gen.placement_tolerance, "In-tolerance placement offset")
      ->capture_default_str();
  sim->add_option("--misplacement-rate", gen.misplacement_rate, "Fraction of out-of-tolerance placements")
      ->capture_default_str();
  sim->add_option("--labels", sim_labels, "Subset of labels (keys or display names)")->delimiter(',');

  // train
  auto* trn = app.add_subcommand("train", "Train the metric encoder");
  fs::path trn_data, trn_out, trn_history;
  TrainConfig tcfg;
  trn->add_option("--data", trn_data, "Dataset CSV")->required();
  trn->add_option("--out", trn_out, "Output parameters JSON")->required();
  trn->add_option("--history", trn_history, "Per-batch history CSV");
  trn->add_option("--epochs", tcfg.epochs, "Epochs")->capture_default_str();
  trn->add_option("--per-class", tcfg.per_class, "Samples per class in each batch")->capture_default_str();
  trn->add_option("--lr", tcfg.adam.lr, "Adam learning rate")->capture_default_str();
  trn->add_flag("--include-type-id", tcfg.include_type_id, "Feed the type-id feature to the encoder");
  bool trn_verbose = false;
  trn->add_flag("--verbose", trn_verbose, "Print per-epoch mean loss");

  // index
  auto* idx = app.add_subcommand("index", "Embed the index split and score retrieval");
  fs::path idx_data, idx_params, idx_out, idx_confusion, idx_pca;
  std::size_t idx_k = 10;
  bool idx_type_id = false;
  idx->add_option("--data", idx_data, "Dataset CSV")->required();
  idx->add_option("--params", idx_params, "Encoder parameters JSON")->required();
  idx->add_option("--out", idx_out, "Output index JSON")->required();
  idx->add_option("--confusion", idx_confusion, "Confusion CSV (a '.full.csv' twin keeps full precision)");
  idx->add_option("--pca", idx_pca, "PCA coordinates of the index embeddings");
  idx->add_option("--k", idx_k, "Neighbours for the confusion vote")->capture_default_str();
  idx->add_flag("--include-type-id", idx_type_id, "Encoder was trained with the type-id feature");

  // synth-embeddings
  auto* syn = app.add_subcommand("synth-embeddings", "Synthetic contextual token vectors for the corpus");
  fs::path syn_corpus, syn_out;
  SynthSpec sspec;
  syn->add_option("--corpus", syn_corpus, "Corpus file (id<TAB>sentence)")->required();
  syn->add_option("--out", syn_out, "Output JSON Lines")->required();
  syn->add_option("--dim", sspec.dim, "Vector dimension")->capture_default_str();
  syn->add_option("--eta", sspec.eta, "Object/concept entanglement in [0, 1]")->capture_default_str();
  syn->add_option("--sigma", sspec.sigma, "Per-coordinate noise")->capture_default_str();
  syn->add_option("--context-weight", sspec.context_weight, "Sentence context in cylinder/cone tokens")
      ->capture_default_str();
  syn->add_option("--model-tag", sspec.model_tag, "Model tag written to each record")->capture_default_str();

  // ingest
  auto* ing = app.add_subcommand("ingest", "Validate and compose raw or composed token JSON Lines");
  fs::path ing_in, ing_out, ing_corpus;
  ing->add_option("--in", ing_in, "Input JSON Lines (raw or composed)")->required();
  ing->add_option("--out", ing_out, "Output composed JSON Lines")->required();
  ing->add_option("--corpus", ing_corpus, "Check every record resolves against this corpus");

  // ground
  auto* gnd = app.add_subcommand("ground", "Run a grounding curriculum and write reports");
  fs::path gnd_tokens, gnd_corpus, gnd_index, gnd_out;
  std::string gnd_preset = "objects-first";
  std::string gnd_model;
  bool gnd_hint_all = false;
  CurriculumOptions copt;
  gnd->add_option("--tokens", gnd_tokens, "Token JSON Lines")->required();
  gnd->add_option("--corpus", gnd_corpus, "Corpus file")->required();
  gnd->add_option("--index", gnd_index, "Index JSON")->required();
  gnd->add_option("--out", gnd_out, "Output directory")->required();
  gnd->add_option("--preset", gnd_preset, "objects-first | concepts-first")->capture_default_str();
  gnd->add_flag("--hint-all", gnd_hint_all, "Also hint block/ball");
  gnd->add_option("--lambda", copt.lambda, "Ridge strength")->capture_default_str();
  gnd->add_option("--n-per-word", copt.n_per_word, "Pairs per introduced word")->capture_default_str();
  gnd->add_option("--k", copt.k, "KNN neighbours")->capture_default_str();
  gnd->add_option("--model", gnd_model, "Use only tokens of this model tag");

  // report
  auto* rep = app.add_subcommand("report", "Re-emit report files from a saved run");
  fs::path rep_run, rep_index, rep_out;
  rep->add_option("--run", rep_run, "run.json written by ground")->required();
  rep->add_option("--index", rep_index, "Index JSON (for nearest-supercategory tags)")->required();
  rep->add_option("--out", rep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    std::map<std::string, std::string> config;
    if (!config_path.empty()) config = read_config(config_path);
    for (CLI::App* sub : app.get_subcommands()) {
      try {
        apply_config(*sub, config);
      } catch (const CLI::ParseError& e) {
        fail(ErrorKind::config, std::string("config value rejected: ") + e.what());
      }
    }
    std::uint64_t seed = resolve_seed(seed_opt, seed_flag, config);

    if (sim->parsed()) {
      if (!sim_gen_config.empty()) {
        const GeneratorConfig file_cfg = load_generator_config(sim_gen_config);
        seed = resolve_seed(seed_opt, seed_flag, config, file_cfg.seed);
        // flags given on the command line win over the generator file
        if (sim->get_option("--samples-per-class")->count() == 0) gen.samples_per_class = file_cfg.samples_per_class;
        if (sim->get_option("--noise-scale")->count() == 0) gen.noise_scale = file_cfg.noise_scale;
        if (sim->get_option("--placement-tolerance")->count() == 0)
          gen.placement_tolerance = file_cfg.placement_tolerance;
        if (sim->get_option("--misplacement-rate")->count() == 0) gen.misplacement_rate = file_cfg.misplacement_rate;
        if (sim_labels.empty()) gen.labels = file_cfg.labels;
      }
      for (const auto& name : sim_labels) {
        const auto l = parse_label(name);
        require(l.has_value(), ErrorKind::config, "unknown label '" + name + "'");
        gen.labels.push_back(*l);
      }
      gen.seed = seed;
      gen.validate();
      const auto samples = generate_dataset(gen, seed);
      write_dataset_csv(sim_out, samples);
      std::cout << "wrote " << samples.size() << " samples to " << sim_out.string() << "\n";
    } else if (trn->parsed()) {
      require_inputs({{"data", &trn_data}});
      const auto split = load_split(trn_data, seed);
      tcfg.seed = seed;
      std::size_t epoch_batches = 0;
      double epoch_sum = 0.0;
      const auto result = train(split, tcfg, [&](const HistoryEntry& e) {
        epoch_sum += e.loss;
        if (++epoch_batches == batches_per_epoch(split, tcfg.per_class)) {
          if (trn_verbose) std::cerr << "epoch " << e.epoch + 1 << " mean loss " << epoch_sum / epoch_batches << "\n";
          epoch_batches = 0;
          epoch_sum = 0.0;
        }
      });
      save_params(trn_out, result.params);
      if (!trn_history.empty()) write_history_csv(trn_history, result.history);
      double final_mean = 0.0;
      if (!result.history.entries.empty()) {
        const std::size_t last_epoch = result.history.entries.back().epoch;
        std::size_t n = 0;
        for (const auto& e : result.history.entries) {
          if (e.epoch == last_epoch) {
            final_mean += e.loss;
            ++n;
          }
        }
        final_mean /= static_cast<double>(n);
        std::cout << "final mean loss " << csv::format_double(final_mean) << "\n";
      } else {
        std::cout << "no training steps; wrote initial parameters\n";
      }
    } else if (idx->parsed()) {
      require_inputs({{"data", &idx_data}, {"params", &idx_params}});
      const auto split = load_split(idx_data, seed);
      const auto params = load_params(idx_params);
      const auto index = build_index(params, split.index, idx_type_id);
      save_index(idx_out, index);
      if (!idx_confusion.empty()) {
        const auto cm = evaluate_confusion(index, split.test, params, idx_k, SplitConfig{}.test_per_class, idx_type_id);
        fs::path full = idx_confusion;
        full.replace_extension(".full.csv");
        write_confusion_csv(idx_confusion, full, cm);
        std::cout << "accuracy " << csv::format_fixed(cm.accuracy, 4) << ", cross-supercategory "
                  << csv::format_fixed(cm.cross_supercategory_rate(), 4) << "\n";
      }
      if (!idx_pca.empty()) write_pca_csv(idx_pca, object_pca_rows(index));
      std::cout << "indexed " << index.size() << " objects\n";
    } else if (syn->parsed()) {
      require_inputs({{"corpus", &syn_corpus}});
      const auto sentences = read_corpus(syn_corpus);
      const auto tokens = synth_embeddings(sspec, sentences, derive_seed(seed, "synth"));
      write_tokens_jsonl(syn_out, tokens);
      std::cout << "wrote " << tokens.size() << " token vectors\n";
    } else if (ing->parsed()) {
      require_inputs({{"in", &ing_in}});
      const auto tokens = read_tokens_jsonl(ing_in);
      if (!ing_corpus.empty()) {
        require_inputs({{"corpus", &ing_corpus}});
        const CorpusMap map(read_corpus(ing_corpus));
        for (const auto& t : tokens) map.resolve(t.word, t.sentence_id);
      }
      write_tokens_jsonl(ing_out, tokens);
      std::cout << "ingested " << tokens.size() << " records\n";
    } else if (gnd->parsed()) {
      require_inputs({{"tokens", &gnd_tokens}, {"corpus", &gnd_corpus}, {"index", &gnd_index}});
      auto tokens = read_tokens_jsonl(gnd_tokens);
      if (!gnd_model.empty()) {
        std::erase_if(tokens, [&](const TokenEmbedding& t) { return t.source_model != gnd_model; });
        require(!tokens.empty(), ErrorKind::config, "no tokens for model '" + gnd_model + "'");
      }
      const CorpusMap map(read_corpus(gnd_corpus));
      const auto index = load_index(gnd_index);
      const auto curriculum = curriculum_preset(gnd_preset, gnd_hint_all);
      copt.seed = derive_seed(seed, "ground");
      const auto run = run_curriculum(GroundingContext{tokens, index, map}, curriculum, copt);
      emit_report(run, index, gnd_out);
      save_run(gnd_out / "run.json", run);
      save_map(gnd_out / "map_final.json", run.stages.back().map);
      std::cout << f1_markdown(f1_rows(run));
    } else if (rep->parsed()) {
      require_inputs({{"run", &rep_run}, {"index", &rep_index}});
      const auto run = load_run(rep_run);
      emit_report(run, load_index(rep_index), rep_out);
      std::cout << f1_markdown(f1_rows(run));
    }
  } catch (const Error& e) {
    std::cerr << "groundbridge: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "groundbridge: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
