#include "groundbridge/trainer.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "groundbridge/csv.hpp"
#include "groundbridge/error.hpp"
#include "groundbridge/seeding.hpp"

namespace groundbridge {

namespace {

std::array<std::vector<std::size_t>, 7> group_training_samples(const DatasetSplit& split) {
  std::array<std::vector<std::size_t>, 7> groups;
  const auto& labels = training_labels();
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    const auto it = std::find(labels.begin(), labels.end(), split.train[i].label());
    require(it != labels.end(), ErrorKind::contract,
            "training split contains non-training class '" + std::string(label_key(split.train[i].label())) + "'");
    groups[static_cast<std::size_t>(it - labels.begin())].push_back(i);
  }
  return groups;
}

}  // namespace

std::size_t batches_per_epoch(const DatasetSplit& split, std::size_t per_class) {
  require(per_class > 0, ErrorKind::config, "per_class must be > 0");
  std::size_t largest = 0;
  for (const auto& g : group_training_samples(split)) largest = std::max(largest, g.size());
  return (largest + per_class - 1) / per_class;
}

BatchLoss batch_loss_and_grads(const EncoderParams& params, std::span<const std::vector<double>> inputs,
                               std::span<const int> labels, const MsLossConfig& config) {
  std::vector<ForwardTrace> traces;
  traces.reserve(inputs.size());
  std::vector<std::vector<double>> emb;
  emb.reserve(inputs.size());
  for (const auto& x : inputs) {
    traces.push_back(forward_trace(params, x));
    emb.push_back(traces.back().output.values);
  }
  const SimilarityMatrix sim = similarity_matrix(emb, labels);
  BatchLoss out{0.0, mine_pairs(sim, config), ParamGrads(params.layout)};
  const MsLossResult lr = ms_loss(sim, out.pairs, config);
  out.loss = lr.loss;
  const auto demb = embedding_grads(emb, lr.grad);
  for (std::size_t i = 0; i < traces.size(); ++i) backward_sample(params, traces[i], demb[i], out.grads);
  return out;
}

TrainResult train(const DatasetSplit& split, const TrainConfig& config,
                  const std::function<void(const HistoryEntry&)>& on_batch) {
  config.loss.validate();
  require(config.per_class > 0, ErrorKind::config, "per_class must be > 0");
  const std::size_t input_length = kFeatureCount - (config.include_type_id ? 0 : 1);
  TrainResult result{init_params(derive_seed(config.seed, "init"), input_length), {}};
  if (config.epochs == 0) return result;

  auto groups = group_training_samples(split);
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].size() < config.per_class) {
      fail(ErrorKind::shortage, "training class '" + std::string(label_key(training_labels()[c])) + "' has " +
                                    std::to_string(groups[c].size()) + " samples, batches need " +
                                    std::to_string(config.per_class));
    }
  }

  std::vector<std::vector<double>> inputs(split.train.size());
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    inputs[i] = encoder_input(split.train[i], config.include_type_id);
  }

  const std::size_t n_batches = batches_per_epoch(split, config.per_class);
  AdamState adam(result.params.values.size(), config.adam);
  Rng rng(derive_seed(config.seed, "train-shuffle"));
  std::size_t batch_no = 0;

  std::vector<std::vector<double>> batch_inputs;
  std::vector<int> batch_labels;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (auto& g : groups) std::shuffle(g.begin(), g.end(), rng);
    for (std::size_t b = 0; b < n_batches; ++b) {
      batch_inputs.clear();
      batch_labels.clear();
      for (std::size_t c = 0; c < groups.size(); ++c) {
        const auto& g = groups[c];
        for (std::size_t j = 0; j < config.per_class; ++j) {
          batch_inputs.push_back(inputs[g[(b * config.per_class + j) % g.size()]]);
          batch_labels.push_back(static_cast<int>(c));
        }
      }
      BatchLoss bl = batch_loss_and_grads(result.params, batch_inputs, batch_labels, config.loss);
      adam_step(adam, result.params, bl.grads);
      HistoryEntry e{batch_no++, epoch, bl.loss, bl.pairs.positive_count(), bl.pairs.negative_count()};
      result.history.entries.push_back(e);
      if (on_batch) on_batch(e);
    }
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
  auto out = csv::open_out(path);
  out << "batch,epoch,loss,n_pos_pairs,n_neg_pairs\n";
  for (const auto& e : history.entries) {
    out << e.batch << ',' << e.epoch << ',' << csv::format_double(e.loss) << ',' << e.n_pos_pairs << ','
        << e.n_neg_pairs << '\n';
  }
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

}  // namespace groundbridge
