#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "groundbridge/adam.hpp"
#include "groundbridge/datasim.hpp"
#include "groundbridge/encoder.hpp"
#include "groundbridge/msloss.hpp"

namespace groundbridge {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t per_class = 10;  // samples per training class in each mini-batch
  MsLossConfig loss;
  AdamConfig adam;
  bool include_type_id = false;
  std::uint64_t seed = 0;
};

struct HistoryEntry {
  std::size_t batch = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  std::size_t n_pos_pairs = 0;
  std::size_t n_neg_pairs = 0;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct TrainHistory {
  std::vector<HistoryEntry> entries;
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  EncoderParams params;
  TrainHistory history;
};

// Batches per epoch: one pass over the largest training class,
// ceil(class_size / per_class).
std::size_t batches_per_epoch(const DatasetSplit& split, std::size_t per_class);

// Episodic training. Every mini-batch draws `per_class` samples from each of the
// 7 training classes (without replacement within an epoch, reshuffled per
// epoch), then runs forward -> similarity -> mining -> loss -> backward -> Adam.
TrainResult train(const DatasetSplit& split, const TrainConfig& config,
                  const std::function<void(const HistoryEntry&)>& on_batch = {});

// Loss and analytic parameter gradients of one labelled batch, with the
// mining decision taken at the current parameters.
struct BatchLoss {
  double loss = 0.0;
  MinedPairs pairs;
  ParamGrads grads;
};
BatchLoss batch_loss_and_grads(const EncoderParams& params, std::span<const std::vector<double>> inputs,
                               std::span<const int> labels, const MsLossConfig& config);

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace groundbridge
