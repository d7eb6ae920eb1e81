#pragma once

#include <random>
#include <vector>

#include "tame/buffers.hpp"
#include "tame/experts.hpp"
#include "tame/nn.hpp"

namespace tame::selector {

// Evaluation-only mapping from (expert id, local head index) to global class.
// Built by the harness from stream metadata; the training path never reads it.
using LabelMap = std::vector<std::vector<int>>;

struct TrainSchedule {
    int epochs = 10;
    nn::SgdConfig sgd{0.1f, 0.9f, true, 5e-4f, 128};
};

// Trains a fresh 2-layer MLP on (x, expert_id) pairs drained from the
// selector buffer. Head width is n_experts. Throws on an empty buffer or an
// expert id out of range.
nn::Network train_selector(const std::vector<buffers::SelectorSample>& samples, int n_experts,
                           int hidden, const TrainSchedule& schedule, std::mt19937& rng);

// Generic supervised pass used for selector training and retraining:
// shuffled minibatches over a fixed sample set for `epochs` epochs.
void train_on_samples(nn::Network& net, const std::vector<Tensor>& xs,
                      const std::vector<int>& ys, const TrainSchedule& schedule,
                      std::mt19937& rng, nn::SgdState* state = nullptr);

// Per-layer L1 unstructured magnitude pruning: in every prunable layer the
// rate-fraction of smallest-|w| weights is zeroed and masked; biases are
// untouched. Surviving count per layer = ceil((1-rate) * n).
void prune_l1(nn::Network& net, double rate);

struct RetrainConfig {
    int epochs = 10;
    nn::SgdConfig sgd{0.1f, 0.0f, false, 1e-4f, 128};
};

// SGD over the prune-buffer contents with the mask fixed; masked weights stay
// exactly zero. An empty buffer skips retraining (prune-only) with a warning.
void retrain_pruned(nn::Network& net, const std::vector<buffers::PruneSample>& samples,
                    const RetrainConfig& cfg, std::mt19937& rng);

// Route x through the selector, then through the chosen expert; map the local
// head argmax to a global class.
int predict(const nn::Network& sel, const experts::ExpertPool& pool, const Tensor& x,
            const LabelMap& label_map);

}  // namespace tame::selector
