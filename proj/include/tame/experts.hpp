#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tame/buffers.hpp"
#include "tame/drift.hpp"
#include "tame/nn.hpp"
#include "tame/tensor.hpp"

namespace tame::experts {

// One expert network plus its detector state. The window and smoothed loss
// move only while the expert is active; probes never touch them.
struct ExpertState {
    int id;
    nn::Network net;
    nn::SgdState opt;
    drift::SmoothedLoss smoothed;
    drift::LossWindow window;

    ExpertState(int id_, nn::Network net_, int window_capacity)
        : id(id_), net(std::move(net_)), window(window_capacity) {}
};

using ExpertFactory = std::function<nn::Network(std::mt19937&)>;

class ExpertPool {
public:
    ExpertPool(ExpertFactory factory, drift::DetectorConfig detector, uint64_t seed);

    // Fresh random-init expert with id = count(); it becomes active.
    ExpertState& add_expert();

    // Appends an already-built network (checkpoint load path).
    ExpertState& adopt_expert(nn::Network net);

    int count() const { return static_cast<int>(experts_.size()); }
    int active_id() const { return active_id_; }
    void set_active(int id);
    ExpertState& active() { return *experts_.at(static_cast<size_t>(active_id_)); }
    ExpertState& expert(int id) { return *experts_.at(static_cast<size_t>(id)); }
    const ExpertState& expert(int id) const { return *experts_.at(static_cast<size_t>(id)); }
    const drift::DetectorConfig& detector() const { return detector_; }

    // Creation-order iteration (probe order).
    const std::vector<std::unique_ptr<ExpertState>>& all() const { return experts_; }

private:
    ExpertFactory factory_;
    drift::DetectorConfig detector_;
    std::mt19937 init_rng_;
    std::vector<std::unique_ptr<ExpertState>> experts_;
    int active_id_ = -1;
};

// Selector buffer plus one prune buffer per expert id, registered at expert
// creation. All offers share one priority draw per sample.
struct PoolBuffers {
    PoolBuffers(int selector_capacity, int prune_capacity, uint64_t seed)
        : selector(selector_capacity, seed), prune_capacity_(prune_capacity) {}

    void register_expert(int expert_id) {
        prune.emplace(expert_id, buffers::ReservoirBuffer<buffers::PruneSample>(prune_capacity_));
    }

    buffers::ReservoirBuffer<buffers::SelectorSample> selector;
    std::map<int, buffers::ReservoirBuffer<buffers::PruneSample>> prune;

private:
    int prune_capacity_;
};

struct Batch {
    Tensor x;
    std::vector<int> y;
};

enum class Event { kNone, kSwitch, kCreate };

struct StepRecord {
    int64_t step;
    int expert;          // expert that trained on this batch
    double raw_loss;     // its batch loss before the update
    double smoothed;     // its smoothed loss (NaN until first observation)
    double threshold;    // its window threshold (NaN while warming up)
    Event event;
};

struct Decision {
    enum Kind { kStay, kSwitch, kCreate } kind;
    int target;  // expert id for kSwitch/kCreate
};

// Probe pass after a deviation: walk experts in creation order and pick the
// first whose candidate smoothed value alpha*L_e + (1-alpha)*L_s sits below
// its own window threshold; otherwise create. Probes are read-only on every
// expert's detector state. `active_raw_loss` is the already-computed loss of
// the active expert on this batch.
Decision probe_and_switch(ExpertPool& pool, const Batch& batch, double active_raw_loss,
                          PoolBuffers* bufs);

struct DriverConfig {
    drift::DetectorConfig detector;
    nn::SgdConfig sgd;
};

// One training step of the active expert: backward pass, SGD update, window
// push. The smoothed loss must already be updated for this batch.
StepRecord train_step(ExpertPool& pool, const Batch& batch, const nn::SgdConfig& sgd,
                      double raw_loss, const nn::LossGrads& lg, int64_t step, Event event);

using BatchSource = std::function<std::optional<Batch>()>;

// The full driver loop over a label-blind batch source: smoothing update,
// deviation check with probe/create, training step, reservoir offers.
std::vector<StepRecord> run_stream(ExpertPool& pool, const BatchSource& next_batch,
                                   const DriverConfig& cfg, PoolBuffers& bufs,
                                   std::mt19937_64& priority_rng);

// Pool checkpoint: header (N_e u32, active_id u32) + concatenated expert
// network checkpoints. Detector state is not persisted.
void save_pool(const ExpertPool& pool, const std::string& path);
ExpertPool load_pool(const std::string& path, drift::DetectorConfig detector, uint64_t seed = 0);

}  // namespace tame::experts
