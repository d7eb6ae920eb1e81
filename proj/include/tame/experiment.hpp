#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tame/experts.hpp"
#include "tame/metrics.hpp"
#include "tame/selector.hpp"
#include "tame/stream.hpp"

namespace tame::experiment {

struct ExperimentConfig {
    // stream
    std::string stream = "split_synthetic";  // split_mnist | permuted_mnist | split_synthetic
    std::string data_dir = "data/mnist";
    int tasks = 5;            // permuted / synthetic task count
    int classes_per_task = 2; // synthetic tasks; split streams derive it from class sets
    std::vector<int> revisit; // optional segment order over task indices

    // schedule
    int epochs = 10;
    int batch_size = 128;

    // detector
    double alpha = 0.2;
    int window = 100;
    int min_fill = 0;  // 0 -> full window

    // buffers
    int cs = 2500;
    int cp = 1000;

    // pruning
    double expert_prune_rate = 0.98;
    double selector_prune_rate = 0.5;
    int retrain_epochs = 10;
    double retrain_lr = 0.1;
    double retrain_weight_decay = 1e-4;

    // optimizer
    double lr = 0.1;
    double momentum = 0.9;
    bool nesterov = true;
    double weight_decay = 5e-4;

    // architecture
    int expert_hidden = 100;
    int selector_hidden = 100;
    int selector_epochs = 10;

    // synthetic stream knobs
    int synth_dim = 16;
    int synth_train_per_task = 25600;
    int synth_test_per_task = 2048;
    double synth_class_sep = 3.0;
    double synth_task_spread = 6.0;
    double synth_noise = 1.0;

    // misc
    uint64_t seed = 1;
    std::string kernels = "auto";
    std::string out = "out/run";
    bool eval_per_segment = true;
    bool save_buffers = false;
    bool write_artifacts = true;
};

// Flat key=value config file; '#' starts a comment. Unknown keys are errors.
ExperimentConfig load_config(const std::string& path);
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct ExperimentResult {
    double acc = 0.0;            // post prune+retrain
    double acc_pre_prune = 0.0;  // trained selector, unpruned experts
    std::vector<double> per_task;
    std::vector<double> per_task_pre_prune;
    int expert_count = 0;
    int64_t create_events = 0;
    int64_t params_total = 0;      // experts + selector
    int64_t params_surviving = 0;  // post-prune
    double wall_seconds = 0.0;

    std::vector<experts::StepRecord> trace;
    metrics::AccuracyMatrix matrix;         // per-segment snapshot rows
    std::vector<int64_t> segment_end_steps;
    selector::LabelMap label_map;
    std::vector<int> task_owner;  // task -> expert id that first owned it
    std::vector<metrics::PredictionRecord> predictions;
    std::string kernel_backend;
};

// Full pipeline: stream -> driver loop -> selector training -> pruning and
// retraining -> evaluation. Artifacts land under cfg.out when
// cfg.write_artifacts is set: trace.csv, acc_matrix.csv, predictions.csv,
// summary.json, checkpoints/.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SweepPoint {
    std::string value;
    double acc;
    int expert_count;
};

// Runs cfg once per value of `param` (config key or the "Cp"/"Cs" aliases),
// each into out/<param>_<value>/, and writes sweep_summary.csv under out.
std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, const std::string& param,
                              const std::vector<std::string>& values);

// Runs the stream twice, once with shuffled ground-truth task metadata, and
// throws if the traces differ (task ids must be invisible to training).
void check_task_id_firewall(const ExperimentConfig& cfg);

}  // namespace tame::experiment
