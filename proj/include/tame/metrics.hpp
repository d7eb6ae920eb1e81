#pragma once

#include <vector>

#include "tame/experts.hpp"
#include "tame/selector.hpp"
#include "tame/stream.hpp"

namespace tame::metrics {

struct EvalResult {
    std::vector<double> per_task;  // accuracy on each task's test set
    double acc = 0.0;              // mean of per_task
};

struct PredictionRecord {
    int task;
    int sample;
    int true_global;
    int pred_global;
    int expert;
};

// Routed evaluation: selector argmax picks the expert, the expert's local
// argmax maps through label_map to a global class. With `oracle_task_owner`
// (task -> expert id) the selector is bypassed (ground-truth routing).
EvalResult evaluate(const experts::ExpertPool& pool, const nn::Network* sel,
                    const selector::LabelMap& label_map,
                    const std::vector<stream::TaskData>& tasks,
                    std::vector<PredictionRecord>* log = nullptr,
                    const std::vector<int>* oracle_task_owner = nullptr);

// R[row][task] snapshots; NaN marks entries before a task's first appearance.
struct AccuracyMatrix {
    std::vector<std::vector<double>> rows;
};

}  // namespace tame::metrics
