#pragma once

#include <cstdint>
#include <vector>

#include "tame/experts.hpp"
#include "tame/idx.hpp"
#include "tame/tensor.hpp"

namespace tame::stream {

// One distinct task: its local->global class map, training pool, and held-out
// test set. Labels in train_y are local head indices; test_y_global carries
// the evaluation-side global classes.
struct TaskData {
    int task = 0;
    std::vector<int> classes;  // local index -> global class
    Tensor train_x;
    std::vector<int> train_y;
    Tensor test_x;
    std::vector<int> test_y_global;
};

// One presentation segment. `task` is ground truth, visible only to the
// evaluator; the algorithm consumes x/y alone.
struct Segment {
    int task = 0;
    Tensor x;
    std::vector<int> y;
};

struct TaskStream {
    std::vector<int> input_dims;
    int classes_per_task = 0;
    std::vector<TaskData> tasks;
    std::vector<Segment> segments;
};

// Split streams: disjoint class subsets of one labeled set, relabeled to
// local indices. `class_sets` defaults to consecutive pairs; `order` is the
// segment presentation pattern over task indices (default: each task once).
TaskStream build_split(const idx::IdxData& train, const idx::IdxData& test,
                       std::vector<std::vector<int>> class_sets = {},
                       std::vector<int> order = {});

// Permuted streams: each task applies its own seeded pixel permutation to
// the full set. All tasks span the same global classes.
TaskStream build_permuted(const idx::IdxData& train, const idx::IdxData& test, int tasks,
                          uint64_t seed, std::vector<int> order = {});

struct SynthSpec {
    int dim = 16;
    int tasks = 5;
    int classes_per_task = 2;
    int train_per_task = 25600;
    int test_per_task = 2048;
    double class_sep = 3.0;    // per-dim std of class offsets within a task
    double task_spread = 6.0;  // per-dim std of task means
    double noise = 1.0;        // per-dim sample noise around the class center
    uint64_t seed = 1;
};

// Gaussian-cluster tasks: class centers are fixed by (seed, task, class), so
// a revisited task repeats its distribution exactly with fresh samples.
TaskStream build_split_synthetic(const SynthSpec& spec, std::vector<int> order = {});

struct BatchPlan {
    int epochs = 10;
    int batch_size = 128;
    uint64_t shuffle_seed = 1;
};

// Label-blind batch source over the stream: segments in order, each repeated
// for `epochs` passes with a fresh shuffle per pass, last partial batch
// dropped. Ground-truth task ids never cross this boundary.
experts::BatchSource make_batch_source(const TaskStream& s, const BatchPlan& plan);

// Same contract over a single segment (the harness feeds segments one at a
// time so it can snapshot metrics between them).
experts::BatchSource make_segment_source(const Segment& seg, const BatchPlan& plan);

int64_t batches_per_segment(const TaskStream& s, int segment, const BatchPlan& plan);
int64_t total_batches(const TaskStream& s, const BatchPlan& plan);
// Cumulative batch index at which each segment ends.
std::vector<int64_t> segment_end_steps(const TaskStream& s, const BatchPlan& plan);

}  // namespace tame::stream
