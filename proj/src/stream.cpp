#include "tame/stream.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace tame::stream {

namespace {

std::vector<int> default_order(int tasks) {
    std::vector<int> order(static_cast<size_t>(tasks));
    std::iota(order.begin(), order.end(), 0);
    return order;
}

void check_order(const std::vector<int>& order, int tasks) {
    if (order.empty()) throw std::invalid_argument("segment order is empty");
    for (int t : order)
        if (t < 0 || t >= tasks) throw std::invalid_argument("segment order references unknown task");
}

// Gathers rows of src at `rows` into a fresh tensor with the same sample dims.
Tensor gather_rows(const Tensor& src, const std::vector<int>& rows) {
    const int64_t stride = src.numel() / src.dim(0);
    std::vector<int> dims = src.shape;
    dims[0] = static_cast<int>(rows.size());
    Tensor out(dims);
    for (size_t i = 0; i < rows.size(); ++i)
        std::copy_n(src.data() + rows[i] * stride, stride,
                    out.data() + static_cast<int64_t>(i) * stride);
    return out;
}

}  // namespace

TaskStream build_split(const idx::IdxData& train, const idx::IdxData& test,
                       std::vector<std::vector<int>> class_sets, std::vector<int> order) {
    if (class_sets.empty())
        class_sets = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}};

    std::set<int> seen;
    size_t k = class_sets.front().size();
    for (const auto& cs : class_sets) {
        if (cs.size() != k) throw std::invalid_argument("split tasks must share class count");
        for (int c : cs)
            if (!seen.insert(c).second)
                throw std::invalid_argument("split class sets overlap on class " + std::to_string(c));
    }

    TaskStream s;
    s.input_dims.assign(train.images.shape.begin() + 1, train.images.shape.end());
    s.classes_per_task = static_cast<int>(k);

    for (size_t t = 0; t < class_sets.size(); ++t) {
        TaskData td;
        td.task = static_cast<int>(t);
        td.classes = class_sets[t];

        std::vector<int> tr_rows, te_rows;
        std::vector<int> tr_y, te_y;
        for (size_t i = 0; i < train.labels.size(); ++i) {
            for (size_t c = 0; c < k; ++c) {
                if (train.labels[i] == class_sets[t][c]) {
                    tr_rows.push_back(static_cast<int>(i));
                    tr_y.push_back(static_cast<int>(c));
                }
            }
        }
        for (size_t i = 0; i < test.labels.size(); ++i) {
            for (size_t c = 0; c < k; ++c) {
                if (test.labels[i] == class_sets[t][c]) {
                    te_rows.push_back(static_cast<int>(i));
                    te_y.push_back(class_sets[t][c]);
                }
            }
        }
        if (tr_rows.empty()) throw std::invalid_argument("split task has no training samples");
        td.train_x = gather_rows(train.images, tr_rows);
        td.train_y = std::move(tr_y);
        td.test_x = gather_rows(test.images, te_rows);
        td.test_y_global = std::move(te_y);
        s.tasks.push_back(std::move(td));
    }

    if (order.empty()) order = default_order(static_cast<int>(s.tasks.size()));
    check_order(order, static_cast<int>(s.tasks.size()));
    for (int t : order)
        s.segments.push_back({t, s.tasks[static_cast<size_t>(t)].train_x,
                              s.tasks[static_cast<size_t>(t)].train_y});
    return s;
}

TaskStream build_permuted(const idx::IdxData& train, const idx::IdxData& test, int tasks,
                          uint64_t seed, std::vector<int> order) {
    if (tasks < 1) throw std::invalid_argument("permuted stream needs at least one task");
    int classes = 0;
    for (int y : train.labels) classes = std::max(classes, y + 1);

    TaskStream s;
    s.input_dims.assign(train.images.shape.begin() + 1, train.images.shape.end());
    s.classes_per_task = classes;
    const int64_t d = Tensor::numel_of(s.input_dims);

    for (int t = 0; t < tasks; ++t) {
        // Stored, seeded permutation per task; task 0 keeps pixel order.
        std::vector<int64_t> perm(static_cast<size_t>(d));
        std::iota(perm.begin(), perm.end(), 0);
        if (t > 0) {
            std::seed_seq sq{static_cast<uint64_t>(0x9e37u), seed, static_cast<uint64_t>(t)};
            std::mt19937_64 rng(sq);
            std::shuffle(perm.begin(), perm.end(), rng);
        }
        auto apply = [&](const Tensor& src) {
            Tensor out(src.shape);
            const int n = src.dim(0);
            for (int i = 0; i < n; ++i) {
                const float* a = src.data() + static_cast<int64_t>(i) * d;
                float* b = out.data() + static_cast<int64_t>(i) * d;
                for (int64_t j = 0; j < d; ++j) b[j] = a[perm[static_cast<size_t>(j)]];
            }
            return out;
        };

        TaskData td;
        td.task = t;
        td.classes.resize(static_cast<size_t>(classes));
        std::iota(td.classes.begin(), td.classes.end(), 0);
        td.train_x = apply(train.images);
        td.train_y = train.labels;
        td.test_x = apply(test.images);
        td.test_y_global = test.labels;
        s.tasks.push_back(std::move(td));
    }

    if (order.empty()) order = default_order(tasks);
    check_order(order, tasks);
    for (int t : order)
        s.segments.push_back({t, s.tasks[static_cast<size_t>(t)].train_x,
                              s.tasks[static_cast<size_t>(t)].train_y});
    return s;
}

namespace {

// Class centers are a pure function of (seed, task, class).
std::vector<float> synth_center(const SynthSpec& spec, int task, int cls) {
    std::seed_seq tq{spec.seed, static_cast<uint64_t>(0x7a51u), static_cast<uint64_t>(task)};
    std::mt19937 task_rng(tq);
    std::normal_distribution<float> n01(0.0f, 1.0f);
    std::vector<float> mean(static_cast<size_t>(spec.dim));
    for (auto& v : mean) v = static_cast<float>(spec.task_spread) * n01(task_rng);

    std::seed_seq cq{spec.seed, static_cast<uint64_t>(0xc1a5u), static_cast<uint64_t>(task),
                     static_cast<uint64_t>(cls)};
    std::mt19937 cls_rng(cq);
    for (auto& v : mean) v += static_cast<float>(spec.class_sep) * n01(cls_rng);
    return mean;
}

void synth_fill(const SynthSpec& spec, int task, std::mt19937_64& rng, Tensor& x,
                std::vector<int>& y) {
    std::normal_distribution<float> n01(0.0f, 1.0f);
    std::vector<std::vector<float>> centers;
    for (int c = 0; c < spec.classes_per_task; ++c) centers.push_back(synth_center(spec, task, c));
    // Features come out with unit-ish marginal variance; separation ratios are
    // what the spread/sep/noise knobs control.
    const float scale = 1.0f / std::sqrt(static_cast<float>(
        spec.task_spread * spec.task_spread + spec.class_sep * spec.class_sep +
        spec.noise * spec.noise));
    const int n = x.dim(0);
    y.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int c = i % spec.classes_per_task;
        y[static_cast<size_t>(i)] = c;
        float* row = x.data() + static_cast<int64_t>(i) * spec.dim;
        for (int d = 0; d < spec.dim; ++d)
            row[d] = scale * (centers[static_cast<size_t>(c)][static_cast<size_t>(d)] +
                              static_cast<float>(spec.noise) * n01(rng));
    }
}

}  // namespace

TaskStream build_split_synthetic(const SynthSpec& spec, std::vector<int> order) {
    if (spec.dim < 1 || spec.tasks < 1 || spec.classes_per_task < 2)
        throw std::invalid_argument("invalid synthetic spec");

    TaskStream s;
    s.input_dims = {spec.dim};
    s.classes_per_task = spec.classes_per_task;

    for (int t = 0; t < spec.tasks; ++t) {
        TaskData td;
        td.task = t;
        for (int c = 0; c < spec.classes_per_task; ++c)
            td.classes.push_back(t * spec.classes_per_task + c);
        std::seed_seq eq{spec.seed, static_cast<uint64_t>(0xe4a1u), static_cast<uint64_t>(t)};
        std::mt19937_64 test_rng(eq);
        td.test_x = Tensor({spec.test_per_task, spec.dim});
        std::vector<int> local;
        synth_fill(spec, t, test_rng, td.test_x, local);
        for (int yl : local) td.test_y_global.push_back(t * spec.classes_per_task + yl);
        // Synthetic segments are drawn fresh; keep a small train pool only as
        // a placeholder for API symmetry.
        td.train_x = Tensor({0, spec.dim});
        s.tasks.push_back(std::move(td));
    }

    if (order.empty()) order = default_order(spec.tasks);
    check_order(order, spec.tasks);
    for (size_t si = 0; si < order.size(); ++si) {
        Segment seg;
        seg.task = order[si];
        std::seed_seq sq{spec.seed, static_cast<uint64_t>(0x5e61u), static_cast<uint64_t>(si)};
        std::mt19937_64 rng(sq);
        seg.x = Tensor({spec.train_per_task, spec.dim});
        synth_fill(spec, seg.task, rng, seg.x, seg.y);
        s.segments.push_back(std::move(seg));
    }
    return s;
}

int64_t batches_per_segment(const TaskStream& s, int segment, const BatchPlan& plan) {
    const auto& seg = s.segments.at(static_cast<size_t>(segment));
    return static_cast<int64_t>(seg.x.dim(0) / plan.batch_size) * plan.epochs;
}

int64_t total_batches(const TaskStream& s, const BatchPlan& plan) {
    int64_t n = 0;
    for (size_t i = 0; i < s.segments.size(); ++i)
        n += batches_per_segment(s, static_cast<int>(i), plan);
    return n;
}

std::vector<int64_t> segment_end_steps(const TaskStream& s, const BatchPlan& plan) {
    std::vector<int64_t> ends;
    int64_t acc = 0;
    for (size_t i = 0; i < s.segments.size(); ++i) {
        acc += batches_per_segment(s, static_cast<int>(i), plan);
        ends.push_back(acc);
    }
    return ends;
}

experts::BatchSource make_segment_source(const Segment& seg, const BatchPlan& plan) {
    if (plan.epochs < 1 || plan.batch_size < 1) throw std::invalid_argument("bad batch plan");

    struct Cursor {
        const Segment* seg;
        BatchPlan plan;
        std::mt19937_64 rng;
        int epoch = 0;
        int64_t pos = 0;
        std::vector<int> perm;
    };
    auto cur = std::make_shared<Cursor>();
    cur->seg = &seg;
    cur->plan = plan;
    cur->rng.seed(plan.shuffle_seed);

    return [cur]() -> std::optional<experts::Batch> {
        const Segment& sg = *cur->seg;
        const int n = sg.x.dim(0);
        const int64_t nb = n / cur->plan.batch_size;
        for (;;) {
            if (nb == 0 || cur->epoch >= cur->plan.epochs) return std::nullopt;
            if (cur->pos == 0) {
                cur->perm.resize(static_cast<size_t>(n));
                std::iota(cur->perm.begin(), cur->perm.end(), 0);
                std::shuffle(cur->perm.begin(), cur->perm.end(), cur->rng);
            }
            if (cur->pos >= nb) {
                cur->epoch++;
                cur->pos = 0;
                continue;
            }
            const int bs = cur->plan.batch_size;
            const int64_t stride = sg.x.numel() / n;
            std::vector<int> dims = sg.x.shape;
            dims[0] = bs;
            experts::Batch b;
            b.x = Tensor(dims);
            b.y.resize(static_cast<size_t>(bs));
            for (int i = 0; i < bs; ++i) {
                const int row = cur->perm[static_cast<size_t>(cur->pos * bs + i)];
                std::copy_n(sg.x.data() + row * stride, stride,
                            b.x.data() + static_cast<int64_t>(i) * stride);
                b.y[static_cast<size_t>(i)] = sg.y[static_cast<size_t>(row)];
            }
            cur->pos++;
            return b;
        }
    };
}

experts::BatchSource make_batch_source(const TaskStream& s, const BatchPlan& plan) {
    if (plan.epochs < 1 || plan.batch_size < 1) throw std::invalid_argument("bad batch plan");

    struct Cursor {
        const TaskStream* stream;
        BatchPlan plan;
        std::mt19937_64 rng;
        size_t segment = 0;
        int epoch = 0;
        int64_t pos = 0;  // batch index within epoch
        std::vector<int> perm;
    };
    auto cur = std::make_shared<Cursor>();
    cur->stream = &s;
    cur->plan = plan;
    cur->rng.seed(plan.shuffle_seed);

    return [cur]() -> std::optional<experts::Batch> {
        const TaskStream& st = *cur->stream;
        for (;;) {
            if (cur->segment >= st.segments.size()) return std::nullopt;
            const Segment& seg = st.segments[cur->segment];
            const int n = seg.x.dim(0);
            const int64_t nb = n / cur->plan.batch_size;
            if (nb == 0 || cur->epoch >= cur->plan.epochs) {
                cur->segment++;
                cur->epoch = 0;
                cur->pos = 0;
                continue;
            }
            if (cur->pos == 0) {
                cur->perm.resize(static_cast<size_t>(n));
                std::iota(cur->perm.begin(), cur->perm.end(), 0);
                std::shuffle(cur->perm.begin(), cur->perm.end(), cur->rng);
            }
            if (cur->pos >= nb) {
                cur->epoch++;
                cur->pos = 0;
                continue;
            }

            const int bs = cur->plan.batch_size;
            const int64_t stride = seg.x.numel() / n;
            std::vector<int> dims = seg.x.shape;
            dims[0] = bs;
            experts::Batch b;
            b.x = Tensor(dims);
            b.y.resize(static_cast<size_t>(bs));
            for (int i = 0; i < bs; ++i) {
                const int row = cur->perm[static_cast<size_t>(cur->pos * bs + i)];
                std::copy_n(seg.x.data() + row * stride, stride,
                            b.x.data() + static_cast<int64_t>(i) * stride);
                b.y[static_cast<size_t>(i)] = seg.y[static_cast<size_t>(row)];
            }
            cur->pos++;
            return b;
        }
    };
}

}  // namespace tame::stream
