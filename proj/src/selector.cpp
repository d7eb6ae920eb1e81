#include "tame/selector.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace tame::selector {

namespace {

// Stacks sample tensors (flattened) into a [n, dim] batch tensor.
Tensor stack_flat(const std::vector<Tensor>& xs, const std::vector<size_t>& idx, size_t begin,
                  size_t end) {
    const int64_t dim = xs[idx[begin]].numel();
    Tensor out({static_cast<int>(end - begin), static_cast<int>(dim)});
    for (size_t i = begin; i < end; ++i)
        std::copy_n(xs[idx[i]].data(), dim, out.data() + static_cast<int64_t>(i - begin) * dim);
    return out;
}

}  // namespace

void train_on_samples(nn::Network& net, const std::vector<Tensor>& xs, const std::vector<int>& ys,
                      const TrainSchedule& schedule, std::mt19937& rng, nn::SgdState* state) {
    if (xs.empty()) throw std::invalid_argument("no samples to train on");
    if (xs.size() != ys.size()) throw std::invalid_argument("sample/label count mismatch");
    nn::SgdState local;
    nn::SgdState& st = state ? *state : local;
    const size_t bs = static_cast<size_t>(schedule.sgd.batch_size);

    std::vector<size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (size_t off = 0; off < idx.size(); off += bs) {
            const size_t end = std::min(off + bs, idx.size());
            Tensor bx = stack_flat(xs, idx, off, end);
            if (net.input_dims.size() > 1) {
                std::vector<int> dims{bx.dim(0)};
                dims.insert(dims.end(), net.input_dims.begin(), net.input_dims.end());
                bx = bx.reshaped(dims);
            }
            std::vector<int> by;
            by.reserve(end - off);
            for (size_t i = off; i < end; ++i) by.push_back(ys[idx[i]]);
            const nn::LossGrads lg = nn::loss_and_grads(net, bx, by);
            nn::sgd_step(net, lg.grads, schedule.sgd, st);
        }
    }
}

nn::Network train_selector(const std::vector<buffers::SelectorSample>& samples, int n_experts,
                           int hidden, const TrainSchedule& schedule, std::mt19937& rng) {
    if (samples.empty()) throw std::invalid_argument("selector buffer is empty");
    if (n_experts < 1) throw std::invalid_argument("selector needs at least one expert");

    std::vector<Tensor> xs;
    std::vector<int> ys;
    xs.reserve(samples.size());
    ys.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.expert_id < 0 || s.expert_id >= n_experts)
            throw std::invalid_argument("selector sample expert_id out of range");
        xs.push_back(s.x);
        ys.push_back(s.expert_id);
    }

    const int in_dim = static_cast<int>(xs.front().numel());
    nn::Network net = nn::make_mlp(in_dim, hidden, n_experts);
    nn::init_kaiming(net, rng);
    train_on_samples(net, xs, ys, schedule, rng);
    return net;
}

void prune_l1(nn::Network& net, double rate) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("prune rate must be in [0,1)");
    if (rate == 0.0) return;
    for (size_t li = 0; li < net.layers.size(); ++li) {
        if (!net.layers[li].parametric()) continue;
        auto& w = net.weights[li].values;
        const int64_t n = static_cast<int64_t>(w.size());
        const int64_t survivors =
            static_cast<int64_t>(std::ceil((1.0 - rate) * static_cast<double>(n)));
        const int64_t pruned = n - survivors;
        if (pruned <= 0) continue;

        std::vector<int64_t> order(static_cast<size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::nth_element(order.begin(), order.begin() + pruned, order.end(),
                         [&](int64_t a, int64_t b) {
                             const float ma = std::fabs(w[static_cast<size_t>(a)]);
                             const float mb = std::fabs(w[static_cast<size_t>(b)]);
                             if (ma != mb) return ma < mb;
                             return a < b;
                         });
        auto& mask = net.masks[li];
        mask.assign(static_cast<size_t>(n), 1);
        for (int64_t i = 0; i < pruned; ++i) {
            mask[static_cast<size_t>(order[static_cast<size_t>(i)])] = 0;
            w[static_cast<size_t>(order[static_cast<size_t>(i)])] = 0.0f;
        }
    }
}

void retrain_pruned(nn::Network& net, const std::vector<buffers::PruneSample>& samples,
                    const RetrainConfig& cfg, std::mt19937& rng) {
    if (samples.empty()) {
        std::cerr << "warning: empty prune buffer, skipping retrain (prune-only)\n";
        return;
    }
    std::vector<Tensor> xs;
    std::vector<int> ys;
    xs.reserve(samples.size());
    ys.reserve(samples.size());
    for (const auto& s : samples) {
        xs.push_back(s.x);
        ys.push_back(s.y);
    }
    TrainSchedule schedule{cfg.epochs, cfg.sgd};
    train_on_samples(net, xs, ys, schedule, rng);
}

int predict(const nn::Network& sel, const experts::ExpertPool& pool, const Tensor& x,
            const LabelMap& label_map) {
    Tensor flat = x.reshaped({1, static_cast<int>(x.numel())});
    const Tensor sel_scores = nn::forward(sel, flat);
    int expert_id = 0;
    for (int j = 1; j < sel.output_dim; ++j)
        if (sel_scores.values[static_cast<size_t>(j)] >
            sel_scores.values[static_cast<size_t>(expert_id)])
            expert_id = j;

    const nn::Network& net = pool.expert(expert_id).net;
    std::vector<int> dims{1};
    dims.insert(dims.end(), net.input_dims.begin(), net.input_dims.end());
    const Tensor scores = nn::forward(net, x.reshaped(dims));
    int local = 0;
    for (int j = 1; j < net.output_dim; ++j)
        if (scores.values[static_cast<size_t>(j)] > scores.values[static_cast<size_t>(local)])
            local = j;

    return label_map.at(static_cast<size_t>(expert_id)).at(static_cast<size_t>(local));
}

}  // namespace tame::selector
