#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cmath>
#include <random>
#include <vector>

#include "tame/nn.hpp"
#include "tame/tensor.hpp"

namespace testutil {

inline tame::Tensor random_tensor(std::vector<int> dims, std::mt19937& rng, float lo = -1.0f,
                                  float hi = 1.0f) {
    tame::Tensor t(std::move(dims));
    std::uniform_real_distribution<float> d(lo, hi);
    for (auto& v : t.values) v = d(rng);
    return t;
}

// Central finite differences against the implementation's own loss value;
// the backward pass never enters the difference quotient. Returns the worst
// floored relative error max|analytic - fd| / max(1, |analytic|, |fd|).
inline double gradient_check(tame::nn::Network& net, const tame::Tensor& batch,
                             const std::vector<int>& labels, float eps = 1e-2f) {
    const tame::nn::LossGrads lg = tame::nn::loss_and_grads(net, batch, labels);
    double worst = 0.0;
    for (size_t li = 0; li < net.layers.size(); ++li) {
        if (!net.layers[li].parametric()) continue;
        for (int which = 0; which < 2; ++which) {
            tame::Tensor& param = which == 0 ? net.weights[li] : net.biases[li];
            const tame::Tensor& grad = which == 0 ? lg.grads.w[li] : lg.grads.b[li];
            for (size_t i = 0; i < param.values.size(); ++i) {
                const float orig = param.values[i];
                const float wp = orig + eps, wm = orig - eps;
                param.values[i] = wp;
                const double lp = tame::nn::batch_loss(net, batch, labels);
                param.values[i] = wm;
                const double lm = tame::nn::batch_loss(net, batch, labels);
                param.values[i] = orig;
                const double fd = (lp - lm) / (static_cast<double>(wp) - static_cast<double>(wm));
                const double an = grad.values[i];
                const double err =
                    std::fabs(an - fd) / std::max({1.0, std::fabs(an), std::fabs(fd)});
                worst = std::max(worst, err);
            }
        }
    }
    return worst;
}

// Closed-form EWMA: alpha * sum_k (1-alpha)^k l_{t-k} + (1-alpha)^t l_0.
inline double ewma_closed_form(const std::vector<double>& stream, double alpha) {
    long double acc = stream.front();
    for (size_t i = 1; i < stream.size(); ++i)
        acc = static_cast<long double>(alpha) * stream[i] + (1.0L - alpha) * acc;
    return static_cast<double>(acc);
}

// Independent mean + 3 * population-std recomputation (same FIFO order).
template <class Range>
inline double brute_force_threshold(const Range& values) {
    double mean = 0.0;
    double n = 0.0;
    for (double v : values) {
        mean += v;
        n += 1.0;
    }
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= n;
    return mean + 3.0 * std::sqrt(var);
}

}  // namespace testutil
