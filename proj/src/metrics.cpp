#include "tame/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace tame::metrics {

namespace {

// Argmax per row of a [n, k] score tensor.
std::vector<int> argmax_rows(const Tensor& scores) {
    const int n = scores.dim(0), k = scores.dim(1);
    std::vector<int> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const float* row = scores.data() + static_cast<int64_t>(i) * k;
        int best = 0;
        for (int j = 1; j < k; ++j)
            if (row[j] > row[best]) best = j;
        out[static_cast<size_t>(i)] = best;
    }
    return out;
}

// Forward a [n, ...] tensor through net in chunks, returning row argmaxes.
std::vector<int> argmax_forward(const nn::Network& net, const Tensor& x, int chunk = 512) {
    const int n = x.dim(0);
    const int64_t stride = n > 0 ? x.numel() / n : 0;
    std::vector<int> out;
    out.reserve(static_cast<size_t>(n));
    std::vector<int> dims{0};
    dims.insert(dims.end(), net.input_dims.begin(), net.input_dims.end());
    for (int off = 0; off < n; off += chunk) {
        const int b = std::min(chunk, n - off);
        dims[0] = b;
        Tensor part(dims);
        std::copy_n(x.data() + static_cast<int64_t>(off) * stride, static_cast<int64_t>(b) * stride,
                    part.data());
        const std::vector<int> am = argmax_rows(nn::forward(net, part));
        out.insert(out.end(), am.begin(), am.end());
    }
    return out;
}

}  // namespace

EvalResult evaluate(const experts::ExpertPool& pool, const nn::Network* sel,
                    const selector::LabelMap& label_map,
                    const std::vector<stream::TaskData>& tasks,
                    std::vector<PredictionRecord>* log,
                    const std::vector<int>* oracle_task_owner) {
    if (!sel && !oracle_task_owner)
        throw std::invalid_argument("evaluate needs a selector or oracle routing");
    if (static_cast<int>(label_map.size()) < pool.count())
        throw std::invalid_argument("label_map does not cover all experts");

    EvalResult res;
    for (const auto& td : tasks) {
        const int n = td.test_x.dim(0);
        std::vector<int> routed(static_cast<size_t>(n));
        if (oracle_task_owner) {
            const int owner = oracle_task_owner->at(static_cast<size_t>(td.task));
            std::fill(routed.begin(), routed.end(), owner);
        } else {
            routed = argmax_forward(*sel, td.test_x, 512);
        }

        // Group samples by routed expert, one batched forward per expert.
        std::vector<int> pred_global(static_cast<size_t>(n), -1);
        std::vector<std::vector<int>> by_expert(static_cast<size_t>(pool.count()));
        for (int i = 0; i < n; ++i) by_expert[static_cast<size_t>(routed[i])].push_back(i);

        const int64_t stride = n > 0 ? td.test_x.numel() / n : 0;
        for (int e = 0; e < pool.count(); ++e) {
            const auto& rows = by_expert[static_cast<size_t>(e)];
            if (rows.empty()) continue;
            const nn::Network& net = pool.expert(e).net;
            std::vector<int> dims{static_cast<int>(rows.size())};
            dims.insert(dims.end(), net.input_dims.begin(), net.input_dims.end());
            Tensor gathered(dims);
            for (size_t i = 0; i < rows.size(); ++i)
                std::copy_n(td.test_x.data() + rows[i] * stride, stride,
                            gathered.data() + static_cast<int64_t>(i) * stride);
            const std::vector<int> locals = argmax_rows(nn::forward(net, gathered));
            for (size_t i = 0; i < rows.size(); ++i)
                pred_global[static_cast<size_t>(rows[i])] =
                    label_map.at(static_cast<size_t>(e)).at(static_cast<size_t>(locals[i]));
        }

        int64_t correct = 0;
        for (int i = 0; i < n; ++i) {
            const bool ok = pred_global[static_cast<size_t>(i)] ==
                            td.test_y_global[static_cast<size_t>(i)];
            correct += ok;
            if (log)
                log->push_back({td.task, i, td.test_y_global[static_cast<size_t>(i)],
                                pred_global[static_cast<size_t>(i)], routed[static_cast<size_t>(i)]});
        }
        res.per_task.push_back(n > 0 ? static_cast<double>(correct) / n : 0.0);
    }

    double sum = 0.0;
    for (double a : res.per_task) sum += a;
    res.acc = res.per_task.empty() ? 0.0 : sum / static_cast<double>(res.per_task.size());
    return res;
}

}  // namespace tame::metrics
