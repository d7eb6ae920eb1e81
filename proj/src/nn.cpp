#include "tame/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tame/kernels.hpp"

namespace tame::nn {

namespace {

int64_t numel(const std::vector<int>& dims) { return Tensor::numel_of(dims); }

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

// ---------------------------------------------------------------------------
// Layer specs and network construction
// ---------------------------------------------------------------------------

LayerSpec LayerSpec::dense(int in, int out) {
    LayerSpec s{LayerKind::kDense};
    s.in = in;
    s.out = out;
    return s;
}
LayerSpec LayerSpec::conv2d(int in_ch, int out_ch, int k) {
    LayerSpec s{LayerKind::kConv2d};
    s.in_ch = in_ch;
    s.out_ch = out_ch;
    s.k = k;
    return s;
}
LayerSpec LayerSpec::relu() { return LayerSpec{LayerKind::kRelu}; }
LayerSpec LayerSpec::maxpool2d(int k) {
    LayerSpec s{LayerKind::kMaxPool2d};
    s.pool = k;
    return s;
}
LayerSpec LayerSpec::flatten() { return LayerSpec{LayerKind::kFlatten}; }
LayerSpec LayerSpec::sigmoid() { return LayerSpec{LayerKind::kSigmoid}; }

namespace {

// Walks per-sample dims through one layer, validating composition.
std::vector<int> out_dims(const LayerSpec& l, const std::vector<int>& in) {
    switch (l.kind) {
        case LayerKind::kDense:
            if (in.size() != 1 || in[0] != l.in)
                fail("dense layer expects flat input of size " + std::to_string(l.in));
            if (l.in <= 0 || l.out <= 0) fail("dense dims must be positive");
            return {l.out};
        case LayerKind::kConv2d: {
            if (in.size() != 3 || in[0] != l.in_ch) fail("conv2d expects [in_ch,h,w] input");
            if (l.k <= 0 || l.out_ch <= 0) fail("conv2d dims must be positive");
            const int oh = in[1] - l.k + 1, ow = in[2] - l.k + 1;
            if (oh <= 0 || ow <= 0) fail("conv2d kernel larger than input");
            return {l.out_ch, oh, ow};
        }
        case LayerKind::kMaxPool2d: {
            if (in.size() != 3) fail("maxpool2d expects [c,h,w] input");
            if (l.pool <= 0) fail("pool size must be positive");
            const int oh = in[1] / l.pool, ow = in[2] / l.pool;
            if (oh <= 0 || ow <= 0) fail("maxpool2d output is empty");
            return {in[0], oh, ow};
        }
        case LayerKind::kFlatten:
            return {static_cast<int>(numel(in))};
        case LayerKind::kRelu:
        case LayerKind::kSigmoid:
            return in;
    }
    fail("unknown layer kind");
}

}  // namespace

Network make_network(std::vector<int> input_dims, std::vector<LayerSpec> layers) {
    if (layers.empty()) fail("network needs at least one layer");
    if (layers.back().kind != LayerKind::kSigmoid) fail("final layer must be sigmoid");
    Network net;
    net.input_dims = std::move(input_dims);
    net.layers = std::move(layers);
    net.weights.resize(net.layers.size());
    net.biases.resize(net.layers.size());
    net.masks.resize(net.layers.size());

    std::vector<int> dims = net.input_dims;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        dims = out_dims(l, dims);
        if (l.kind == LayerKind::kDense) {
            net.weights[i] = Tensor({l.out, l.in});
            net.biases[i] = Tensor({l.out});
        } else if (l.kind == LayerKind::kConv2d) {
            net.weights[i] = Tensor({l.out_ch, l.in_ch, l.k, l.k});
            net.biases[i] = Tensor({l.out_ch});
        }
    }
    if (dims.size() != 1) fail("network output must be flat");
    net.output_dim = dims[0];
    return net;
}

void init_kaiming(Network& net, std::mt19937& rng) {
    for (size_t i = 0; i < net.layers.size(); ++i) {
        if (!net.layers[i].parametric()) continue;
        const LayerSpec& l = net.layers[i];
        const int fan_in = l.kind == LayerKind::kDense ? l.in : l.in_ch * l.k * l.k;
        // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)); the soft variant keeps the
        // sigmoid head out of early saturation at lr 0.1 with momentum.
        const float bound = std::sqrt(1.0f / static_cast<float>(fan_in));
        std::uniform_real_distribution<float> dist(-bound, bound);
        for (float& w : net.weights[i].values) w = dist(rng);
        std::fill(net.biases[i].values.begin(), net.biases[i].values.end(), 0.0f);
    }
}

int64_t Network::param_count() const {
    int64_t n = 0;
    for (size_t i = 0; i < layers.size(); ++i) n += weights[i].numel() + biases[i].numel();
    return n;
}

int64_t Network::surviving_param_count() const {
    int64_t n = 0;
    for (size_t i = 0; i < layers.size(); ++i) {
        if (masks[i].empty()) {
            n += weights[i].numel();
        } else {
            for (uint8_t m : masks[i]) n += m != 0;
        }
        n += biases[i].numel();
    }
    return n;
}

void SgdConfig::validate() const {
    if (!(learning_rate > 0.0f)) fail("learning_rate must be > 0");
    if (momentum < 0.0f || momentum >= 1.0f) fail("momentum must be in [0,1)");
    if (weight_decay < 0.0f) fail("weight_decay must be >= 0");
    if (batch_size < 1) fail("batch_size must be >= 1");
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

namespace {

struct ForwardCache {
    // acts[0] is the input batch; acts[i+1] the output of layer i.
    std::vector<Tensor> acts;
    // Flat argmax (into the per-sample input block) for each pooled output.
    std::vector<std::vector<int>> pool_argmax;
};

std::vector<int> batch_dims(const std::vector<int>& sample_dims, int b) {
    std::vector<int> d{b};
    d.insert(d.end(), sample_dims.begin(), sample_dims.end());
    return d;
}

void check_input(const Network& net, const Tensor& batch) {
    if (batch.rank() < 2) fail("batch tensor must have a leading batch dimension");
    const std::vector<int> expect(batch.shape.begin() + 1, batch.shape.end());
    if (expect != net.input_dims)
        fail("batch sample shape does not match network input " + batch.shape_str());
}

void im2col(const float* x, int c, int h, int w, int k, float* cols, int oh, int ow) {
    // cols is [c*k*k, oh*ow]
    const int p = oh * ow;
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                float* row = cols + (static_cast<int64_t>(ch) * k * k + ky * k + kx) * p;
                const float* src = x + (static_cast<int64_t>(ch) * h + ky) * w + kx;
                for (int oy = 0; oy < oh; ++oy) {
                    std::memcpy(row + static_cast<int64_t>(oy) * ow,
                                src + static_cast<int64_t>(oy) * w, sizeof(float) * ow);
                }
            }
        }
    }
}

void col2im_add(const float* cols, int c, int h, int w, int k, float* x, int oh, int ow) {
    const int p = oh * ow;
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const float* row = cols + (static_cast<int64_t>(ch) * k * k + ky * k + kx) * p;
                float* dst = x + (static_cast<int64_t>(ch) * h + ky) * w + kx;
                for (int oy = 0; oy < oh; ++oy) {
                    float* d = dst + static_cast<int64_t>(oy) * w;
                    const float* s = row + static_cast<int64_t>(oy) * ow;
                    for (int ox = 0; ox < ow; ++ox) d[ox] += s[ox];
                }
            }
        }
    }
}

Tensor run_forward(const Network& net, const Tensor& batch, ForwardCache* cache) {
    check_input(net, batch);
    const auto& ops = kernels::active();
    const int b = batch.dim(0);

    if (cache) {
        cache->acts.clear();
        cache->pool_argmax.assign(net.layers.size(), {});
        cache->acts.reserve(net.layers.size() + 1);
        cache->acts.push_back(batch);
    }

    Tensor cur = batch;
    std::vector<int> dims = net.input_dims;
    std::vector<float> cols;

    for (size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& l = net.layers[li];
        const std::vector<int> odims = out_dims(l, dims);
        Tensor next(batch_dims(odims, b));

        switch (l.kind) {
            case LayerKind::kDense: {
                ops.gemm_nt(cur.data(), net.weights[li].data(), next.data(), b, l.out, l.in,
                            false);
                ops.add_bias_rows(next.data(), net.biases[li].data(), b, l.out);
                break;
            }
            case LayerKind::kConv2d: {
                const int c = dims[0], h = dims[1], w = dims[2];
                const int oh = odims[1], ow = odims[2];
                const int kk = l.in_ch * l.k * l.k, p = oh * ow;
                cols.resize(static_cast<size_t>(kk) * p);
                const int64_t in_stride = numel(dims), out_stride = numel(odims);
                for (int s = 0; s < b; ++s) {
                    im2col(cur.data() + s * in_stride, c, h, w, l.k, cols.data(), oh, ow);
                    float* out = next.data() + s * out_stride;
                    ops.gemm_nn(net.weights[li].data(), cols.data(), out, l.out_ch, p, kk, false);
                    for (int oc = 0; oc < l.out_ch; ++oc) {
                        const float bias = net.biases[li].values[static_cast<size_t>(oc)];
                        float* row = out + static_cast<int64_t>(oc) * p;
                        for (int j = 0; j < p; ++j) row[j] += bias;
                    }
                }
                break;
            }
            case LayerKind::kMaxPool2d: {
                const int c = dims[0], h = dims[1], w = dims[2];
                const int oh = odims[1], ow = odims[2], ps = l.pool;
                const int64_t in_stride = numel(dims), out_stride = numel(odims);
                std::vector<int>* arg = nullptr;
                if (cache) {
                    cache->pool_argmax[li].resize(static_cast<size_t>(b) * out_stride);
                    arg = &cache->pool_argmax[li];
                }
                for (int s = 0; s < b; ++s) {
                    const float* x = cur.data() + s * in_stride;
                    float* y = next.data() + s * out_stride;
                    for (int ch = 0; ch < c; ++ch) {
                        for (int oy = 0; oy < oh; ++oy) {
                            for (int ox = 0; ox < ow; ++ox) {
                                int best = (ch * h + oy * ps) * w + ox * ps;
                                float bv = x[best];
                                for (int ky = 0; ky < ps; ++ky) {
                                    for (int kx = 0; kx < ps; ++kx) {
                                        const int idx = (ch * h + oy * ps + ky) * w + ox * ps + kx;
                                        if (x[idx] > bv) {
                                            bv = x[idx];
                                            best = idx;
                                        }
                                    }
                                }
                                const int64_t o = (static_cast<int64_t>(ch) * oh + oy) * ow + ox;
                                y[o] = bv;
                                if (arg) (*arg)[s * out_stride + o] = best;
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::kFlatten:
                next.values = cur.values;
                break;
            case LayerKind::kRelu:
                ops.relu_fwd(cur.data(), next.data(), cur.numel());
                break;
            case LayerKind::kSigmoid:
                ops.sigmoid_fwd(cur.data(), next.data(), cur.numel());
                break;
        }

        cur = std::move(next);
        dims = odims;
        if (cache) cache->acts.push_back(cur);
    }
    return cur;
}

// Mean softmax cross-entropy over score rows; writes d(loss)/d(scores) when
// dscores is non-null. Scores are the post-sigmoid outputs.
double softmax_ce(const Tensor& scores, const std::vector<int>& labels, int classes,
                  Tensor* dscores) {
    const int b = scores.dim(0);
    if (static_cast<int>(labels.size()) != b) fail("labels length must match batch size");
    double total = 0.0;
    for (int i = 0; i < b; ++i) {
        const int y = labels[static_cast<size_t>(i)];
        if (y < 0 || y >= classes) fail("label out of range: " + std::to_string(y));
        const float* s = scores.data() + static_cast<int64_t>(i) * classes;
        float mx = s[0];
        for (int j = 1; j < classes; ++j) mx = std::max(mx, s[j]);
        double sum = 0.0;
        for (int j = 0; j < classes; ++j) sum += std::exp(static_cast<double>(s[j] - mx));
        total += std::log(sum) + static_cast<double>(mx) - static_cast<double>(s[y]);
        if (dscores) {
            float* d = dscores->data() + static_cast<int64_t>(i) * classes;
            for (int j = 0; j < classes; ++j) {
                const double p = std::exp(static_cast<double>(s[j] - mx)) / sum;
                d[j] = static_cast<float>((p - (j == y ? 1.0 : 0.0)) / b);
            }
        }
    }
    return total / b;
}

}  // namespace

Tensor forward(const Network& net, const Tensor& batch) { return run_forward(net, batch, nullptr); }

double batch_loss(const Network& net, const Tensor& batch, const std::vector<int>& labels) {
    const Tensor scores = run_forward(net, batch, nullptr);
    return softmax_ce(scores, labels, net.output_dim, nullptr);
}

LossGrads loss_and_grads(const Network& net, const Tensor& batch, const std::vector<int>& labels) {
    const auto& ops = kernels::active();
    ForwardCache cache;
    const Tensor scores = run_forward(net, batch, &cache);

    LossGrads out;
    out.grads.w.resize(net.layers.size());
    out.grads.b.resize(net.layers.size());
    for (size_t i = 0; i < net.layers.size(); ++i) {
        if (!net.layers[i].parametric()) continue;
        out.grads.w[i] = Tensor(net.weights[i].shape);
        out.grads.b[i] = Tensor(net.biases[i].shape);
    }

    Tensor delta(scores.shape);
    out.loss = softmax_ce(scores, labels, net.output_dim, &delta);

    const int b = batch.dim(0);
    std::vector<float> cols, dcols;

    // Walk layers in reverse; delta holds d(loss)/d(layer output).
    for (int li = static_cast<int>(net.layers.size()) - 1; li >= 0; --li) {
        const LayerSpec& l = net.layers[static_cast<size_t>(li)];
        const Tensor& x = cache.acts[static_cast<size_t>(li)];
        const Tensor& y = cache.acts[static_cast<size_t>(li) + 1];
        Tensor dx(x.shape);

        switch (l.kind) {
            case LayerKind::kSigmoid:
                ops.sigmoid_bwd(y.data(), delta.data(), dx.data(), y.numel());
                break;
            case LayerKind::kRelu:
                ops.relu_bwd(x.data(), delta.data(), dx.data(), x.numel());
                break;
            case LayerKind::kFlatten:
                dx.values = delta.values;
                break;
            case LayerKind::kDense: {
                Tensor& dw = out.grads.w[static_cast<size_t>(li)];
                Tensor& db = out.grads.b[static_cast<size_t>(li)];
                // dW[out,in] = delta[b,out]^T * x[b,in]
                ops.gemm_tn(delta.data(), x.data(), dw.data(), l.out, l.in, b, false);
                for (int s = 0; s < b; ++s) {
                    const float* d = delta.data() + static_cast<int64_t>(s) * l.out;
                    for (int j = 0; j < l.out; ++j) db.values[static_cast<size_t>(j)] += d[j];
                }
                // dx[b,in] = delta[b,out] * W[out,in]
                ops.gemm_nn(delta.data(), net.weights[static_cast<size_t>(li)].data(), dx.data(),
                            b, l.in, l.out, false);
                break;
            }
            case LayerKind::kConv2d: {
                const int c = x.dim(1), h = x.dim(2), w = x.dim(3);
                const int oh = y.dim(2), ow = y.dim(3);
                const int kk = l.in_ch * l.k * l.k, p = oh * ow;
                const int64_t in_stride = static_cast<int64_t>(c) * h * w;
                const int64_t out_stride = static_cast<int64_t>(l.out_ch) * p;
                cols.resize(static_cast<size_t>(kk) * p);
                dcols.resize(static_cast<size_t>(kk) * p);
                Tensor& dw = out.grads.w[static_cast<size_t>(li)];
                Tensor& db = out.grads.b[static_cast<size_t>(li)];
                for (int s = 0; s < b; ++s) {
                    const float* xs = x.data() + s * in_stride;
                    const float* ds = delta.data() + s * out_stride;
                    im2col(xs, c, h, w, l.k, cols.data(), oh, ow);
                    // dW[oc,kk] += delta_s[oc,p] * cols[kk,p]^T
                    ops.gemm_nt(ds, cols.data(), dw.data(), l.out_ch, kk, p, true);
                    for (int oc = 0; oc < l.out_ch; ++oc) {
                        const float* row = ds + static_cast<int64_t>(oc) * p;
                        float acc = 0.0f;
                        for (int j = 0; j < p; ++j) acc += row[j];
                        db.values[static_cast<size_t>(oc)] += acc;
                    }
                    // dcols[kk,p] = W[oc,kk]^T * delta_s[oc,p]
                    ops.gemm_tn(net.weights[static_cast<size_t>(li)].data(), ds, dcols.data(), kk,
                                p, l.out_ch, false);
                    col2im_add(dcols.data(), c, h, w, l.k, dx.data() + s * in_stride, oh, ow);
                }
                break;
            }
            case LayerKind::kMaxPool2d: {
                const auto& arg = cache.pool_argmax[static_cast<size_t>(li)];
                const int64_t in_stride = x.numel() / b, out_stride = y.numel() / b;
                for (int s = 0; s < b; ++s) {
                    const float* d = delta.data() + s * out_stride;
                    float* g = dx.data() + s * in_stride;
                    const int* a = arg.data() + s * out_stride;
                    for (int64_t o = 0; o < out_stride; ++o) g[a[o]] += d[o];
                }
                break;
            }
        }
        delta = std::move(dx);
    }
    return out;
}

void sgd_step(Network& net, const Grads& grads, const SgdConfig& cfg, SgdState& state) {
    cfg.validate();
    const auto& ops = kernels::active();
    if (state.vw.empty()) {
        state.vw.resize(net.layers.size());
        state.vb.resize(net.layers.size());
        for (size_t i = 0; i < net.layers.size(); ++i) {
            if (!net.layers[i].parametric()) continue;
            state.vw[i] = Tensor(net.weights[i].shape);
            state.vb[i] = Tensor(net.biases[i].shape);
        }
    }
    for (size_t i = 0; i < net.layers.size(); ++i) {
        if (!net.layers[i].parametric()) continue;
        if (!grads.w[i].same_shape(net.weights[i]) || !grads.b[i].same_shape(net.biases[i]))
            fail("gradient shapes do not match parameters");
        const uint8_t* mask = net.masks[i].empty() ? nullptr : net.masks[i].data();
        ops.sgd_update(net.weights[i].data(), grads.w[i].data(), state.vw[i].data(), mask,
                       net.weights[i].numel(), cfg.learning_rate, cfg.momentum, cfg.nesterov,
                       cfg.weight_decay);
        // Biases are never masked.
        ops.sgd_update(net.biases[i].data(), grads.b[i].data(), state.vb[i].data(), nullptr,
                       net.biases[i].numel(), cfg.learning_rate, cfg.momentum, cfg.nesterov,
                       cfg.weight_decay);
    }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'T', 'A', 'M', 'E'};

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("checkpoint truncated");
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void put_f32s(std::ostream& out, const std::vector<float>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
}

void get_f32s(std::istream& in, std::vector<float>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint truncated");
}

}  // namespace

void save_network(const Network& net, std::ostream& out) {
    bool any_mask = false;
    for (const auto& m : net.masks) any_mask |= !m.empty();

    out.write(kMagic, 4);
    put_u32(out, any_mask ? 2 : 1);
    put_u32(out, static_cast<uint32_t>(net.layers.size() + 1));
    // Pseudo-layer 0 records the input dims so the graph round-trips.
    put_u32(out, static_cast<uint32_t>(net.input_dims.size()));
    for (int d : net.input_dims) put_u32(out, static_cast<uint32_t>(d));

    for (size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        const uint8_t tag = static_cast<uint8_t>(l.kind);
        out.write(reinterpret_cast<const char*>(&tag), 1);
        switch (l.kind) {
            case LayerKind::kDense:
                put_u32(out, static_cast<uint32_t>(l.in));
                put_u32(out, static_cast<uint32_t>(l.out));
                break;
            case LayerKind::kConv2d:
                put_u32(out, static_cast<uint32_t>(l.in_ch));
                put_u32(out, static_cast<uint32_t>(l.out_ch));
                put_u32(out, static_cast<uint32_t>(l.k));
                break;
            case LayerKind::kMaxPool2d:
                put_u32(out, static_cast<uint32_t>(l.pool));
                break;
            default:
                break;
        }
        if (l.parametric()) {
            put_f32s(out, net.weights[i].values);
            put_f32s(out, net.biases[i].values);
        }
    }

    if (any_mask) {
        for (size_t i = 0; i < net.layers.size(); ++i) {
            if (!net.layers[i].parametric()) continue;
            const int64_t n = net.weights[i].numel();
            std::vector<uint8_t> packed(static_cast<size_t>((n + 7) / 8), 0);
            for (int64_t j = 0; j < n; ++j) {
                const bool keep = net.masks[i].empty() || net.masks[i][static_cast<size_t>(j)];
                if (keep) packed[static_cast<size_t>(j / 8)] |= uint8_t(1u << (j % 8));
            }
            out.write(reinterpret_cast<const char*>(packed.data()),
                      static_cast<std::streamsize>(packed.size()));
        }
    }
    if (!out) throw std::runtime_error("checkpoint write failed");
}

Network load_network(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad checkpoint magic");
    const uint32_t version = get_u32(in);
    if (version != 1 && version != 2)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    const uint32_t count = get_u32(in);
    if (count < 2) throw std::runtime_error("checkpoint has no layers");

    const uint32_t in_rank = get_u32(in);
    std::vector<int> input_dims;
    for (uint32_t i = 0; i < in_rank; ++i) input_dims.push_back(static_cast<int>(get_u32(in)));

    std::vector<LayerSpec> layers;
    std::vector<std::vector<float>> payloads;
    for (uint32_t i = 0; i + 1 < count; ++i) {
        uint8_t tag = 0;
        in.read(reinterpret_cast<char*>(&tag), 1);
        if (!in) throw std::runtime_error("checkpoint truncated");
        LayerSpec l{static_cast<LayerKind>(tag)};
        switch (l.kind) {
            case LayerKind::kDense:
                l.in = static_cast<int>(get_u32(in));
                l.out = static_cast<int>(get_u32(in));
                break;
            case LayerKind::kConv2d:
                l.in_ch = static_cast<int>(get_u32(in));
                l.out_ch = static_cast<int>(get_u32(in));
                l.k = static_cast<int>(get_u32(in));
                break;
            case LayerKind::kMaxPool2d:
                l.pool = static_cast<int>(get_u32(in));
                break;
            case LayerKind::kRelu:
            case LayerKind::kFlatten:
            case LayerKind::kSigmoid:
                break;
            default:
                throw std::runtime_error("unknown layer tag " + std::to_string(tag));
        }
        layers.push_back(l);
        if (l.parametric()) {
            const int64_t wn = l.kind == LayerKind::kDense
                                   ? static_cast<int64_t>(l.in) * l.out
                                   : static_cast<int64_t>(l.out_ch) * l.in_ch * l.k * l.k;
            const int64_t bn = l.kind == LayerKind::kDense ? l.out : l.out_ch;
            std::vector<float> w(static_cast<size_t>(wn)), b(static_cast<size_t>(bn));
            get_f32s(in, w);
            get_f32s(in, b);
            payloads.push_back(std::move(w));
            payloads.push_back(std::move(b));
        }
    }

    Network net = make_network(std::move(input_dims), std::move(layers));
    size_t pi = 0;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        if (!net.layers[i].parametric()) continue;
        net.weights[i].values = std::move(payloads[pi++]);
        net.biases[i].values = std::move(payloads[pi++]);
    }

    if (version == 2) {
        for (size_t i = 0; i < net.layers.size(); ++i) {
            if (!net.layers[i].parametric()) continue;
            const int64_t n = net.weights[i].numel();
            std::vector<uint8_t> packed(static_cast<size_t>((n + 7) / 8));
            in.read(reinterpret_cast<char*>(packed.data()),
                    static_cast<std::streamsize>(packed.size()));
            if (!in) throw std::runtime_error("checkpoint truncated (mask section)");
            net.masks[i].resize(static_cast<size_t>(n));
            for (int64_t j = 0; j < n; ++j)
                net.masks[i][static_cast<size_t>(j)] =
                    (packed[static_cast<size_t>(j / 8)] >> (j % 8)) & 1u;
        }
    }
    return net;
}

void save_network_file(const Network& net, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    save_network(net, f);
}

Network load_network_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return load_network(f);
}

// ---------------------------------------------------------------------------
// Stock architectures
// ---------------------------------------------------------------------------

Network make_conv_expert(int in_ch, int in_h, int in_w, int classes, int hidden) {
    const int h1 = (in_h - 2) / 2, w1 = (in_w - 2) / 2;
    const int h2 = (h1 - 2) / 2, w2 = (w1 - 2) / 2;
    const int flat = 32 * h2 * w2;
    return make_network({in_ch, in_h, in_w},
                        {LayerSpec::conv2d(in_ch, 16, 3), LayerSpec::relu(),
                         LayerSpec::maxpool2d(2), LayerSpec::conv2d(16, 32, 3), LayerSpec::relu(),
                         LayerSpec::maxpool2d(2), LayerSpec::flatten(),
                         LayerSpec::dense(flat, hidden), LayerSpec::relu(),
                         LayerSpec::dense(hidden, classes), LayerSpec::sigmoid()});
}

Network make_mlp(int in_dim, int hidden, int out_dim) {
    return make_network({in_dim}, {LayerSpec::dense(in_dim, hidden), LayerSpec::relu(),
                                   LayerSpec::dense(hidden, out_dim), LayerSpec::sigmoid()});
}

}  // namespace tame::nn
