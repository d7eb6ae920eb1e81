#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "tame/tensor.hpp"

namespace tame::nn {

enum class LayerKind : uint8_t {
    kDense = 1,
    kConv2d = 2,
    kRelu = 3,
    kMaxPool2d = 4,
    kFlatten = 5,
    kSigmoid = 6,
};

struct LayerSpec {
    LayerKind kind;
    int in = 0, out = 0;               // dense
    int in_ch = 0, out_ch = 0, k = 0;  // conv2d (valid padding, stride 1)
    int pool = 0;                      // maxpool2d kernel == stride

    static LayerSpec dense(int in, int out);
    static LayerSpec conv2d(int in_ch, int out_ch, int k);
    static LayerSpec relu();
    static LayerSpec maxpool2d(int k);
    static LayerSpec flatten();
    static LayerSpec sigmoid();

    bool parametric() const { return kind == LayerKind::kDense || kind == LayerKind::kConv2d; }
};

// Feed-forward network. Layer shapes compose; the head is always a sigmoid,
// so forward() scores live in [0,1].
struct Network {
    std::vector<int> input_dims;  // per-sample dims, e.g. {1,28,28} or {16}
    std::vector<LayerSpec> layers;
    std::vector<Tensor> weights;               // aligned with layers; empty if non-parametric
    std::vector<Tensor> biases;                // dense: [out], conv2d: [out_ch]
    std::vector<std::vector<uint8_t>> masks;   // per-layer weight mask; empty = dense layer mask off
    int output_dim = 0;

    int64_t param_count() const;
    int64_t surviving_param_count() const;  // respects masks; biases always survive
};

// Validates that consecutive layer shapes compose and the final layer is a
// sigmoid. Parameters are allocated zero-filled.
Network make_network(std::vector<int> input_dims, std::vector<LayerSpec> layers);

// Kaiming-uniform fan-in init for dense/conv weights, zero biases.
void init_kaiming(Network& net, std::mt19937& rng);

struct Grads {
    std::vector<Tensor> w, b;
};

struct SgdConfig {
    float learning_rate = 0.1f;
    float momentum = 0.9f;
    bool nesterov = true;
    float weight_decay = 5e-4f;
    int batch_size = 128;

    void validate() const;
};

// Per-parameter velocity, lazily sized on first step.
struct SgdState {
    std::vector<Tensor> vw, vb;
};

Tensor forward(const Network& net, const Tensor& batch);

struct LossGrads {
    double loss = 0.0;
    Grads grads;
};

// Mean softmax cross-entropy over the sigmoid scores, plus parameter
// gradients. Labels index the local head [0, output_dim).
LossGrads loss_and_grads(const Network& net, const Tensor& batch, const std::vector<int>& labels);

// Probe path: same loss without the backward pass.
double batch_loss(const Network& net, const Tensor& batch, const std::vector<int>& labels);

void sgd_step(Network& net, const Grads& grads, const SgdConfig& cfg, SgdState& state);

// Checkpoint format (little-endian): magic "TAME", u32 version (1 = plain,
// 2 = with per-layer weight masks appended), u32 layer count, then per layer
// a type tag u8 + dims u32s + f32 weight/bias payload. Version 2 appends one
// packed LSB-first bitmask per parametric layer.
void save_network(const Network& net, std::ostream& out);
Network load_network(std::istream& in);
void save_network_file(const Network& net, const std::string& path);
Network load_network_file(const std::string& path);

// Stock architectures. The conv expert is
// conv(c->16,3x3)-relu-pool2-conv(16->32,3x3)-relu-pool2-flatten-dense(100)-relu-dense(classes)-sigmoid.
Network make_conv_expert(int in_ch, int in_h, int in_w, int classes, int hidden = 100);
// 2-layer MLP: dense(in,hidden)-relu-dense(hidden,out)-sigmoid.
Network make_mlp(int in_dim, int hidden, int out_dim);

}  // namespace tame::nn
