#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tame {

// Dense row-major float tensor. Shape product always equals values.size().
struct Tensor {
    std::vector<int> shape;
    std::vector<float> values;

    Tensor() = default;
    explicit Tensor(std::vector<int> dims, float fill = 0.0f)
        : shape(std::move(dims)), values(static_cast<size_t>(numel_of(shape)), fill) {}

    static int64_t numel_of(const std::vector<int>& dims) {
        int64_t n = 1;
        for (int d : dims) {
            if (d < 0) throw std::invalid_argument("tensor dim must be non-negative");
            n *= d;
        }
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(values.size()); }
    int dim(int i) const { return shape.at(static_cast<size_t>(i)); }
    int rank() const { return static_cast<int>(shape.size()); }

    float* data() { return values.data(); }
    const float* data() const { return values.data(); }

    // Reinterprets the value block under a new shape with the same element count.
    Tensor reshaped(std::vector<int> dims) const {
        if (numel_of(dims) != numel()) throw std::invalid_argument("reshape changes element count");
        Tensor t;
        t.shape = std::move(dims);
        t.values = values;
        return t;
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    std::string shape_str() const {
        std::string s = "[";
        for (size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

inline bool all_finite(const Tensor& t) {
    for (float v : t.values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace tame
